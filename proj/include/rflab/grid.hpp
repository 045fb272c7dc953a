#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <optional>
#include <vector>

#include "rflab/errors.hpp"

namespace rflab {

inline constexpr int kMaxDim = 3;

/// Periodic structured grid on a flat torus of dimension 1 to 3.
/// Points are stored row-major: axis 0 varies slowest.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<int> points, std::vector<double> periods);

  /// n^dim points on a cube of the given period.
  static Grid cube(int dim, int n, double period);

  int dim() const { return dim_; }
  int points(int axis) const { return n_[check_axis(axis)]; }
  double period(int axis) const { return period_[check_axis(axis)]; }
  double spacing(int axis) const { return h_[check_axis(axis)]; }
  std::size_t stride(int axis) const { return stride_[check_axis(axis)]; }
  std::size_t size() const { return size_; }
  double cell_volume() const;
  double min_spacing() const;

  std::array<int, kMaxDim> coords(std::size_t p) const;
  /// Coordinate of point p along an axis (x_a = i_a * h_a).
  double coordinate(std::size_t p, int axis) const;

  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int check_axis(int axis) const;

  int dim_ = 0;
  std::array<int, kMaxDim> n_{1, 1, 1};
  std::array<double, kMaxDim> period_{1, 1, 1};
  std::array<double, kMaxDim> h_{1, 1, 1};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  std::size_t size_ = 0;
};

/// Component-major storage shared by all field kinds.
class ComponentArray {
 public:
  ComponentArray() = default;
  ComponentArray(const Grid& grid, int ncomp, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  int components() const { return ncomp_; }
  std::size_t points() const { return grid_.size(); }

  double* comp(int c) { return data_.data() + static_cast<std::size_t>(c) * grid_.size(); }
  const double* comp(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * grid_.size();
  }
  double& at(int c, std::size_t p) { return data_[static_cast<std::size_t>(c) * grid_.size() + p]; }
  double at(int c, std::size_t p) const {
    return data_[static_cast<std::size_t>(c) * grid_.size() + p];
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  ComponentArray& operator+=(const ComponentArray& o);
  ComponentArray& operator-=(const ComponentArray& o);
  ComponentArray& operator*=(double a);
  /// this += a * x
  void axpy(double a, const ComponentArray& x);
  void fill(double v);

  /// Throws ShapeMismatch unless grid and component count agree.
  void require_same_shape(const ComponentArray& o, const char* op) const;
  void require_grid(const Grid& g, const char* op) const;

 protected:
  Grid grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

/// Packed index of (i, j) in an n x n symmetric matrix (upper triangle, row by row).
int sym_index(int i, int j, int n);
inline int sym_size(int n) { return n * (n + 1) / 2; }

class ScalarField : public ComponentArray {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0) : ComponentArray(grid, 1, fill) {}
  double& operator[](std::size_t p) { return data_[p]; }
  double operator[](std::size_t p) const { return data_[p]; }
};

/// Symmetric rank x rank matrix per point, packed.
class PackedSymField : public ComponentArray {
 public:
  PackedSymField() = default;
  PackedSymField(const Grid& grid, int rank, double fill = 0.0)
      : ComponentArray(grid, sym_size(rank), fill), rank_(rank) {}
  int rank() const { return rank_; }
  double& operator()(int i, int j, std::size_t p) { return at(sym_index(i, j, rank_), p); }
  double operator()(int i, int j, std::size_t p) const { return at(sym_index(i, j, rank_), p); }
  double* comp_ij(int i, int j) { return comp(sym_index(i, j, rank_)); }
  const double* comp_ij(int i, int j) const { return comp(sym_index(i, j, rank_)); }
  /// Set every point to the identity matrix times a.
  void set_identity(double a = 1.0);

 protected:
  int rank_ = 0;
};

/// Symmetric 2-tensor on the base (g, h, Rc, Hess).
class SymTensor2Field : public PackedSymField {
 public:
  SymTensor2Field() = default;
  explicit SymTensor2Field(const Grid& grid, double fill = 0.0)
      : PackedSymField(grid, grid.dim(), fill) {}
  static SymTensor2Field identity(const Grid& grid);
};

/// Fiber inner product G_ij (N x N, SPD when used as a metric).
class FiberMetricField : public PackedSymField {
 public:
  FiberMetricField() = default;
  FiberMetricField(const Grid& grid, int fiber_rank, double fill = 0.0)
      : PackedSymField(grid, fiber_rank, fill) {}
};

/// R^N-valued one-form A^i_a; component index i * dim + a.
class VecOneFormField : public ComponentArray {
 public:
  VecOneFormField() = default;
  VecOneFormField(const Grid& grid, int fiber_rank, double fill = 0.0)
      : ComponentArray(grid, grid.dim() * fiber_rank, fill), fiber_rank_(fiber_rank) {}
  int fiber_rank() const { return fiber_rank_; }
  int index(int i, int a) const { return i * grid_.dim() + a; }
  double& operator()(int i, int a, std::size_t p) { return at(index(i, a), p); }
  double operator()(int i, int a, std::size_t p) const { return at(index(i, a), p); }

 private:
  int fiber_rank_ = 0;
};

/// Top-degree form on a 3D grid, stored as its single component H_012.
class ThreeFormField : public ComponentArray {
 public:
  ThreeFormField() = default;
  explicit ThreeFormField(const Grid& grid, double fill = 0.0);
  double& operator[](std::size_t p) { return data_[p]; }
  double operator[](std::size_t p) const { return data_[p]; }
  /// Full antisymmetric component H_abc at point p.
  double full(int a, int b, int c, std::size_t p) const;
};

/// Tangent vector field X^k, optionally carrying its analytic Jacobian
/// dX(a, k) = d_a X^k (component a * dim + k).
class VectorField : public ComponentArray {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid, double fill = 0.0)
      : ComponentArray(grid, grid.dim(), fill) {}
  double& operator()(int k, std::size_t p) { return at(k, p); }
  double operator()(int k, std::size_t p) const { return at(k, p); }

  bool has_jacobian() const { return jacobian_.has_value(); }
  ComponentArray& jacobian();
  const ComponentArray& jacobian() const;
  void enable_jacobian();
  void clear_jacobian() { jacobian_.reset(); }

 private:
  std::optional<ComponentArray> jacobian_;
};

template <class F>
concept FieldKind = std::derived_from<F, ComponentArray>;

template <FieldKind F>
F operator+(F a, const F& b) {
  a += b;
  return a;
}
template <FieldKind F>
F operator-(F a, const F& b) {
  a -= b;
  return a;
}
template <FieldKind F>
F operator*(double s, F a) {
  a *= s;
  return a;
}

namespace stencil {
/// 4th-order centered first difference along an axis, periodic.
void d1(const double* in, double* out, const Grid& g, int axis);
/// 4th-order centered second difference along an axis, periodic.
void d2(const double* in, double* out, const Grid& g, int axis);
/// d_a d_b: d2 when a == b, d1 composed with d1 otherwise.
void d11(const double* in, double* out, const Grid& g, int a, int b);
}  // namespace stencil

/// 4th-order periodic finite difference of every component; order 1 or 2.
template <FieldKind F>
F partial_derivative(const F& f, int axis, int order) {
  if (axis < 0 || axis >= f.grid().dim()) throw DomainError("partial_derivative: axis out of range");
  if (order != 1 && order != 2) throw DomainError("partial_derivative: order must be 1 or 2");
  F out(f);
  if constexpr (std::same_as<F, VectorField>) out.clear_jacobian();
  for (int c = 0; c < f.components(); ++c) {
    if (order == 1)
      stencil::d1(f.comp(c), out.comp(c), f.grid(), axis);
    else
      stencil::d2(f.comp(c), out.comp(c), f.grid(), axis);
  }
  return out;
}

/// Mixed second partial used by every second-order operator in the library.
template <FieldKind F>
F second_partial(const F& f, int a, int b) {
  if (a < 0 || b < 0 || a >= f.grid().dim() || b >= f.grid().dim())
    throw DomainError("second_partial: axis out of range");
  F out(f);
  if constexpr (std::same_as<F, VectorField>) out.clear_jacobian();
  for (int c = 0; c < f.components(); ++c) stencil::d11(f.comp(c), out.comp(c), f.grid(), a, b);
  return out;
}

/// d_a f_c for every component, stored at comp a * ncomp + c.
ComponentArray first_partials(const ComponentArray& f);
/// d_a d_b f_c (a <= b) at comp sym_index(a, b) * ncomp + c; df from first_partials.
/// Bitwise equal to stencil::d11.
ComponentArray second_partials(const ComponentArray& f, const ComponentArray& df);

/// Riemann sum of f * density over the torus.
double integrate(const ScalarField& f, const ScalarField& density);
/// Riemann sum of f with unit density.
double integrate(const ScalarField& f);
/// Largest absolute component value.
double sup_norm(const ComponentArray& f);

}  // namespace rflab
