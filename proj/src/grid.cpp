#include "rflab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rflab {

Grid::Grid(std::vector<int> points, std::vector<double> periods) {
  if (points.empty() || points.size() > kMaxDim)
    throw DomainError("Grid: dimension must be 1, 2 or 3");
  if (points.size() != periods.size())
    throw ShapeMismatch("Grid: points and periods have different lengths");
  dim_ = static_cast<int>(points.size());
  for (int a = 0; a < dim_; ++a) {
    if (points[a] < 8) throw DomainError("Grid: at least 8 points per axis are required");
    if (!(periods[a] > 0)) throw DomainError("Grid: periods must be positive");
    n_[a] = points[a];
    period_[a] = periods[a];
    h_[a] = periods[a] / points[a];
  }
  size_ = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(n_[a]);
  }
}

Grid Grid::cube(int dim, int n, double period) {
  return Grid(std::vector<int>(dim, n), std::vector<double>(dim, period));
}

int Grid::check_axis(int axis) const {
  if (axis < 0 || axis >= dim_) throw DomainError("Grid: axis out of range");
  return axis;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h_[a];
  return v;
}

double Grid::min_spacing() const {
  double h = h_[0];
  for (int a = 1; a < dim_; ++a) h = std::min(h, h_[a]);
  return h;
}

std::array<int, kMaxDim> Grid::coords(std::size_t p) const {
  std::array<int, kMaxDim> c{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    c[a] = static_cast<int>(p / stride_[a]);
    p %= stride_[a];
  }
  return c;
}

double Grid::coordinate(std::size_t p, int axis) const {
  check_axis(axis);
  return static_cast<int>((p / stride_[axis]) % n_[axis]) * h_[axis];
}

bool Grid::operator==(const Grid& o) const {
  if (dim_ != o.dim_) return false;
  for (int a = 0; a < dim_; ++a)
    if (n_[a] != o.n_[a] || period_[a] != o.period_[a]) return false;
  return true;
}

ComponentArray::ComponentArray(const Grid& grid, int ncomp, double fill)
    : grid_(grid), ncomp_(ncomp), data_(static_cast<std::size_t>(ncomp) * grid.size(), fill) {}

void ComponentArray::require_same_shape(const ComponentArray& o, const char* op) const {
  if (grid_ != o.grid_) throw ShapeMismatch(std::string(op) + ": grid mismatch");
  if (ncomp_ != o.ncomp_) throw ShapeMismatch(std::string(op) + ": component count mismatch");
}

void ComponentArray::require_grid(const Grid& g, const char* op) const {
  if (grid_ != g) throw ShapeMismatch(std::string(op) + ": grid mismatch");
}

ComponentArray& ComponentArray::operator+=(const ComponentArray& o) {
  require_same_shape(o, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComponentArray& ComponentArray::operator-=(const ComponentArray& o) {
  require_same_shape(o, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComponentArray& ComponentArray::operator*=(double a) {
  for (double& v : data_) v *= a;
  return *this;
}

void ComponentArray::axpy(double a, const ComponentArray& x) {
  require_same_shape(x, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
}

void ComponentArray::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

int sym_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

void PackedSymField::set_identity(double a) {
  fill(0.0);
  for (int i = 0; i < rank_; ++i) {
    double* c = comp_ij(i, i);
    std::fill(c, c + grid_.size(), a);
  }
}

SymTensor2Field SymTensor2Field::identity(const Grid& grid) {
  SymTensor2Field g(grid);
  g.set_identity();
  return g;
}

ThreeFormField::ThreeFormField(const Grid& grid, double fill) : ComponentArray(grid, 1, fill) {
  if (grid.dim() != 3) throw DomainError("ThreeFormField requires a 3D grid");
}

double ThreeFormField::full(int a, int b, int c, std::size_t p) const {
  if (a == b || b == c || a == c) return 0.0;
  // sign of the permutation (a, b, c) of (0, 1, 2)
  int inversions = (a > b) + (a > c) + (b > c);
  return (inversions % 2 == 0 ? 1.0 : -1.0) * data_[p];
}

ComponentArray& VectorField::jacobian() {
  if (!jacobian_) throw DomainError("VectorField: no Jacobian attached");
  return *jacobian_;
}

const ComponentArray& VectorField::jacobian() const {
  if (!jacobian_) throw DomainError("VectorField: no Jacobian attached");
  return *jacobian_;
}

void VectorField::enable_jacobian() {
  if (!jacobian_) jacobian_.emplace(grid_, grid_.dim() * grid_.dim());
}

namespace stencil {
namespace {

// Apply a periodic 5-point stencil along one axis. The callback receives
// f[i-2], f[i-1], f[i], f[i+1], f[i+2].
template <class Op>
void apply_axis(const double* in, double* out, const Grid& g, int axis, Op op) {
  const std::size_t s = g.stride(axis);
  const std::size_t n = static_cast<std::size_t>(g.points(axis));
  const std::size_t outer = g.size() / (n * s);
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * n * s;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im2 = base + ((i + n - 2) % n) * s;
      const std::size_t im1 = base + ((i + n - 1) % n) * s;
      const std::size_t i0 = base + i * s;
      const std::size_t ip1 = base + ((i + 1) % n) * s;
      const std::size_t ip2 = base + ((i + 2) % n) * s;
      for (std::size_t k = 0; k < s; ++k)
        out[i0 + k] = op(in[im2 + k], in[im1 + k], in[i0 + k], in[ip1 + k], in[ip2 + k]);
    }
  }
}

}  // namespace

void d1(const double* in, double* out, const Grid& g, int axis) {
  const double c = 1.0 / (12.0 * g.spacing(axis));
  apply_axis(in, out, g, axis, [c](double m2, double m1, double, double p1, double p2) {
    return (8.0 * (p1 - m1) - (p2 - m2)) * c;
  });
}

void d2(const double* in, double* out, const Grid& g, int axis) {
  const double h = g.spacing(axis);
  const double c = 1.0 / (12.0 * h * h);
  apply_axis(in, out, g, axis, [c](double m2, double m1, double f0, double p1, double p2) {
    return (16.0 * (p1 + m1 - 2.0 * f0) - (p2 + m2 - 2.0 * f0)) * c;
  });
}

void d11(const double* in, double* out, const Grid& g, int a, int b) {
  if (a == b) {
    d2(in, out, g, a);
    return;
  }
  if (a > b) std::swap(a, b);
  std::vector<double> tmp(g.size());
  d1(in, tmp.data(), g, b);
  d1(tmp.data(), out, g, a);
}

}  // namespace stencil

// d_a f_c at comp a * nc + c
ComponentArray first_partials(const ComponentArray& f) {
  const Grid& grid = f.grid();
  const int n = grid.dim(), nc = f.components();
  ComponentArray out(grid, n * nc);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < nc; ++c) stencil::d1(f.comp(c), out.comp(a * nc + c), grid, a);
  return out;
}

// d_a d_b f_c at comp sym(a, b) * nc + c; mixed terms reuse the first partials
// so the result is bitwise equal to stencil::d11.
ComponentArray second_partials(const ComponentArray& f, const ComponentArray& df) {
  const Grid& grid = f.grid();
  const int n = grid.dim(), nc = f.components();
  ComponentArray out(grid, sym_size(n) * nc);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = 0; c < nc; ++c) {
        double* o = out.comp(sym_index(a, b, n) * nc + c);
        if (a == b)
          stencil::d2(f.comp(c), o, grid, a);
        else
          stencil::d1(df.comp(b * nc + c), o, grid, a);
      }
  return out;
}

double integrate(const ScalarField& f, const ScalarField& density) {
  f.require_same_shape(density, "integrate");
  double s = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) s += f[p] * density[p];
  return s * f.grid().cell_volume();
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) s += f[p];
  return s * f.grid().cell_volume();
}

double sup_norm(const ComponentArray& f) {
  double m = 0.0;
  for (double v : f.raw()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace rflab
