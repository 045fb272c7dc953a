#pragma once

#include <Eigen/Core>

#include "rflab/geometry.hpp"

namespace rflab {

inline constexpr int kMaxFiber = 4;
using FiberMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxFiber, kMaxFiber>;

/// Harmonic-map target: Euclidean R^k or SPD N x N matrices with
/// the invariant metric tr(G^-1 X G^-1 Y).
struct TargetSpace {
  enum class Kind { euclidean, spd };
  Kind kind = Kind::euclidean;
  int rank = 1;  ///< k for R^k, N for SPD(N)

  static TargetSpace euclidean(int k);
  static TargetSpace spd(int N);
  /// Number of stored components of a point (and of a tangent vector).
  int components() const { return kind == Kind::euclidean ? rank : sym_size(rank); }
  bool operator==(const TargetSpace& o) const { return kind == o.kind && rank == o.rank; }
};

/// tr(G^-1 X G^-1 Y)
double spd_metric(const FiberMat& G, const FiberMat& X, const FiberMat& Y);

/// Map from the grid into a target; SPD values are stored packed like FiberMetricField.
class MapField : public ComponentArray {
 public:
  MapField() = default;
  MapField(const Grid& grid, TargetSpace target, double fill = 0.0)
      : ComponentArray(grid, target.components(), fill), target_(target) {}
  explicit MapField(const FiberMetricField& G);

  const TargetSpace& target() const { return target_; }
  /// Euclidean component lambda.
  double& value(int lambda, std::size_t p) { return at(lambda, p); }
  double value(int lambda, std::size_t p) const { return at(lambda, p); }
  /// SPD entry (i, j).
  double& entry(int i, int j, std::size_t p) { return at(sym_index(i, j, target_.rank), p); }
  double entry(int i, int j, std::size_t p) const { return at(sym_index(i, j, target_.rank), p); }
  FiberMat matrix(std::size_t p) const;
  void set_matrix(std::size_t p, const FiberMat& M);
  FiberMetricField as_fiber_metric() const;

 private:
  TargetSpace target_;
};

/// Tension field: Lap(phi) for R^k; Lap G - g^ab d_aG G^-1 d_bG for SPD targets.
MapField tension_field(const MapField& phi, const MetricState& m);

/// phi^* of the target metric: sum_l d_a phi^l d_b phi^l, or tr(G^-1 d_aG G^-1 d_bG).
SymTensor2Field pullback_form(const MapField& phi);

/// 1/2 G^ik G^jl d_a G_ij d_b G_kl by explicit index loops.
SymTensor2Field fiber_metric_energy_term(const FiberMetricField& G);

/// Least-squares c with fiber_metric_energy_term = 2 c pullback_form, and its residual.
struct CouplingFit {
  double c = 0.0;
  double residual = 0.0;
};
CouplingFit fit_fiber_coupling(const FiberMetricField& G);

/// Right side of the fiber metric equation, written with explicit index loops:
/// Lap G_ij - g^ab G^kl d_aG_ik d_bG_lj - 1/2 g^ac g^bd G_ik G_jl (dA)^k_ab (dA)^l_cd
FiberMetricField fiber_metric_rhs(const FiberMetricField& G, const VecOneFormField& A,
                                  const MetricState& m);

/// 1/2 G (g^ac g^bd F_ab F_cd^T) G with F = dA, assembled with matrix products.
FiberMetricField fiber_curvature_quadratic(const FiberMetricField& G, const VecOneFormField& A,
                                           const MetricState& m);

/// Sup-norm difference between fiber_metric_rhs and tension - quadratic dA term.
/// With trace_free, both sides are projected onto the G-trace-free part first.
double check_modified_hmf_identity(const MapField& G, const VecOneFormField& A, const MetricState& m,
                                   bool trace_free = false);

}  // namespace rflab
