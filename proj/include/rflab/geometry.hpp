#pragma once

#include <optional>

#include "rflab/grid.hpp"

namespace rflab {

/// Curvature injected analytically in place of the finite-difference one.
/// In space_form mode R_abcd = K (g_ac g_bd - g_ad g_bc) and Rc = K (n - 1) g.
struct SyntheticCurvature {
  enum class Mode { from_metric, space_form };
  Mode mode = Mode::from_metric;
  double K = 0.0;
  int n = 0;

  static SyntheticCurvature space_form(double K, int n) { return {Mode::space_form, K, n}; }
  bool active() const { return mode == Mode::space_form; }
  double lambda() const { return active() ? K * (n - 1) : 0.0; }
};

/// Index of the bivector (a, b), a < b, among the n(n-1)/2 coordinate planes.
int pair_index(int a, int b, int n);
inline int pair_count(int n) { return n * (n - 1) / 2; }

/// Metric with cached inverse, Christoffel symbols and curvature.
///
/// Conventions: Rc_ac = g^bd R_abcd, R_abab > 0 on spheres, and the rough
/// Laplacian is g^ab d_a d_b on flat space (non-positive spectrum).
class MetricState {
 public:
  SymTensor2Field g;
  SymTensor2Field g_inv;
  ComponentArray dg;           ///< d_c g_ab at comp c * P + sym(a, b)
  ComponentArray christoffel;  ///< Gamma^k_ab at comp k * P + sym(a, b)
  ComponentArray riemann;      ///< symmetric matrix over bivectors, packed
  SymTensor2Field ricci;
  ScalarField scalar;
  ScalarField vol_density;     ///< sqrt(det g)
  /// Largest |R_IJ - R_JI| before symmetrization over bivector pairs.
  double riemann_asymmetry = 0.0;
  /// d_i Gamma^k_ab at comp (i * n + k) * P + sym(a, b); built on request.
  std::optional<ComponentArray> dchristoffel;

  const Grid& grid() const { return g.grid(); }
  int dim() const { return g.grid().dim(); }
  int packed() const { return sym_size(dim()); }

  double gamma(int k, int a, int b, std::size_t p) const {
    return christoffel.at(k * packed() + sym_index(a, b, dim()), p);
  }
  double dmetric(int c, int a, int b, std::size_t p) const {
    return dg.at(c * packed() + sym_index(a, b, dim()), p);
  }
  double dgamma(int i, int k, int a, int b, std::size_t p) const {
    return dchristoffel->at((i * dim() + k) * packed() + sym_index(a, b, dim()), p);
  }
  /// R_abcd reconstructed from the packed bivector storage.
  double riemann_at(int a, int b, int c, int d, std::size_t p) const;
};

struct MetricBuildOptions {
  /// Also cache d Gamma (needed by covariant second derivatives and DeTurck Jacobians).
  bool christoffel_derivatives = true;
};

/// Computes every cached tensor from finite differences of g.
/// Throws NotPositiveDefinite with the offending point index.
MetricState build_metric_state(const SymTensor2Field& g, MetricBuildOptions opt = {});

/// Throws NotPositiveDefinite unless every point of a packed symmetric field is SPD.
void require_spd(const PackedSymField& f, const char* what);

ScalarField laplacian_scalar(const ScalarField& f, const MetricState& m);
SymTensor2Field hessian(const ScalarField& f, const MetricState& m);
/// |df|^2_g
ScalarField grad_norm_sq(const ScalarField& f, const MetricState& m);
/// df as a one-form (fiber rank 1).
VecOneFormField exterior_derivative(const ScalarField& f);

/// nabla_a nabla_b h_ij at comp (a * n + b) * P + sym(i, j).
ComponentArray covariant_hessian_sym(const SymTensor2Field& h, const MetricState& m);
/// nabla_a nabla_b w^i_c at comp ((i * n + a) * n + b) * n + c.
ComponentArray covariant_hessian_oneform(const VecOneFormField& w, const MetricState& m);

/// g^ab nabla_a nabla_b h
SymTensor2Field rough_laplacian(const SymTensor2Field& h, const MetricState& m);
/// 2 R_ipjq h^pq - Rc_i^k h_kj - Rc_j^k h_ik (curvature part of the Lichnerowicz Laplacian).
SymTensor2Field lichnerowicz_curvature_terms(const SymTensor2Field& h, const MetricState& m,
                                             const std::optional<SyntheticCurvature>& synth = {});
/// Rough Laplacian plus the curvature terms. With synth active, its curvature
/// replaces the metric's in the algebraic terms.
SymTensor2Field lichnerowicz(const SymTensor2Field& h, const MetricState& m,
                             const std::optional<SyntheticCurvature>& synth = {});

/// (delta h)_b = -g^ac nabla_a h_cb, returned with fiber rank 1.
VecOneFormField divergence_symtensor(const SymTensor2Field& h, const MetricState& m);
/// nabla_i (delta h)_j + nabla_j (delta h)_i + nabla_i nabla_j tr h
SymTensor2Field gauge_linear_terms(const SymTensor2Field& h, const MetricState& m);

/// Hodge Laplacian -(d delta + delta d), componentwise in the fiber index.
VecOneFormField hodge_laplacian_oneform(const VecOneFormField& w, const MetricState& m);
/// (delta d w)_a = -g^bc (nabla_b nabla_c w_a - nabla_b nabla_a w_c)
VecOneFormField delta_d_oneform(const VecOneFormField& w, const MetricState& m);
/// (d delta w)_a = -g^bc nabla_a nabla_b w_c
VecOneFormField d_delta_oneform(const VecOneFormField& w, const MetricState& m);
/// g^ab nabla_a nabla_b w
VecOneFormField rough_laplacian_oneform(const VecOneFormField& w, const MetricState& m);
/// (dw)^i_ab = d_a w^i_b - d_b w^i_a at comp i * pairs + pair_index(a, b).
ComponentArray exterior_derivative_oneform(const VecOneFormField& w);

/// Hodge Laplacian of a top-degree form via its density: vol * Lap(H / vol).
ThreeFormField hodge_laplacian_threeform(const ThreeFormField& H, const MetricState& m);
/// Hcal_ij = g^pq g^rs H_ipr H_jqs
SymTensor2Field torsion_square(const ThreeFormField& H, const MetricState& m);

/// X^k = c g^kl d_l f, with its analytic Jacobian attached.
VectorField gradient_field(const ScalarField& f, const MetricState& m, double c = 1.0);
/// (L_X g)_ab = nabla_a X_b + nabla_b X_a; uses X's Jacobian when attached.
SymTensor2Field lie_derivative_metric(const VectorField& X, const MetricState& m);
/// X^k d_k f
ScalarField lie_derivative_scalar(const VectorField& X, const ScalarField& f);
/// W^k = g^ab (Gamma^k_ab - Gamma0^k_ab) with Jacobian; both states need d Gamma.
VectorField deturck_field(const MetricState& m, const MetricState& m0);

/// Integrated pairings with all indices contracted by g and integrated against dV_g.
double l2_inner(const ScalarField& f, const ScalarField& k, const MetricState& m);
double l2_inner(const SymTensor2Field& h, const SymTensor2Field& k, const MetricState& m);
/// Fiber index contracted with the Euclidean product.
double l2_inner(const VecOneFormField& w, const VecOneFormField& v, const MetricState& m);
/// Full contraction H_abc K^abc.
double l2_inner(const ThreeFormField& H, const ThreeFormField& K, const MetricState& m);

}  // namespace rflab
