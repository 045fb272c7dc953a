#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rflab/flows.hpp"
#include "rflab/random_fields.hpp"

namespace rflab {

enum class Block { L0_metric, L1_map, L1_oneform, L2_fiber, L1_threeform };
const char* to_string(Block b);
Block block_from_string(const std::string& s);

// ---------------------------------------------------------------- block actions

/// Metric block Delta_l h + 2 lambda h. With synth active the flat-torus model
/// Delta h + K (n - 2) h + K (tr h) g is used instead: it is the operator left
/// after the Bochner step, so its Rayleigh quotients obey the same K (n - 2) bound.
SymTensor2Field apply_L0(const SymTensor2Field& h, const MetricState& m,
                         const std::optional<SyntheticCurvature>& synth, double lambda);

/// Analytic linearization of the system at a fixed point, applied to a direction
/// of the same shape. Gauged params give the strictly parabolic blocks; ungauged
/// params add the gauge_linear_terms to the metric block and drop d delta from A.
FlowState analytic_linearization(const FlowState& base, const FlowState& direction, const FlowParams& p);

// ---------------------------------------------------------------- numeric linearization

struct NumericLinearization {
  FlowState richardson;  ///< (100 D(1e-4) - D(1e-3)) / 99
  FlowState coarse;      ///< centered difference at eps = 1e-3
  FlowState fine;        ///< centered difference at eps = 1e-4
  double base_residual = 0.0;  ///< sup norm of rhs(base)
  bool fixed_point = true;     ///< base_residual within the tolerance
};

/// Centered difference (rhs(base + eps v) - rhs(base - eps v)) / (2 eps).
NumericLinearization linearize_numeric(const FlowState& base, const FlowState& direction,
                                       const FlowParams& p, double fixed_point_tol = 1e-10);

struct LinearizationCheck {
  double err_coarse = 0.0;  ///< |D(1e-3) - analytic|
  double err_fine = 0.0;    ///< |D(1e-4) - analytic|
  double err_richardson = 0.0;
  double order = 0.0;       ///< log10(err_coarse / err_fine); infinity when both sit at round-off
  bool exact = false;       ///< truncation below round-off: the direction enters linearly
  double base_residual = 0.0;
};

/// Compares linearize_numeric with analytic_linearization on one direction.
LinearizationCheck check_linearization(const FlowState& base, const FlowState& direction, const FlowParams& p);

// ---------------------------------------------------------------- operators

struct OperatorOptions {
  int fiber_rank = 1;          ///< k for L1_map, N for L1_oneform and L2_fiber
  bool trace_free = false;     ///< L2_fiber restricted to G-trace-free variations
  std::size_t dense_limit = 4096;
  /// Fiber metric for L2_fiber; identity when empty.
  std::optional<FiberMetricField> G0;
};

/// Self-adjoint operator on perturbations written in pointwise orthonormal
/// frames and weighted by sqrt(dV), so the integrated pairing becomes the
/// Euclidean dot product of coefficient vectors.
class LinearOperator {
 public:
  SystemKind system = SystemKind::hrf;
  Block block = Block::L0_metric;
  double lambda = 0.0;
  std::optional<SyntheticCurvature> synth;
  int fiber_rank = 1;
  int dim = 0;  ///< base dimension
  bool trace_free = false;

  std::size_t dof() const { return dof_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return action_(v); }
  bool assembled() const { return matrix_.has_value(); }
  const Eigen::MatrixXd& matrix() const;
  /// Largest |A - A^T| relative to the largest entry (0 when not assembled).
  double asymmetry() const;
  /// Spectral norm: exact when assembled, power-iteration estimate otherwise.
  double norm_estimate() const;

  /// Field <-> coefficient conversion.
  std::function<Eigen::VectorXd(const ComponentArray&)> encode;
  std::function<ComponentArray(const Eigen::VectorXd&)> decode;

  friend LinearOperator assemble_operator(SystemKind, Block, std::shared_ptr<const MetricState>,
                                          std::optional<SyntheticCurvature>, double, OperatorOptions);

 private:
  std::size_t dof_ = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> action_;
  std::optional<Eigen::MatrixXd> matrix_;
  mutable std::optional<double> norm_;
};

/// Builds the block operator; m needs Christoffel derivatives. Operators with
/// more than dense_limit unknowns are action-only.
LinearOperator assemble_operator(SystemKind system, Block block, std::shared_ptr<const MetricState> m,
                                 std::optional<SyntheticCurvature> synth, double lambda,
                                 OperatorOptions opt = {});

// ---------------------------------------------------------------- spectra

enum class Verdict { strict, weak, unstable };

struct SpectrumReport {
  std::string system;
  std::string block;
  double lambda = 0.0;
  double K = 0.0;
  int n = 0;
  int N = 0;
  std::vector<double> top_eigenvalues;  ///< descending
  int kernel_dim = 0;
  double gap = 0.0;  ///< distance from the kernel to the next eigenvalue
  Verdict verdict = Verdict::strict;
  double tol = 0.0;
  double norm = 0.0;
  std::string method;  ///< dense or lanczos
  bool converged = true;
  double max_residual = 0.0;
  std::size_t dof = 0;

  std::string verdict_string() const;
};

struct SpectrumOptions {
  bool force_iterative = false;
  std::uint64_t seed = 12345;
  int max_krylov = 200;
  int max_restarts = 200;
};

/// k algebraically largest eigenvalues, kernel dimension and verdict.
SpectrumReport spectrum(const LinearOperator& op, int k, SpectrumOptions opt = {});

/// Structured text record, one "key: value" per line.
std::string format_report(const SpectrumReport& r);

struct LanczosResult {
  std::vector<double> values;  ///< descending
  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> residuals;
  bool converged = true;
};

/// Top k eigenpairs of a symmetric operator by restarted Lanczos with full
/// reorthogonalization, locking one pair per cycle (repeated eigenvalues are found).
LanczosResult lanczos_top(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                          std::size_t dim, int k, double tol, Rng& rng, int max_krylov = 200,
                          int max_restarts = 200);

// ---------------------------------------------------------------- curvature estimate

/// |LHS - RHS| of sum sec_ij l_i l_j + lambda sum l_i^2 = 1/2 sum sec_ij (l_i + l_j)^2,
/// lambda the common row sum of sec. Throws DomainError unless sec is symmetric with
/// zero diagonal and equal row sums.
double algebraic_identity_check(const std::vector<double>& eigenvalues, const Eigen::MatrixXd& sec);

/// Random symmetric zero-diagonal matrix with equal row sums.
Eigen::MatrixXd random_einstein_sec(int n, Rng& rng);

struct RayleighBound {
  double max_quotient = -std::numeric_limits<double>::infinity();
  int samples = 0;
};

/// Largest <Lh, h> / |h|^2 over random perturbations: half white noise, half
/// smooth fields close to the constant modes.
RayleighBound quadratic_form_bound(const LinearOperator& op, int samples, Rng& rng);

}  // namespace rflab
