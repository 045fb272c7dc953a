#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rflab/geometry.hpp"
#include "rflab/targets.hpp"

namespace rflab {

enum class SystemKind { hrf, warped, invariant, connection };
const char* to_string(SystemKind k);
SystemKind system_from_string(const std::string& s);

struct HrfState {
  SymTensor2Field g;
  MapField phi;
};

struct WarpedState {
  SymTensor2Field g;
  ScalarField phi;
  double mu = -0.5;  ///< Einstein constant of the fiber, one of -1/2, 0, 1/2
};

struct InvariantState {
  SymTensor2Field g;
  VecOneFormField A;
  FiberMetricField G;
};

struct ConnectionState {
  SymTensor2Field g;
  ThreeFormField H;
};

/// Tagged union over the four systems plus the flow time.
struct FlowState {
  std::variant<HrfState, WarpedState, InvariantState, ConnectionState> fields;
  double time = 0.0;

  SystemKind kind() const { return static_cast<SystemKind>(fields.index()); }
  const SymTensor2Field& metric() const;
  SymTensor2Field& metric();
  const Grid& grid() const { return metric().grid(); }

  /// this += a * x (x must have the same kind and shapes; time is untouched)
  void axpy(double a, const FlowState& x);
  /// A state of the same shape filled with zeros.
  FlowState zeros_like() const;
  /// Sup norm over all evolving fields.
  double sup_norm() const;
  /// FNV-1a hash of all field values.
  std::uint64_t checksum() const;
  /// Throws NumericalFailure on NaN/Inf and NotPositiveDefinite on SPD loss.
  void validate() const;
};

enum class WarpedForm { pre_gauge, reduced, normalized };
const char* to_string(WarpedForm f);
WarpedForm warped_form_from_string(const std::string& s);

/// c(t) = c0 * exp(-rate * t): non-negative and non-increasing by construction.
struct Coupling {
  double c0 = 0.0;
  double rate = 0.0;
  double at(double t) const;
};

struct FlowParams {
  Coupling c;
  double s = 0.0;       ///< normalization constant
  double lambda = 0.0;  ///< Einstein constant of the reference
  double m = 1.0;       ///< fiber dimension (warped)
  double phi_avg0 = 0.0;
  /// DeTurck reference metric; null means no gauge.
  std::shared_ptr<const MetricState> deturck_reference;
  std::optional<SyntheticCurvature> synth;
  WarpedForm warped_form = WarpedForm::normalized;

  bool gauged() const { return static_cast<bool>(deturck_reference); }
  /// Checks c0 >= 0, rate >= 0 and synth consistency with lambda.
  void validate() const;
  /// Additionally requires s = -2 lambda (a declared fixed-point scenario).
  void validate_fixed_point() const;
};

/// Builds the DeTurck reference (with Christoffel derivatives) for a metric.
std::shared_ptr<const MetricState> make_reference(const SymTensor2Field& g0);

HrfState rhs_hrf(const HrfState& st, double t, const FlowParams& p);
WarpedState rhs_warped(const WarpedState& st, double t, const FlowParams& p, WarpedForm form);
InvariantState rhs_invariant(const InvariantState& st, double t, const FlowParams& p);
ConnectionState rhs_connection(const ConnectionState& st, double t, const FlowParams& p);
/// Dispatch on the state kind; warped uses p.warped_form.
FlowState rhs(const FlowState& st, const FlowParams& p);

/// Averaged value of phi with respect to dV_g.
double average(const ScalarField& phi, const SymTensor2Field& g);

struct StepperConfig {
  double dt = 1e-3;
  double cfl = 0.25;
  double t_end = 1.0;
  int record_every = 1;
};

/// cfl * h_min^2 / (dim * max eigenvalue of g^-1)
double cfl_limit(const FlowState& st, double cfl);

/// One RK4 step of size cfg.dt. Throws NumericalFailure if dt exceeds the CFL bound.
FlowState step(const FlowState& st, const FlowParams& p, const StepperConfig& cfg);

class FlowObserver {
 public:
  virtual ~FlowObserver() = default;
  virtual void observe(const FlowState& st) = 0;
};

struct Trajectory {
  std::vector<FlowState> states;  ///< kept only when requested
  std::vector<double> times;
  std::vector<std::uint64_t> checksums;
  std::size_t steps = 0;
  std::string stop_reason;
};

/// Integrates to cfg.t_end, calling observers at t = 0 and every record_every steps.
/// Warped runs with mu > 0 stop before exp(2 max phi0) - 2 mu t reaches 0.
Trajectory run_flow(FlowState st, const FlowParams& p, const StepperConfig& cfg,
                    const std::vector<FlowObserver*>& observers = {}, bool keep_states = true);

/// Result of mapping an un-normalized trajectory to the normalized system.
struct TransformResult {
  std::vector<FlowState> states;  ///< transformed samples, time = normalized t
  std::vector<double> residuals;  ///< per interior sample
  double residual = 0.0;          ///< max over interior samples
};

/// Applies g = g_bar / sigma, t = int dr / sigma (and the warped phi shift) to
/// a trajectory of the un-normalized system, then measures the substitution
/// residual of the normalized system with centered differences in t.
/// HRF: sigma = 1 + s (t_bar - t_bar0). Warped: sigma = (exp(2 a) + t_bar) s,
/// or sigma = 1 when s = 0, with a the initial average of phi.
TransformResult normalize_transform(const std::vector<FlowState>& traj, double s, const FlowParams& p);

}  // namespace rflab
