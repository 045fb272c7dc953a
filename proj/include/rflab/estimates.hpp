#pragma once

#include <string>
#include <vector>

#include "rflab/flows.hpp"

namespace rflab {

/// U(t) = 1/2 log(exp(2 d) - 2 mu t); throws DomainError once the argument is <= 0.
double comparison_solution(double mu, double d, double t);

/// One monitor sample.
struct MonitorRow {
  double t = 0.0;
  double observed_min = 0.0;
  double observed_max = 0.0;
  double lower_env = 0.0;
  double upper_env = 0.0;
  double margin = 0.0;
  bool violated = false;
};

/// Per-sample record of a quantity against its comparison envelope.
/// Margin at time t: margin + c1 h^4 (1 + t).
class BoundMonitor : public FlowObserver {
 public:
  BoundMonitor(std::string name, double margin, double c1 = 0.0) : name_(std::move(name)), margin_(margin), c1_(c1) {}

  const std::string& name() const { return name_; }
  const std::vector<MonitorRow>& rows() const { return rows_; }
  bool violated() const;
  std::size_t violations() const;
  /// Smallest (envelope + margin - observed) over all samples, on both sides.
  double worst_slack() const;
  std::string csv() const;

 protected:
  void push(double t, double h, double obs_min, double obs_max, double lower, double upper);

 private:
  std::string name_;
  double margin_;
  double c1_;
  std::vector<MonitorRow> rows_;
};

/// exp(2 d1) - 2 mu t <= exp(2 phi) <= exp(2 d2) - 2 mu t with d1, d2 from the first sample.
class SandwichMonitor : public BoundMonitor {
 public:
  explicit SandwichMonitor(double margin = 1e-3, double c1 = 0.0) : BoundMonitor("sandwich", margin, c1) {}
  void observe(const FlowState& st) override;
  double d1() const { return d1_; }
  double d2() const { return d2_; }

 private:
  bool init_ = false;
  double d1_ = 0.0, d2_ = 0.0, mu_ = 0.0;
};

/// |dphi|^2 <= b^2 U0 / (t + b)^2 with b = exp(2 d2), U0 = max |dphi(., 0)|^2 (mu = -1/2).
class GradientDecayMonitor : public BoundMonitor {
 public:
  explicit GradientDecayMonitor(double margin = 1e-3, double c1 = 0.0) : BoundMonitor("gradient_decay", margin, c1) {}
  void observe(const FlowState& st) override;
  double b() const { return b_; }
  double U0() const { return U0_; }
  /// max over samples of sup |dphi|^2 (t + 1)^2: the tightest C in C / (t + 1)^2.
  double tightest_constant() const { return tightest_; }
  /// Largest relative increase of sup|dphi|^2 (t + b)^2 / (b^2 U0) between samples.
  double max_ratio_increase() const;

 private:
  bool init_ = false;
  double b_ = 1.0, U0_ = 0.0, tightest_ = 0.0;
  std::vector<double> ratios_;
};

/// Folds a stored trajectory through a monitor.
void monitor_trajectory(BoundMonitor& mon, const std::vector<FlowState>& states);

struct WarpedRicciResiduals {
  double horizontal = 0.0;
  double mixed = 0.0;
  double vertical = 0.0;
};

/// Builds g + exp(2 phi) dtheta^2 on base x S^1 (fiber_points samples, period 2 pi),
/// computes its Ricci tensor and compares with the base decomposition (m = 1, flat fiber).
WarpedRicciResiduals warped_ricci_oracle(const SymTensor2Field& g, const ScalarField& phi, int fiber_points);

enum class EvolutionIdentity { dphi, dphi_sq };

/// Max over interior samples of the sup-norm residual of the evolution identity,
/// with centered time differences. The trajectory must solve the ungauged
/// reduced warped system with fiber dimension m.
double evolution_identity_residual(const std::vector<FlowState>& states, EvolutionIdentity which, double m);

struct DecayFit {
  double C = 0.0;
  double rate = 0.0;  ///< value ~ C exp(-rate t)
  double t0 = 0.0, t1 = 0.0;
  double rms = 0.0;
  std::size_t samples = 0;
};

/// Least squares on log(value) over samples with t0 <= t <= t1.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t0, double t1);

/// int (R - m |dphi|^2 + m mu exp(-2 phi) + |df|^2) exp(-f) dV
double energy_functional(const SymTensor2Field& g, const ScalarField& phi, const ScalarField& f, double m,
                         double mu);

}  // namespace rflab
