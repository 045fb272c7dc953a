#include "rflab/estimates.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace rflab {

double comparison_solution(double mu, double d, double t) {
  const double arg = std::exp(2.0 * d) - 2.0 * mu * t;
  if (!(arg > 0.0)) {
    std::ostringstream os;
    os << "comparison_solution: exp(2d) - 2 mu t = " << arg << " <= 0 at t = " << t
       << " (finite-time degeneration)";
    throw DomainError(os.str());
  }
  return 0.5 * std::log(arg);
}

// ---------------------------------------------------------------- monitors

bool BoundMonitor::violated() const { return violations() > 0; }

std::size_t BoundMonitor::violations() const {
  return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(), [](const MonitorRow& r) { return r.violated; }));
}

double BoundMonitor::worst_slack() const {
  double s = std::numeric_limits<double>::infinity();
  for (const MonitorRow& r : rows_) {
    s = std::min(s, r.observed_min - (r.lower_env - r.margin));
    s = std::min(s, (r.upper_env + r.margin) - r.observed_max);
  }
  return s;
}

std::string BoundMonitor::csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t,observed_min,observed_max,lower_env,upper_env,margin,violated\n";
  for (const MonitorRow& r : rows_)
    os << r.t << ',' << r.observed_min << ',' << r.observed_max << ',' << r.lower_env << ',' << r.upper_env << ','
       << r.margin << ',' << (r.violated ? 1 : 0) << '\n';
  return os.str();
}

void BoundMonitor::push(double t, double h, double obs_min, double obs_max, double lower, double upper) {
  MonitorRow r;
  r.t = t;
  r.observed_min = obs_min;
  r.observed_max = obs_max;
  r.lower_env = lower;
  r.upper_env = upper;
  r.margin = margin_ + c1_ * std::pow(h, 4) * (1.0 + t);
  r.violated = obs_min < lower - r.margin || obs_max > upper + r.margin;
  rows_.push_back(r);
}

namespace {

const WarpedState& warped_of(const FlowState& st, const char* who) {
  const auto* w = std::get_if<WarpedState>(&st.fields);
  if (!w) throw DomainError(std::string(who) + ": needs a warped trajectory");
  return *w;
}

// |dphi|^2_g pointwise without building the full curvature cache
ScalarField dphi_norm_sq(const SymTensor2Field& g, const ScalarField& phi) {
  const int n = g.grid().dim();
  const ComponentArray d = first_partials(phi);
  ScalarField out(g.grid());
  Eigen::MatrixXd G(n, n);
  Eigen::VectorXd v(n);
  for (std::size_t p = 0; p < g.points(); ++p) {
    for (int a = 0; a < n; ++a) {
      v(a) = d.at(a, p);
      for (int b = 0; b < n; ++b) G(a, b) = g(a, b, p);
    }
    out[p] = v.dot(G.ldlt().solve(v));
  }
  return out;
}

}  // namespace

void SandwichMonitor::observe(const FlowState& st) {
  const WarpedState& w = warped_of(st, "SandwichMonitor");
  const auto [lo, hi] = std::minmax_element(w.phi.raw().begin(), w.phi.raw().end());
  if (!init_) {
    init_ = true;
    d1_ = *lo;
    d2_ = *hi;
    mu_ = w.mu;
  }
  const double t = st.time;
  push(t, w.phi.grid().min_spacing(), std::exp(2.0 * *lo), std::exp(2.0 * *hi),
       std::exp(2.0 * d1_) - 2.0 * mu_ * t, std::exp(2.0 * d2_) - 2.0 * mu_ * t);
}

void GradientDecayMonitor::observe(const FlowState& st) {
  const WarpedState& w = warped_of(st, "GradientDecayMonitor");
  const ScalarField q = dphi_norm_sq(w.g, w.phi);
  const auto [lo, hi] = std::minmax_element(q.raw().begin(), q.raw().end());
  if (!init_) {
    init_ = true;
    b_ = std::exp(2.0 * *std::max_element(w.phi.raw().begin(), w.phi.raw().end()));
    U0_ = *hi;
  }
  const double t = st.time;
  const double env = b_ * b_ * U0_ / ((t + b_) * (t + b_));
  tightest_ = std::max(tightest_, *hi * (t + 1.0) * (t + 1.0));
  if (U0_ > 0.0) ratios_.push_back(*hi * (t + b_) * (t + b_) / (b_ * b_ * U0_));
  push(t, w.phi.grid().min_spacing(), *lo, *hi, 0.0, env);
}

double GradientDecayMonitor::max_ratio_increase() const {
  double m = 0.0;
  for (std::size_t i = 1; i < ratios_.size(); ++i) m = std::max(m, ratios_[i] - ratios_[i - 1]);
  return m;
}

void monitor_trajectory(BoundMonitor& mon, const std::vector<FlowState>& states) {
  for (const FlowState& s : states) mon.observe(s);
}

// ---------------------------------------------------------------- warped Ricci oracle

WarpedRicciResiduals warped_ricci_oracle(const SymTensor2Field& g, const ScalarField& phi, int fiber_points) {
  const Grid& base = g.grid();
  phi.require_grid(base, "warped_ricci_oracle");
  const int n = base.dim();
  if (n > 2) throw DomainError("warped_ricci_oracle: base dimension must be 1 or 2");
  std::vector<int> pts;
  std::vector<double> per;
  for (int a = 0; a < n; ++a) {
    pts.push_back(base.points(a));
    per.push_back(base.period(a));
  }
  pts.push_back(fiber_points);
  per.push_back(2.0 * std::numbers::pi);
  const Grid total(pts, per);
  const int t = n;  // fiber axis

  auto base_point = [&](std::size_t p3) {
    const auto c = total.coords(p3);
    std::size_t p2 = 0;
    for (int a = 0; a < n; ++a) p2 += static_cast<std::size_t>(c[a]) * base.stride(a);
    return p2;
  };

  SymTensor2Field G(total);
  for (std::size_t p = 0; p < total.size(); ++p) {
    const std::size_t q = base_point(p);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) G(a, b, p) = g(a, b, q);
    G(t, t, p) = std::exp(2.0 * phi[q]);
  }
  const MetricState M = build_metric_state(G, {false});
  const MetricState m = build_metric_state(g, {false});
  const SymTensor2Field H = hessian(phi, m);
  const ScalarField lap = laplacian_scalar(phi, m);
  const ScalarField dsq = grad_norm_sq(phi, m);
  const ComponentArray d = first_partials(phi);

  WarpedRicciResiduals r;
  for (std::size_t p = 0; p < total.size(); ++p) {
    const std::size_t q = base_point(p);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const double expect = m.ricci(a, b, q) - H(a, b, q) - d.at(a, q) * d.at(b, q);
        r.horizontal = std::max(r.horizontal, std::abs(M.ricci(a, b, p) - expect));
      }
      r.mixed = std::max(r.mixed, std::abs(M.ricci(a, t, p)));
    }
    const double expect_v = -std::exp(2.0 * phi[q]) * (lap[q] + dsq[q]);
    r.vertical = std::max(r.vertical, std::abs(M.ricci(t, t, p) - expect_v));
  }
  return r;
}

// ---------------------------------------------------------------- evolution identities

namespace {

ComponentArray identity_quantity(const WarpedState& w, EvolutionIdentity which) {
  if (which == EvolutionIdentity::dphi) return first_partials(w.phi);
  return dphi_norm_sq(w.g, w.phi);
}

ComponentArray identity_rhs(const WarpedState& w, EvolutionIdentity which, double mm) {
  const Grid& grid = w.phi.grid();
  const int n = grid.dim();
  const std::size_t np = grid.size();
  if (which == EvolutionIdentity::dphi) {
    const MetricState m = build_metric_state(w.g, {true});
    const VecOneFormField dphi = exterior_derivative(w.phi);
    VecOneFormField out = rough_laplacian_oneform(dphi, m);
    for (std::size_t p = 0; p < np; ++p) {
      const double e = 2.0 * w.mu * std::exp(-2.0 * w.phi[p]);
      for (int i = 0; i < n; ++i) {
        double rc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) rc += m.ricci(i, a, p) * m.g_inv(a, b, p) * dphi(0, b, p);
        out(0, i, p) += -rc + e * dphi(0, i, p);
      }
    }
    return out;
  }
  const MetricState m = build_metric_state(w.g, {false});
  const ScalarField q = grad_norm_sq(w.phi, m);
  const SymTensor2Field H = hessian(w.phi, m);
  ScalarField out = laplacian_scalar(q, m);
  for (std::size_t p = 0; p < np; ++p) {
    double h2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) h2 += m.g_inv(i, a, p) * m.g_inv(j, b, p) * H(i, j, p) * H(a, b, p);
    out[p] += -2.0 * h2 - 2.0 * mm * q[p] * q[p] + 4.0 * w.mu * std::exp(-2.0 * w.phi[p]) * q[p];
  }
  return out;
}

}  // namespace

double evolution_identity_residual(const std::vector<FlowState>& states, EvolutionIdentity which, double m) {
  if (states.size() < 3) throw DomainError("evolution_identity_residual: need at least 3 samples");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    const WarpedState& a = warped_of(states[i - 1], "evolution_identity_residual");
    const WarpedState& b = warped_of(states[i], "evolution_identity_residual");
    const WarpedState& c = warped_of(states[i + 1], "evolution_identity_residual");
    const double h1 = states[i].time - states[i - 1].time, h2 = states[i + 1].time - states[i].time;
    if (!(h1 > 0.0 && h2 > 0.0)) throw DomainError("evolution_identity_residual: sample times must increase");
    if (std::max(h1, h2) > 4.0 * std::min(h1, h2))
      throw DomainError("evolution_identity_residual: sampling too uneven for centered differences");
    ComponentArray dt(b.phi.grid(), 1);
    ComponentArray qa = identity_quantity(a, which), qb = identity_quantity(b, which), qc = identity_quantity(c, which);
    dt = qb;
    dt *= (h2 - h1) / (h1 * h2);
    dt.axpy(-h2 / (h1 * (h1 + h2)), qa);
    dt.axpy(h1 / (h2 * (h1 + h2)), qc);
    dt -= identity_rhs(b, which, m);
    worst = std::max(worst, sup_norm(dt));
  }
  return worst;
}

// ---------------------------------------------------------------- decay fit and energy

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t0, double t1) {
  if (t.size() != value.size()) throw ShapeMismatch("fit_decay: series lengths differ");
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(value[i] > 0.0)) throw DomainError("fit_decay: non-positive value in the fit window");
    pts.emplace_back(t[i], std::log(value[i]));
  }
  if (pts.size() < 2) throw DomainError("fit_decay: fewer than 2 samples in the window");
  for (const auto& [x, y] : pts) {
    st += x;
    sy += y;
    stt += x * x;
    sty += x * y;
  }
  const double k = static_cast<double>(pts.size());
  const double den = k * stt - st * st;
  if (den == 0.0) throw DomainError("fit_decay: all samples share one time");
  const double slope = (k * sty - st * sy) / den;
  const double icpt = (sy - slope * st) / k;
  DecayFit f;
  f.C = std::exp(icpt);
  f.rate = -slope;
  f.t0 = t0;
  f.t1 = t1;
  f.samples = pts.size();
  double ss = 0.0;
  for (const auto& [x, y] : pts) ss += (y - icpt - slope * x) * (y - icpt - slope * x);
  f.rms = std::sqrt(ss / k);
  return f;
}

double energy_functional(const SymTensor2Field& g, const ScalarField& phi, const ScalarField& f, double m,
                         double mu) {
  const MetricState ms = build_metric_state(g, {false});
  phi.require_grid(ms.grid(), "energy_functional");
  f.require_grid(ms.grid(), "energy_functional");
  const ScalarField dphi = grad_norm_sq(phi, ms);
  const ScalarField df = grad_norm_sq(f, ms);
  ScalarField integrand(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p)
    integrand[p] = (ms.scalar[p] - m * dphi[p] + m * mu * std::exp(-2.0 * phi[p]) + df[p]) * std::exp(-f[p]);
  return integrate(integrand, ms.vol_density);
}

}  // namespace rflab
