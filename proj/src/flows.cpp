#include "rflab/flows.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace rflab {

const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::hrf: return "hrf";
    case SystemKind::warped: return "warped";
    case SystemKind::invariant: return "invariant";
    case SystemKind::connection: return "connection";
  }
  return "?";
}

SystemKind system_from_string(const std::string& s) {
  if (s == "hrf") return SystemKind::hrf;
  if (s == "warped") return SystemKind::warped;
  if (s == "invariant") return SystemKind::invariant;
  if (s == "connection") return SystemKind::connection;
  throw DomainError("unknown system '" + s + "'");
}

const char* to_string(WarpedForm f) {
  switch (f) {
    case WarpedForm::pre_gauge: return "pre_gauge";
    case WarpedForm::reduced: return "reduced";
    case WarpedForm::normalized: return "normalized";
  }
  return "?";
}

WarpedForm warped_form_from_string(const std::string& s) {
  if (s == "pre_gauge") return WarpedForm::pre_gauge;
  if (s == "reduced") return WarpedForm::reduced;
  if (s == "normalized") return WarpedForm::normalized;
  throw DomainError("unknown warped form '" + s + "'");
}

double Coupling::at(double t) const { return c0 * std::exp(-rate * t); }

void FlowParams::validate() const {
  if (!(c.c0 >= 0.0)) throw DomainError("FlowParams: coupling c must be non-negative");
  if (!(c.rate >= 0.0)) throw DomainError("FlowParams: coupling must be non-increasing (rate >= 0)");
  if (synth && synth->active() && std::abs(synth->lambda() - lambda) > 1e-14 * (1.0 + std::abs(lambda)))
    throw DomainError("FlowParams: lambda must equal K (n - 1) in space-form mode");
}

void FlowParams::validate_fixed_point() const {
  validate();
  if (s != -2.0 * lambda) throw DomainError("FlowParams: a fixed point requires s = -2 lambda");
}

std::shared_ptr<const MetricState> make_reference(const SymTensor2Field& g0) {
  return std::make_shared<const MetricState>(build_metric_state(g0, {true}));
}

// ---------------------------------------------------------------- FlowState

const SymTensor2Field& FlowState::metric() const {
  return std::visit([](const auto& s) -> const SymTensor2Field& { return s.g; }, fields);
}

SymTensor2Field& FlowState::metric() {
  return std::visit([](auto& s) -> SymTensor2Field& { return s.g; }, fields);
}

namespace {

// Calls f(ComponentArray&) or f(ComponentArray&, const ComponentArray&) on every evolving field.
template <class F>
void for_each_field(FlowState& st, F f) {
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        f(s.g);
        if constexpr (std::is_same_v<T, HrfState> || std::is_same_v<T, WarpedState>) f(s.phi);
        if constexpr (std::is_same_v<T, InvariantState>) {
          f(s.A);
          f(s.G);
        }
        if constexpr (std::is_same_v<T, ConnectionState>) f(s.H);
      },
      st.fields);
}

template <class F>
void for_each_field(const FlowState& st, F f) {
  for_each_field(const_cast<FlowState&>(st), [&](ComponentArray& c) { f(static_cast<const ComponentArray&>(c)); });
}

template <class F>
void for_each_pair(FlowState& a, const FlowState& b, F f) {
  if (a.fields.index() != b.fields.index()) throw ShapeMismatch("FlowState: system kinds differ");
  std::vector<ComponentArray*> xs;
  std::vector<const ComponentArray*> ys;
  for_each_field(a, [&](ComponentArray& c) { xs.push_back(&c); });
  for_each_field(b, [&](const ComponentArray& c) { ys.push_back(&c); });
  for (std::size_t i = 0; i < xs.size(); ++i) f(*xs[i], *ys[i]);
}

}  // namespace

void FlowState::axpy(double a, const FlowState& x) {
  for_each_pair(*this, x, [a](ComponentArray& u, const ComponentArray& v) { u.axpy(a, v); });
}

FlowState FlowState::zeros_like() const {
  FlowState z = *this;
  for_each_field(z, [](ComponentArray& c) { c.fill(0.0); });
  return z;
}

double FlowState::sup_norm() const {
  double m = 0.0;
  for_each_field(*this, [&](const ComponentArray& c) { m = std::max(m, rflab::sup_norm(c)); });
  return m;
}

std::uint64_t FlowState::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  for_each_field(*this, [&](const ComponentArray& c) {
    for (double v : c.raw()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
  });
  return h;
}

void FlowState::validate() const {
  for_each_field(*this, [](const ComponentArray& c) {
    for (std::size_t i = 0; i < c.raw().size(); ++i)
      if (!std::isfinite(c.raw()[i])) {
        std::ostringstream os;
        os << "non-finite value at point " << i % c.points() << " (component " << i / c.points() << ")";
        throw NumericalFailure(os.str());
      }
  });
  require_spd(metric(), "metric g");
  if (const auto* inv = std::get_if<InvariantState>(&fields)) require_spd(inv->G, "fiber metric G");
  if (const auto* h = std::get_if<HrfState>(&fields))
    if (h->phi.target().kind == TargetSpace::Kind::spd) require_spd(h->phi.as_fiber_metric(), "map phi");
}

// ---------------------------------------------------------------- RHS

namespace {

MetricState metric_for(const SymTensor2Field& g, const FlowParams& p, bool need_dgamma) {
  MetricBuildOptions o;
  o.christoffel_derivatives = need_dgamma || p.gauged();
  return build_metric_state(g, o);
}

// -2 Rc - s g, with the synthetic Einstein part added to the finite-difference Ricci.
SymTensor2Field ricci_part(const MetricState& m, const FlowParams& p) {
  SymTensor2Field out = m.ricci;
  if (p.synth && p.synth->active()) out.axpy(p.synth->lambda(), m.g);
  out *= -2.0;
  out.axpy(-p.s, m.g);
  return out;
}

std::optional<VectorField> gauge_field(const MetricState& m, const FlowParams& p) {
  if (!p.gauged()) return std::nullopt;
  return deturck_field(m, *p.deturck_reference);
}

// out_c += W^k d_k f_c for every component
void add_advection(const VectorField& W, const ComponentArray& f, ComponentArray& out) {
  const Grid& grid = f.grid();
  std::vector<double> d(grid.size());
  for (int c = 0; c < f.components(); ++c)
    for (int k = 0; k < grid.dim(); ++k) {
      stencil::d1(f.comp(c), d.data(), grid, k);
      double* o = out.comp(c);
      const double* w = W.comp(k);
      for (std::size_t p = 0; p < grid.size(); ++p) o[p] += w[p] * d[p];
    }
}

SymTensor2Field dphi_sq(const ScalarField& phi) {
  const Grid& grid = phi.grid();
  const int n = grid.dim();
  const ComponentArray d = first_partials(phi);
  SymTensor2Field out(grid);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double* o = out.comp_ij(a, b);
      for (std::size_t p = 0; p < grid.size(); ++p) o[p] = d.at(a, p) * d.at(b, p);
    }
  return out;
}

WarpedState warped_rhs_impl(const WarpedState& st, const FlowParams& p, WarpedForm form, double coef) {
  const MetricState m = metric_for(st.g, p, false);
  st.phi.require_grid(m.grid(), "rhs_warped");
  WarpedState out{ricci_part(m, p), ScalarField(st.phi.grid()), st.mu};
  const double mm = p.m;
  out.g.axpy(2.0 * mm, dphi_sq(st.phi));
  out.phi = laplacian_scalar(st.phi, m);
  const std::size_t np = st.phi.points();
  switch (form) {
    case WarpedForm::pre_gauge: {
      out.g.axpy(2.0 * mm, hessian(st.phi, m));
      const ScalarField gn = grad_norm_sq(st.phi, m);
      for (std::size_t q = 0; q < np; ++q) out.phi[q] += mm * gn[q] - st.mu * std::exp(-2.0 * st.phi[q]);
      break;
    }
    case WarpedForm::reduced:
      for (std::size_t q = 0; q < np; ++q) out.phi[q] -= st.mu * std::exp(-2.0 * st.phi[q]);
      break;
    case WarpedForm::normalized:
      for (std::size_t q = 0; q < np; ++q)
        out.phi[q] += 0.5 * coef * (std::exp(-2.0 * (st.phi[q] - p.phi_avg0)) - 1.0);
      break;
  }
  if (auto W = gauge_field(m, p)) {
    out.g += lie_derivative_metric(*W, m);
    add_advection(*W, st.phi, out.phi);
  }
  return out;
}

Eigen::MatrixXd point_matrix(const PackedSymField& f, std::size_t p) {
  const int N = f.rank();
  Eigen::MatrixXd M(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) M(i, j) = f(i, j, p);
  return M;
}

}  // namespace

HrfState rhs_hrf(const HrfState& st, double t, const FlowParams& p) {
  const MetricState m = metric_for(st.g, p, false);
  st.phi.require_grid(m.grid(), "rhs_hrf");
  HrfState out{ricci_part(m, p), tension_field(st.phi, m)};
  out.g.axpy(2.0 * p.c.at(t), pullback_form(st.phi));
  if (auto W = gauge_field(m, p)) {
    out.g += lie_derivative_metric(*W, m);
    add_advection(*W, st.phi, out.phi);
  }
  return out;
}

WarpedState rhs_warped(const WarpedState& st, double, const FlowParams& p, WarpedForm form) {
  return warped_rhs_impl(st, p, form, p.s);
}

InvariantState rhs_invariant(const InvariantState& st, double, const FlowParams& p) {
  const MetricState m = metric_for(st.g, p, true);
  st.A.require_grid(m.grid(), "rhs_invariant");
  st.G.require_grid(m.grid(), "rhs_invariant");
  if (st.A.fiber_rank() != st.G.rank()) throw ShapeMismatch("rhs_invariant: A and G fiber ranks differ");
  require_spd(st.G, "fiber metric G");
  const int n = m.dim(), N = st.G.rank(), q = pair_count(n), PN = sym_size(N);
  const ComponentArray F = exterior_derivative_oneform(st.A);
  const ComponentArray dG = first_partials(st.G);
  auto Fat = [&](int k, int a, int b, std::size_t pt) {
    if (a == b) return 0.0;
    return a < b ? F.at(k * q + pair_index(a, b, n), pt) : -F.at(k * q + pair_index(b, a, n), pt);
  };

  InvariantState out{ricci_part(m, p), VecOneFormField(st.A.grid(), N), fiber_metric_rhs(st.G, st.A, m)};
  out.g += fiber_metric_energy_term(st.G);
  out.A = delta_d_oneform(st.A, m);
  out.A *= -1.0;
  out.A.axpy(-0.5 * p.s, st.A);

  for (std::size_t pt = 0; pt < m.grid().size(); ++pt) {
    const Eigen::MatrixXd G = point_matrix(st.G, pt);
    const Eigen::MatrixXd Gi = G.inverse();
    // g^gd G_ij F^i_ag F^j_bd
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double v = 0.0;
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            const double gcd = m.g_inv(c, d, pt);
            if (gcd == 0.0) continue;
            for (int i = 0; i < N; ++i)
              for (int j = 0; j < N; ++j) v += gcd * G(i, j) * Fat(i, a, c, pt) * Fat(j, b, d, pt);
          }
        out.g(a, b, pt) += v;
      }
    // G^ij g^bc d_c G_jk F^k_ba
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < n; ++a) {
        double v = 0.0;
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            const double gbc = m.g_inv(b, c, pt);
            if (gbc == 0.0) continue;
            for (int j = 0; j < N; ++j)
              for (int k = 0; k < N; ++k)
                v += Gi(i, j) * gbc * dG.at(c * PN + sym_index(j, k, N), pt) * Fat(k, b, a, pt);
          }
        out.A(i, a, pt) += v;
      }
  }

  if (auto W = gauge_field(m, p)) {
    out.g += lie_derivative_metric(*W, m);
    // L_W A - d delta A
    const ComponentArray& J = W->jacobian();
    add_advection(*W, st.A, out.A);
    for (std::size_t pt = 0; pt < m.grid().size(); ++pt)
      for (int i = 0; i < N; ++i)
        for (int a = 0; a < n; ++a) {
          double v = 0.0;
          for (int b = 0; b < n; ++b) v += st.A(i, b, pt) * J.at(a * n + b, pt);
          out.A(i, a, pt) += v;
        }
    out.A -= d_delta_oneform(st.A, m);
    add_advection(*W, st.G, out.G);
  }
  return out;
}

ConnectionState rhs_connection(const ConnectionState& st, double, const FlowParams& p) {
  if (st.g.grid().dim() != 3) throw DomainError("rhs_connection: dim must be 3");
  const MetricState m = metric_for(st.g, p, false);
  st.H.require_grid(m.grid(), "rhs_connection");
  ConnectionState out{ricci_part(m, p), hodge_laplacian_threeform(st.H, m)};
  out.g.axpy(0.5, torsion_square(st.H, m));
  out.H.axpy(-p.s, st.H);
  if (auto W = gauge_field(m, p)) {
    out.g += lie_derivative_metric(*W, m);
    // L_W H = d(i_W H): d_a(W^a H_012)
    add_advection(*W, st.H, out.H);
    const ComponentArray& J = W->jacobian();
    for (std::size_t pt = 0; pt < m.grid().size(); ++pt) {
      double div = 0.0;
      for (int a = 0; a < 3; ++a) div += J.at(a * 3 + a, pt);
      out.H[pt] += div * st.H[pt];
    }
  }
  return out;
}

FlowState rhs(const FlowState& st, const FlowParams& p) {
  FlowState out;
  out.time = st.time;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HrfState>) out.fields = rhs_hrf(s, st.time, p);
        if constexpr (std::is_same_v<T, WarpedState>) {
          WarpedState w = rhs_warped(s, st.time, p, p.warped_form);
          w.mu = s.mu;
          out.fields = std::move(w);
        }
        if constexpr (std::is_same_v<T, InvariantState>) out.fields = rhs_invariant(s, st.time, p);
        if constexpr (std::is_same_v<T, ConnectionState>) out.fields = rhs_connection(s, st.time, p);
      },
      st.fields);
  return out;
}

namespace {

ScalarField volume_density(const SymTensor2Field& g) {
  ScalarField v(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p) v[p] = std::sqrt(point_matrix(g, p).determinant());
  return v;
}

}  // namespace

double average(const ScalarField& phi, const SymTensor2Field& g) {
  const ScalarField vol = volume_density(g);
  ScalarField one(g.grid(), 1.0);
  return integrate(phi, vol) / integrate(one, vol);
}

// ---------------------------------------------------------------- stepping

double cfl_limit(const FlowState& st, double cfl) {
  const SymTensor2Field& g = st.metric();
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < g.points(); ++p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(point_matrix(g, p), Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues()(0));
  }
  if (!(min_eig > 0.0)) throw NumericalFailure("cfl_limit: metric is not positive definite");
  const double h = g.grid().min_spacing();
  return cfl * h * h * min_eig / g.grid().dim();
}

FlowState step(const FlowState& st, const FlowParams& p, const StepperConfig& cfg) {
  const double dt = cfg.dt;
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  const double limit = cfl_limit(st, cfg.cfl);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step: dt = " << dt << " exceeds the CFL bound " << limit;
    throw NumericalFailure(os.str());
  }
  const FlowState k1 = rhs(st, p);
  FlowState s2 = st;
  s2.axpy(0.5 * dt, k1);
  s2.time = st.time + 0.5 * dt;
  const FlowState k2 = rhs(s2, p);
  FlowState s3 = st;
  s3.axpy(0.5 * dt, k2);
  s3.time = st.time + 0.5 * dt;
  const FlowState k3 = rhs(s3, p);
  FlowState s4 = st;
  s4.axpy(dt, k3);
  s4.time = st.time + dt;
  const FlowState k4 = rhs(s4, p);
  FlowState out = st;
  out.axpy(dt / 6.0, k1);
  out.axpy(dt / 3.0, k2);
  out.axpy(dt / 3.0, k3);
  out.axpy(dt / 6.0, k4);
  out.time = st.time + dt;
  out.validate();
  return out;
}

Trajectory run_flow(FlowState st, const FlowParams& p, const StepperConfig& cfg,
                    const std::vector<FlowObserver*>& observers, bool keep_states) {
  p.validate();
  if (cfg.record_every < 1) throw DomainError("run_flow: record_every must be >= 1");
  if (!(cfg.dt > 0.0)) throw DomainError("run_flow: dt must be positive");
  st.validate();
  Trajectory tr;
  auto record = [&](const FlowState& s) {
    tr.times.push_back(s.time);
    tr.checksums.push_back(s.checksum());
    if (keep_states) tr.states.push_back(s);
    for (FlowObserver* o : observers) o->observe(s);
  };
  record(st);

  const double span = cfg.t_end - st.time;
  if (span <= 0.0) {
    tr.stop_reason = "t_end";
    return tr;
  }
  const auto nsteps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
  StepperConfig c = cfg;
  c.dt = span / static_cast<double>(nsteps);

  double t_max = std::numeric_limits<double>::infinity();
  if (const auto* w = std::get_if<WarpedState>(&st.fields))
    if (w->mu > 0.0 && p.warped_form != WarpedForm::normalized) {
      const double d2 = *std::max_element(w->phi.raw().begin(), w->phi.raw().end());
      t_max = std::exp(2.0 * d2) / (2.0 * w->mu);
    }

  const double t0 = st.time;
  tr.stop_reason = "t_end";
  for (std::size_t k = 1; k <= nsteps; ++k) {
    const double t_next = t0 + static_cast<double>(k) * c.dt;
    if (t_next >= t_max) {
      std::ostringstream os;
      os << "finite-time degeneration: comparison bound reaches 0 at t = " << t_max;
      tr.stop_reason = os.str();
      if (tr.times.back() != st.time) record(st);
      break;
    }
    st = step(st, p, c);
    st.time = t_next;
    ++tr.steps;
    if (k % static_cast<std::size_t>(c.record_every) == 0 || k == nsteps) record(st);
  }
  return tr;
}

// ---------------------------------------------------------------- normalization transform

namespace {

// Second-order derivative at the middle of three unevenly spaced samples.
double centered_weight(int which, double h1, double h2) {
  if (which == 0) return -h2 / (h1 * (h1 + h2));
  if (which == 1) return (h2 - h1) / (h1 * h2);
  return h1 / (h2 * (h1 + h2));
}

double state_residual(const FlowState& prev, const FlowState& mid, const FlowState& next,
                      const FlowState& target) {
  const double h1 = mid.time - prev.time, h2 = next.time - mid.time;
  if (!(h1 > 0.0 && h2 > 0.0)) throw DomainError("normalize_transform: sample times must increase");
  FlowState d = prev;
  for_each_field(d, [](ComponentArray& c) { c *= 0.0; });
  d.axpy(centered_weight(0, h1, h2), prev);
  d.axpy(centered_weight(1, h1, h2), mid);
  d.axpy(centered_weight(2, h1, h2), next);
  d.axpy(-1.0, target);
  return d.sup_norm();
}

}  // namespace

TransformResult normalize_transform(const std::vector<FlowState>& traj, double s, const FlowParams& p) {
  if (traj.size() < 3) throw DomainError("normalize_transform: need at least 3 samples");
  const SystemKind kind = traj.front().kind();
  if (kind != SystemKind::hrf && kind != SystemKind::warped)
    throw DomainError("normalize_transform: only hrf and warped trajectories are supported");

  const double tb0 = traj.front().time;
  double a = 0.0;
  if (kind == SystemKind::warped) {
    const auto& w0 = std::get<WarpedState>(traj.front().fields);
    if (w0.mu != -0.5) throw DomainError("normalize_transform: warped transform requires mu = -1/2");
    a = average(w0.phi, w0.g);
  }
  const double ea = std::exp(2.0 * a);

  auto sigma = [&](double tb) {
    if (kind == SystemKind::hrf) return 1.0 + s * (tb - tb0);
    return s == 0.0 ? 1.0 : (ea + tb) * s;
  };
  // t = int_{tb0}^{tb} dr / sigma(r), exact for affine sigma
  auto new_time = [&](double tb) {
    if (kind == SystemKind::hrf) return s == 0.0 ? tb - tb0 : std::log(sigma(tb)) / s;
    if (s == 0.0) return tb - tb0;
    return std::log((ea + tb) / (ea + tb0)) / s;
  };

  TransformResult res;
  res.states.reserve(traj.size());
  for (const FlowState& st : traj) {
    if (st.kind() != kind) throw ShapeMismatch("normalize_transform: mixed system kinds");
    const double sg = sigma(st.time);
    if (!(sg > 0.0)) throw DomainError("normalize_transform: sigma <= 0 on the trajectory");
    FlowState out = st;
    out.time = new_time(st.time);
    out.metric() *= 1.0 / sg;
    if (auto* w = std::get_if<WarpedState>(&out.fields)) {
      const double shift = -0.5 * std::log(ea + st.time) + a;
      for (double& v : w->phi.raw()) v += shift;
    }
    res.states.push_back(std::move(out));
  }

  FlowParams target = p;
  target.s = s;
  target.phi_avg0 = a;
  for (std::size_t i = 1; i + 1 < res.states.size(); ++i) {
    const FlowState& mid = res.states[i];
    const double tb = traj[i].time;
    FlowState rhs_mid;
    rhs_mid.time = mid.time;
    if (kind == SystemKind::hrf) {
      FlowParams q = target;
      q.c = Coupling{p.c.at(tb), 0.0};
      rhs_mid.fields = rhs_hrf(std::get<HrfState>(mid.fields), tb, q);
    } else {
      const auto& w = std::get<WarpedState>(mid.fields);
      rhs_mid.fields = warped_rhs_impl(w, target, WarpedForm::normalized, sigma(tb) / (ea + tb));
    }
    res.residuals.push_back(state_residual(res.states[i - 1], mid, res.states[i + 1], rhs_mid));
  }
  res.residual = *std::max_element(res.residuals.begin(), res.residuals.end());
  return res;
}

}  // namespace rflab
