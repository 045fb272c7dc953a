#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rflab/errors.hpp"
#include "rflab/estimates.hpp"
#include "rflab/random_fields.hpp"

using namespace rflab;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory warped_run(const ScalarField& phi0, double mu, double t_end, double dt, int record_every = 1) {
  FlowState st{WarpedState{SymTensor2Field::identity(phi0.grid()), phi0, mu}, 0.0};
  FlowParams p;
  p.warped_form = WarpedForm::reduced;
  StepperConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.record_every = record_every;
  return run_flow(st, p, cfg);
}

ScalarField sin_x(const Grid& g, double amp) {
  ScalarField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) f[p] = amp * std::sin(g.coordinate(p, 0));
  return f;
}

}  // namespace

TEST_CASE("comparison solution") {
  CHECK(comparison_solution(-0.5, 0.0, 1.0) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
  CHECK(comparison_solution(-0.5, 0.0, 1.0) == doctest::Approx(0.346574).epsilon(1e-6));
  for (double t : {0.0, 0.5, 3.0, 100.0}) CHECK(comparison_solution(0.0, 0.7, t) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(comparison_solution(0.5, 0.0, 0.99) == doctest::Approx(0.5 * std::log(0.01)));
  CHECK_THROWS_AS(comparison_solution(0.5, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(comparison_solution(0.5, 0.0, 1.5), DomainError);
}

TEST_CASE("sandwich monitor") {
  const Grid g = Grid::cube(2, 8, 2 * kPi);
  SUBCASE("constant phi sits on both envelopes") {
    const Trajectory tr = warped_run(ScalarField(g, 0.2), -0.5, 1.0, 0.01, 10);
    SandwichMonitor mon;
    monitor_trajectory(mon, tr.states);
    CHECK(mon.rows().size() == tr.states.size());
    CHECK_FALSE(mon.violated());
    for (const MonitorRow& r : mon.rows()) {
      CHECK(r.lower_env == doctest::Approx(r.upper_env).epsilon(1e-15));
      CHECK(std::abs(r.observed_min - r.lower_env) < 1e-10);
      CHECK(std::abs(r.observed_max - r.upper_env) < 1e-10);
    }
    CHECK(mon.rows().back().upper_env == doctest::Approx(std::exp(0.4) + 1.0));
  }
  SUBCASE("mu = 0: constant envelopes") {
    const Trajectory tr = warped_run(sin_x(g, 0.1), 0.0, 0.5, 0.01, 10);
    SandwichMonitor mon;
    monitor_trajectory(mon, tr.states);
    CHECK_FALSE(mon.violated());
    for (const MonitorRow& r : mon.rows()) {
      CHECK(r.lower_env == doctest::Approx(mon.rows().front().lower_env));
      CHECK(r.upper_env == doctest::Approx(mon.rows().front().upper_env));
    }
  }
  SUBCASE("a short mu = -1/2 run stays inside") {
    const Trajectory tr = warped_run(sin_x(Grid::cube(2, 16, 2 * kPi), 0.1), -0.5, 1.0, 0.01, 10);
    SandwichMonitor s;
    GradientDecayMonitor d;
    monitor_trajectory(s, tr.states);
    monitor_trajectory(d, tr.states);
    CHECK(s.violations() == 0);
    CHECK(d.violations() == 0);
    CHECK(s.worst_slack() > 0.0);
    CHECK(d.b() == doctest::Approx(std::exp(0.2)).epsilon(1e-3));
    CHECK(d.max_ratio_increase() <= 1e-6);
    CHECK(d.tightest_constant() >= d.U0());
  }
  SUBCASE("an exit beyond the margin is reported") {
    std::vector<FlowState> states;
    // exact constant solution exp(2 phi) = 1 + t, then one point pushed out
    for (int i = 0; i < 3; ++i)
      states.push_back(FlowState{WarpedState{SymTensor2Field::identity(g), ScalarField(g, 0.5 * std::log(1 + 0.5 * i)), -0.5}, 0.5 * i});
    std::get<WarpedState>(states[2].fields).phi[7] = 1.0;
    SandwichMonitor mon(1e-3);
    monitor_trajectory(mon, states);
    CHECK(mon.violated());
    CHECK(mon.violations() == 1);
    CHECK(mon.rows()[2].violated);
    CHECK(mon.worst_slack() < 0.0);
    const std::string csv = mon.csv();
    CHECK(csv.substr(0, csv.find('\n')) == "t,observed_min,observed_max,lower_env,upper_env,margin,violated");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  }
  SUBCASE("margin grows with c1 h^4 (1 + t)") {
    std::vector<FlowState> states;
    for (int i = 0; i < 2; ++i) states.push_back(FlowState{WarpedState{SymTensor2Field::identity(g), ScalarField(g, 0.0), -0.5}, 1.0 * i});
    SandwichMonitor mon(1e-3, 2.0);
    monitor_trajectory(mon, states);
    const double h4 = std::pow(2 * kPi / 8, 4);
    CHECK(mon.rows()[0].margin == doctest::Approx(1e-3 + 2.0 * h4));
    CHECK(mon.rows()[1].margin == doctest::Approx(1e-3 + 4.0 * h4));
  }
}

TEST_CASE("gradient decay monitor on constant data") {
  const Grid g = Grid::cube(2, 8, 2 * kPi);
  const Trajectory tr = warped_run(ScalarField(g, -0.1), -0.5, 0.5, 0.01, 10);
  GradientDecayMonitor mon;
  monitor_trajectory(mon, tr.states);
  CHECK_FALSE(mon.violated());
  for (const MonitorRow& r : mon.rows()) CHECK(r.observed_max == 0.0);
}

TEST_CASE("warped Ricci decomposition") {
  Rng rng(61);
  const Grid g = Grid::cube(2, 8, 2 * kPi);
  const WarpedRicciResiduals z = warped_ricci_oracle(SymTensor2Field::identity(g), ScalarField(g, 0.4), 8);
  CHECK(z.horizontal < 1e-13);
  CHECK(z.mixed < 1e-13);
  CHECK(z.vertical < 1e-13);

  SymTensor2Field gm(g);
  fill_random_smooth(gm, rng, 1, 0.2);
  gm += SymTensor2Field::identity(g);
  CHECK(warped_ricci_oracle(gm, random_smooth_scalar(g, rng, 2, 0.3), 8).mixed < 1e-12);

  auto err = [](int n) {
    const Grid gg = Grid::cube(2, n, 2 * kPi);
    const WarpedRicciResiduals r = warped_ricci_oracle(SymTensor2Field::identity(gg), sin_x(gg, 0.3), 8);
    return std::max(r.horizontal, r.vertical);
  };
  const double a = err(16), b = err(32);
  CHECK(a / b >= 8.0);

  CHECK_THROWS(warped_ricci_oracle(SymTensor2Field::identity(Grid::cube(3, 8, 1.0)), ScalarField(Grid::cube(3, 8, 1.0)), 8));
}

TEST_CASE("evolution identities") {
  const Grid g = Grid::cube(2, 8, 2 * kPi);
  const Trajectory c = warped_run(ScalarField(g, 0.3), -0.5, 0.1, 0.01);
  CHECK(evolution_identity_residual(c.states, EvolutionIdentity::dphi, 1.0) < 1e-12);
  CHECK(evolution_identity_residual(c.states, EvolutionIdentity::dphi_sq, 1.0) < 1e-12);

  CHECK_THROWS_AS(evolution_identity_residual({c.states[0], c.states[1]}, EvolutionIdentity::dphi, 1.0), DomainError);
  std::vector<FlowState> uneven{c.states[0], c.states[1], c.states[10]};
  CHECK_THROWS_AS(evolution_identity_residual(uneven, EvolutionIdentity::dphi, 1.0), DomainError);

  // residual is O(dt^2 + h^4): with a small step it converges under grid refinement
  auto res = [](int n) {
    const Trajectory tr = warped_run(sin_x(Grid::cube(2, n, 2 * kPi), 0.1), -0.5, 0.04, 0.002);
    return evolution_identity_residual(tr.states, EvolutionIdentity::dphi_sq, 1.0);
  };
  const double r16 = res(16), r32 = res(32);
  CHECK(r16 < 1e-3);
  CHECK(r32 < r16 / 8);
}

TEST_CASE("decay fit") {
  std::vector<double> t, v;
  for (int i = 0; i < 100; ++i) {
    t.push_back(0.05 * i);
    v.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const DecayFit f = fit_decay(t, v, 0.0, 10.0);
  CHECK(f.C == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.samples == 100);
  CHECK(f.rms < 1e-12);

  Rng rng(62);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  std::vector<double> noisy = v;
  for (double& x : noisy) x *= 1.0 + u(rng);
  CHECK(std::abs(fit_decay(t, noisy, 0.0, 10.0).rate - 2.0) <= 0.02);

  const DecayFit w = fit_decay(t, v, 1.0, 2.0);
  CHECK(w.samples == 21);
  CHECK(w.rate == doctest::Approx(2.0).epsilon(1e-10));

  std::vector<double> bad = v;
  bad[50] = 0.0;
  CHECK_THROWS_AS(fit_decay(t, bad, 0.0, 10.0), DomainError);
  CHECK_NOTHROW(fit_decay(t, bad, 0.0, 2.0));
}

TEST_CASE("energy functional") {
  const Grid g = Grid::cube(2, 16, 2 * kPi);
  const SymTensor2Field id = SymTensor2Field::identity(g);
  CHECK(energy_functional(id, ScalarField(g), ScalarField(g), 1.0, -0.5) == doctest::Approx(-2 * kPi * kPi).epsilon(1e-14));
  // f = c constant scales by exp(-c); phi = a shifts exp(-2 phi)
  CHECK(energy_functional(id, ScalarField(g, 0.5), ScalarField(g, 1.0), 2.0, -0.5) ==
        doctest::Approx(-std::exp(-1.0) * std::exp(-1.0) * 4 * kPi * kPi).epsilon(1e-14));
  // phi = sin x, f = 0: -m int cos^2 = -m 2 pi^2 with mu = 0
  const Grid g64 = Grid::cube(2, 64, 2 * kPi);
  CHECK(energy_functional(SymTensor2Field::identity(g64), sin_x(g64, 1.0), ScalarField(g64), 1.0, 0.0) == doctest::Approx(-2 * kPi * kPi).epsilon(1e-5));
}
