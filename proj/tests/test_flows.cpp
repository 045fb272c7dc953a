#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rflab/errors.hpp"
#include "rflab/flows.hpp"
#include "rflab/random_fields.hpp"

using namespace rflab;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const ComponentArray& a, const ComponentArray& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

SymTensor2Field random_metric(const Grid& g, Rng& rng, double amp = 0.2) {
  SymTensor2Field h(g);
  fill_random_smooth(h, rng, 1, amp);
  return SymTensor2Field::identity(g) + h;
}

FlowParams synth_params(double K, int n) {
  FlowParams p;
  p.synth = SyntheticCurvature::space_form(K, n);
  p.lambda = K * (n - 1);
  p.s = -2 * p.lambda;
  return p;
}

// circular shift by one grid point along axis 0
void shift(ComponentArray& f) {
  const Grid& g = f.grid();
  const std::size_t st = g.stride(0), n = static_cast<std::size_t>(g.points(0));
  for (int c = 0; c < f.components(); ++c) {
    std::vector<double> tmp(f.comp(c), f.comp(c) + g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
      const std::size_t i = (p / st) % n;
      const std::size_t q = p - i * st + ((i + 1) % n) * st;
      f.comp(c)[q] = tmp[p];
    }
  }
}

}  // namespace

TEST_CASE("coupling and parameter validation") {
  const Coupling c{2.0, 0.5};
  CHECK(c.at(0) == 2.0);
  double prev = c.at(0);
  for (int i = 1; i < 50; ++i) {
    const double v = c.at(0.1 * i);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= prev);
    prev = v;
  }
  FlowParams p;
  p.c = {-1.0, 0.0};
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.c = {1.0, -0.1};
  CHECK_THROWS_AS(p.validate(), DomainError);
  FlowParams q = synth_params(-1.0, 3);
  CHECK_NOTHROW(q.validate_fixed_point());
  q.s = 0.0;
  CHECK_THROWS_AS(q.validate_fixed_point(), DomainError);
  q = synth_params(-1.0, 3);
  q.lambda = -1.0;
  CHECK_THROWS_AS(q.validate(), DomainError);
  CHECK(system_from_string("connection") == SystemKind::connection);
  CHECK_THROWS_AS(system_from_string("ricci"), DomainError);
}

TEST_CASE("declared fixed points have zero right side") {
  const Grid g2 = Grid::cube(2, 8, 2 * kPi), g3 = Grid::cube(3, 8, 2 * kPi);
  const FlowParams flat;
  SUBCASE("hrf") {
    const HrfState st{SymTensor2Field::identity(g2), MapField(g2, TargetSpace::euclidean(2), 0.7)};
    CHECK(FlowState{rhs_hrf(st, 0, flat), 0}.sup_norm() == 0.0);
    const HrfState st3{SymTensor2Field::identity(g3), MapField(g3, TargetSpace::euclidean(1), 0.7)};
    CHECK(FlowState{rhs_hrf(st3, 0, synth_params(-1.0, 3)), 0}.sup_norm() == 0.0);
  }
  SUBCASE("warped") {
    FlowParams p = synth_params(-1.0, 2);
    p.phi_avg0 = 0.4;
    const WarpedState st{SymTensor2Field::identity(g2), ScalarField(g2, 0.4), -0.5};
    CHECK(FlowState{rhs_warped(st, 0, p, WarpedForm::normalized), 0}.sup_norm() == 0.0);
  }
  SUBCASE("invariant") {
    FiberMetricField G(g2, 2);
    G.set_identity(1.5);
    const InvariantState st{SymTensor2Field::identity(g2), VecOneFormField(g2, 2), G};
    CHECK(FlowState{rhs_invariant(st, 0, flat), 0}.sup_norm() == 0.0);
    CHECK(FlowState{rhs_invariant(st, 0, synth_params(-0.5, 2)), 0}.sup_norm() == 0.0);
  }
  SUBCASE("connection") {
    const ConnectionState st{SymTensor2Field::identity(g3), ThreeFormField(g3)};
    CHECK(FlowState{rhs_connection(st, 0, flat), 0}.sup_norm() == 0.0);
    CHECK(FlowState{rhs_connection(st, 0, synth_params(-0.5, 3)), 0}.sup_norm() == 0.0);
  }
}

TEST_CASE("fixed point is preserved over 1000 steps") {
  const Grid g = Grid::cube(2, 8, 2 * kPi);
  FlowState st{HrfState{SymTensor2Field::identity(g), MapField(g, TargetSpace::euclidean(1), 0.3)}, 0.0};
  const FlowState start = st;
  const FlowParams p = synth_params(-1.0, 2);
  StepperConfig cfg;
  cfg.dt = 0.5 * cfl_limit(st, cfg.cfl);
  for (int i = 0; i < 1000; ++i) st = step(st, p, cfg);
  FlowState d = st;
  d.axpy(-1.0, start);
  CHECK(d.sup_norm() < 1e-13);
}

TEST_CASE("warped right side: heat equation and the reduced form") {
  Rng rng(41);
  const Grid g = Grid::cube(2, 32, 2 * kPi);
  FlowParams p;
  ScalarField phi(g);
  for (std::size_t q = 0; q < g.size(); ++q) phi[q] = std::sin(g.coordinate(q, 0));
  const WarpedState flat{SymTensor2Field::identity(g), phi, 0.0};
  const WarpedState r = rhs_warped(flat, 0, p, WarpedForm::reduced);
  ScalarField expect = phi;
  expect *= -1.0;
  CHECK(max_abs_diff(r.phi, expect) < 5e-5);

  // pre-gauge form plus the Lie derivative along X = -m grad phi gives the reduced form,
  // which for mu = 0 is the hrf right side with target R and c = m
  p.m = 2.0;
  p.c = {2.0, 0.0};
  p.s = 0.3;
  const WarpedState st{random_metric(g, rng), random_smooth_scalar(g, rng, 2, 0.5), 0.0};
  const MetricState m = build_metric_state(st.g, {false});
  const VectorField X = gradient_field(st.phi, m, -p.m);
  WarpedState pre = rhs_warped(st, 0, p, WarpedForm::pre_gauge);
  pre.g += lie_derivative_metric(X, m);
  pre.phi += lie_derivative_scalar(X, st.phi);
  const WarpedState red = rhs_warped(st, 0, p, WarpedForm::reduced);
  CHECK(max_abs_diff(pre.g, red.g) < 1e-12);
  CHECK(max_abs_diff(pre.phi, red.phi) < 1e-12);

  MapField map(g, TargetSpace::euclidean(1));
  map.raw() = st.phi.raw();
  const HrfState h = rhs_hrf(HrfState{st.g, map}, 0, p);
  CHECK(max_abs_diff(h.g, red.g) < 1e-12);
  CHECK(max_abs_diff(h.phi, red.phi) < 1e-12);
}

TEST_CASE("invariant right side") {
  Rng rng(42);
  // N = 1, G = 1 on the circle: dA = 0 so dA/dt = -s A / 2
  const Grid g1 = Grid::cube(1, 16, 2 * kPi);
  VecOneFormField A(g1, 1);
  fill_random_smooth(A, rng);
  FiberMetricField G1(g1, 1);
  G1.set_identity();
  FlowParams p;
  p.s = 0.8;
  const InvariantState r1 = rhs_invariant(InvariantState{SymTensor2Field::identity(g1), A, G1}, 0, p);
  VecOneFormField expect = A;
  expect *= -0.4;
  CHECK(max_abs_diff(r1.A, expect) < 1e-14);

  // A = 0: the G equation is the tension-field flow
  const Grid g = Grid::cube(2, 10, 2 * kPi);
  FiberMetricField G(g, 2);
  fill_random_smooth(G, rng, 1, 0.3);
  for (std::size_t q = 0; q < g.size(); ++q) {
    G(0, 0, q) += 1;
    G(1, 1, q) += 1;
  }
  const InvariantState st{random_metric(g, rng), VecOneFormField(g, 2), G};
  const InvariantState r = rhs_invariant(st, 0, FlowParams{});
  const MapField tau = tension_field(MapField(G), build_metric_state(st.g, {false}));
  CHECK(max_abs_diff(r.G, tau) < 1e-10);

  CHECK_THROWS_AS(rhs_invariant(InvariantState{st.g, VecOneFormField(g, 3), G}, 0, FlowParams{}), ShapeMismatch);
}

TEST_CASE("connection right side") {
  Rng rng(43);
  const Grid g = Grid::cube(3, 8, 2 * kPi);
  const double c = 0.7;
  const ConnectionState cst{SymTensor2Field::identity(g), ThreeFormField(g, c)};
  const MetricState flat = build_metric_state(cst.g, {false});
  const SymTensor2Field Hq = torsion_square(cst.H, flat);
  double e = 0;
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) e = std::max(e, std::abs(Hq(i, j, p) - (i == j ? 2 * c * c : 0.0)));
  CHECK(e < 1e-14);
  const ConnectionState r = rhs_connection(cst, 0, FlowParams{});
  CHECK(r.g(0, 0, 3) == doctest::Approx(c * c));
  CHECK(sup_norm(r.H) < 1e-12);

  // naive sextuple loop on a random metric
  const MetricState m = build_metric_state(random_metric(g, rng), {false});
  ThreeFormField H(g);
  fill_random_noise(H, rng);
  const SymTensor2Field fast = torsion_square(H, m);
  e = 0;
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double v = 0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            for (int cc = 0; cc < 3; ++cc)
              for (int d = 0; d < 3; ++d) v += m.g_inv(a, b, p) * m.g_inv(cc, d, p) * H.full(i, a, cc, p) * H.full(j, b, d, p);
        e = std::max(e, std::abs(v - fast(i, j, p)));
      }
  CHECK(e < 1e-12);
  CHECK_THROWS(rhs_connection(ConnectionState{SymTensor2Field::identity(Grid::cube(2, 8, 1.0)), ThreeFormField{}}, 0, FlowParams{}));
}

TEST_CASE("DeTurck gauge adds the linearized Lie derivative") {
  // g = I + eps h with eps small enough that the gauged/ungauged difference is
  // eps (d_a W_b + d_b W_a) + O(eps^2), W_k = d_i h_ik - 1/2 d_k tr h;
  // the remaining mismatch is discretization and must converge at fourth order
  auto err = [](int n) {
    const Grid g = Grid::cube(2, n, 2 * kPi);
    SymTensor2Field h(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double x = g.coordinate(p, 0), y = g.coordinate(p, 1);
      h(0, 0, p) = std::sin(x + y);
      h(0, 1, p) = 0.5 * std::cos(x);
      h(1, 1, p) = std::cos(x - y);
    }
    ScalarField tr(g);
    for (std::size_t p = 0; p < g.size(); ++p) tr[p] = h(0, 0, p) + h(1, 1, p);
    std::vector<ScalarField> W;
    for (int k = 0; k < 2; ++k) {
      ScalarField w = -0.5 * partial_derivative(tr, k, 1);
      for (int i = 0; i < 2; ++i) {
        ScalarField hik(g);
        std::copy(h.comp_ij(i, k), h.comp_ij(i, k) + g.size(), hik.raw().begin());
        w += partial_derivative(hik, i, 1);
      }
      W.push_back(w);
    }
    SymTensor2Field lin(g);
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        const ScalarField v = partial_derivative(W[b], a, 1) + partial_derivative(W[a], b, 1);
        std::copy(v.raw().begin(), v.raw().end(), lin.comp_ij(a, b));
      }
    FlowParams gauged;
    gauged.deturck_reference = make_reference(SymTensor2Field::identity(g));
    const MapField phi(g, TargetSpace::euclidean(1));
    const double eps = 1e-6;
    SymTensor2Field gm = SymTensor2Field::identity(g);
    gm.axpy(eps, h);
    SymTensor2Field d = rhs_hrf(HrfState{gm, phi}, 0, gauged).g - rhs_hrf(HrfState{gm, phi}, 0, FlowParams{}).g;
    d *= 1.0 / eps;
    return max_abs_diff(d, lin);
  };
  const double e16 = err(16), e32 = err(32);
  CHECK(e32 < 1e-3);
  CHECK(std::log2(e16 / e32) > 3.5);
}

TEST_CASE("right sides are translation equivariant") {
  Rng rng(45);
  const Grid g = Grid::cube(2, 10, 2 * kPi);
  HrfState st{random_metric(g, rng), MapField(g, TargetSpace::euclidean(2))};
  fill_random_smooth(st.phi, rng);
  HrfState sh = st;
  shift(sh.g);
  shift(sh.phi);
  FlowParams p;
  p.c = {0.5, 0.0};
  p.s = 0.2;
  HrfState a = rhs_hrf(st, 0, p);
  shift(a.g);
  shift(a.phi);
  const HrfState b = rhs_hrf(sh, 0, p);
  CHECK(max_abs_diff(a.g, b.g) == 0.0);
  CHECK(max_abs_diff(a.phi, b.phi) == 0.0);
}

TEST_CASE("time stepping") {
  SUBCASE("heat flow of a mode decays as exp(-k^2 t)") {
    const Grid g = Grid::cube(1, 64, 2 * kPi);
    MapField phi(g, TargetSpace::euclidean(1));
    for (std::size_t p = 0; p < g.size(); ++p) phi.value(0, p) = std::sin(2 * g.coordinate(p, 0));
    FlowState st{HrfState{SymTensor2Field::identity(g), phi}, 0.0};
    StepperConfig cfg;
    cfg.dt = 0.002;
    cfg.t_end = 1.0;
    cfg.record_every = 100;
    const Trajectory tr = run_flow(st, FlowParams{}, cfg);
    CHECK(tr.stop_reason == "t_end");
    CHECK(tr.times.back() == doctest::Approx(1.0));
    const auto& last = std::get<HrfState>(tr.states.back().fields).phi;
    double amp = 0;
    for (std::size_t p = 0; p < g.size(); ++p) amp += 2.0 / g.size() * last.value(0, p) * std::sin(2 * g.coordinate(p, 0));
    CHECK(amp == doctest::Approx(std::exp(-4.0)).epsilon(0.01));
  }
  SUBCASE("right side matches the time derivative of the trajectory") {
    Rng rng(46);
    const Grid g = Grid::cube(2, 12, 2 * kPi);
    const FlowState st{WarpedState{random_metric(g, rng, 0.1), random_smooth_scalar(g, rng, 1, 0.3), -0.5}, 0.0};
    FlowParams p;
    p.warped_form = WarpedForm::reduced;
    auto err = [&](double dt) {
      StepperConfig cfg;
      cfg.dt = dt;
      cfg.t_end = 2 * dt;
      const Trajectory tr = run_flow(st, p, cfg);
      FlowState d = tr.states[2];
      d.axpy(-1.0, tr.states[0]);
      FlowState r = rhs(tr.states[1], p);
      d.axpy(-2 * dt, r);
      return d.sup_norm() / (2 * dt);
    };
    const double e1 = err(4e-3), e2 = err(2e-3);
    CHECK(e1 < 1e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
  SUBCASE("CFL violation") {
    const Grid g = Grid::cube(2, 16, 2 * kPi);
    const FlowState st{HrfState{SymTensor2Field::identity(g), MapField(g, TargetSpace::euclidean(1))}, 0.0};
    StepperConfig cfg;
    const double limit = cfl_limit(st, cfg.cfl);
    CHECK(limit == doctest::Approx(0.25 * std::pow(2 * kPi / 16, 2) / 2));
    cfg.dt = 2 * limit;
    CHECK_THROWS_AS(step(st, FlowParams{}, cfg), NumericalFailure);
  }
  SUBCASE("warped run with mu = 1/2 stops before degeneration") {
    const Grid g = Grid::cube(2, 8, 2 * kPi);
    const FlowState st{WarpedState{SymTensor2Field::identity(g), ScalarField(g, 0.0), 0.5}, 0.0};
    FlowParams p;
    p.warped_form = WarpedForm::reduced;
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 2.0;
    cfg.record_every = 10;
    const Trajectory tr = run_flow(st, p, cfg);
    CHECK(tr.stop_reason.find("degeneration") != std::string::npos);
    CHECK(tr.times.back() < 1.0);
    CHECK(tr.times.back() > 0.95);
  }
  SUBCASE("NaN is detected") {
    const Grid g = Grid::cube(2, 8, 2 * kPi);
    ScalarField phi(g);
    phi[3] = std::nan("");
    const FlowState st{WarpedState{SymTensor2Field::identity(g), phi, 0.0}, 0.0};
    CHECK_THROWS_AS(st.validate(), NumericalFailure);
  }
}

TEST_CASE("normalization transform") {
  const Grid g = Grid::cube(2, 8, 2 * kPi);
  SUBCASE("s = 0 is the identity for hrf") {
    Rng rng(47);
    FlowState st{HrfState{random_metric(g, rng, 0.1), MapField(g, TargetSpace::euclidean(1))}, 0.0};
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.05;
    const Trajectory tr = run_flow(st, FlowParams{}, cfg);
    const TransformResult res = normalize_transform(tr.states, 0.0, FlowParams{});
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      CHECK(res.states[i].time == tr.states[i].time);
      CHECK(max_abs_diff(res.states[i].metric(), tr.states[i].metric()) == 0.0);
    }
  }
  SUBCASE("spatially constant warped solution maps to the average") {
    const double a = 0.3;
    FlowState st{WarpedState{SymTensor2Field::identity(g), ScalarField(g, a), -0.5}, 0.0};
    FlowParams p;
    p.warped_form = WarpedForm::reduced;
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.record_every = 10;
    const Trajectory tr = run_flow(st, p, cfg);
    FlowParams q;
    q.warped_form = WarpedForm::normalized;
    const TransformResult res = normalize_transform(tr.states, 1.0, q);
    double e = 0;
    for (const FlowState& s : res.states) e = std::max(e, sup_norm(std::get<WarpedState>(s.fields).phi) - a);
    CHECK(std::abs(e) < 1e-10);
    CHECK(res.residual < 1e-3);
  }
  SUBCASE("errors") {
    const FlowState st{WarpedState{SymTensor2Field::identity(g), ScalarField(g), 0.0}, 0.0};
    CHECK_THROWS_AS(normalize_transform({st}, 1.0, FlowParams{}), DomainError);
    FlowState b = st, c = st;
    b.time = 1;
    c.time = 2;
    CHECK_THROWS_AS(normalize_transform({st, b, c}, 1.0, FlowParams{}), DomainError);  // mu != -1/2
    const FlowState h{HrfState{SymTensor2Field::identity(g), MapField(g, TargetSpace::euclidean(1))}, 0.0};
    FlowState h1 = h, h2 = h;
    h1.time = 1;
    h2.time = 2;
    CHECK_THROWS_AS(normalize_transform({h, h1, h2}, -1.0, FlowParams{}), DomainError);  // sigma <= 0
  }
}
