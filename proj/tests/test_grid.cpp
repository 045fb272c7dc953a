#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rflab/geometry.hpp"
#include "rflab/random_fields.hpp"

using namespace rflab;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const ComponentArray& a, const ComponentArray& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

// error of the first derivative of sin(2 pi x / L) on an n-point 1D grid
double d1_error(int n, double L) {
  const Grid g({n}, {L});
  ScalarField f(g), exact(g);
  const double k = 2 * kPi / L;
  for (std::size_t p = 0; p < g.size(); ++p) {
    f[p] = std::sin(k * g.coordinate(p, 0));
    exact[p] = k * std::cos(k * g.coordinate(p, 0));
  }
  return max_abs_diff(partial_derivative(f, 0, 1), exact);
}

}  // namespace

TEST_CASE("grid geometry and layout") {
  const Grid g({8, 10, 12}, {1.0, 2.0, 3.0});
  CHECK(g.dim() == 3);
  CHECK(g.size() == 960u);
  CHECK(g.spacing(1) == 2.0 / 10);
  CHECK(g.stride(2) == 1u);
  CHECK(g.stride(0) == 120u);
  const auto c = g.coords(g.stride(0) * 3 + g.stride(1) * 4 + 5);
  CHECK(c[0] == 3);
  CHECK(c[1] == 4);
  CHECK(c[2] == 5);
  CHECK(g.coordinate(g.stride(1) * 4, 1) == doctest::Approx(0.8));
  CHECK(g.cell_volume() == doctest::Approx(0.125 * 0.2 * 0.25));
}

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid({7}, {1.0}), DomainError);
  CHECK_THROWS_AS(Grid({8, 8}, {1.0}), ShapeMismatch);
  CHECK_THROWS_AS(Grid({8}, {0.0}), DomainError);
  CHECK_THROWS_AS(Grid({8, 8, 8, 8}, {1, 1, 1, 1}), DomainError);
  CHECK_THROWS_AS(Grid::cube(2, 8, 1.0).points(2), DomainError);
}

TEST_CASE("derivative of a constant vanishes") {
  const Grid g = Grid::cube(3, 8, 2 * kPi);
  ScalarField f(g, 3.5);
  for (int a = 0; a < 3; ++a) {
    CHECK(sup_norm(partial_derivative(f, a, 1)) == 0.0);
    CHECK(sup_norm(partial_derivative(f, a, 2)) < 1e-12);
  }
  CHECK_THROWS_AS(partial_derivative(f, 3, 1), DomainError);
  CHECK_THROWS_AS(partial_derivative(f, 0, 3), DomainError);
}

TEST_CASE("first derivative of a sine converges at fourth order") {
  const double L = 3.0;
  const double e16 = d1_error(16, L), e32 = d1_error(32, L), e64 = d1_error(64, L);
  CHECK(e32 < 1e-3);
  CHECK(std::log2(e16 / e32) > 3.8);
  CHECK(std::log2(e32 / e64) > 3.8);
}

TEST_CASE("second derivative agrees with the twice-applied first derivative under refinement") {
  auto err = [](int n) {
    const Grid g = Grid::cube(1, n, 2 * kPi);
    ScalarField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double x = g.coordinate(p, 0);
      f[p] = std::exp(std::sin(x)) + 0.3 * std::cos(2 * x);
    }
    return max_abs_diff(partial_derivative(f, 0, 2), partial_derivative(partial_derivative(f, 0, 1), 0, 1));
  };
  const double a = err(32), b = err(64);
  CHECK(a < 1e-2);
  CHECK(a / b > 8.0);
}

TEST_CASE("mixed partials commute and match second_partials bitwise") {
  Rng rng(1);
  const Grid g({12, 16, 10}, {2 * kPi, 2 * kPi, 2 * kPi});
  const ScalarField f = random_smooth_scalar(g, rng, 2);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const ScalarField ab = second_partial(f, a, b), ba = second_partial(f, b, a);
      CHECK(max_abs_diff(ab, ba) == 0.0);
    }
  const ComponentArray df = first_partials(f);
  const ComponentArray ddf = second_partials(f, df);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      const ScalarField ab = second_partial(f, a, b);
      for (std::size_t p = 0; p < g.size(); ++p) REQUIRE(ddf.at(sym_index(a, b, 3), p) == ab[p]);
    }
}

TEST_CASE("integration") {
  const Grid g = Grid::cube(2, 16, 2 * kPi);
  ScalarField one(g, 1.0);
  CHECK(integrate(one, one) == doctest::Approx(4 * kPi * kPi).epsilon(1e-14));
  ScalarField s(g);
  for (std::size_t p = 0; p < g.size(); ++p) s[p] = std::sin(g.coordinate(p, 0));
  CHECK(std::abs(integrate(s, one)) < 1e-12);

  // periodic summation by parts
  Rng rng(2);
  const ScalarField f = random_smooth_scalar(g, rng, 3);
  for (int a = 0; a < 2; ++a) CHECK(std::abs(integrate(partial_derivative(f, a, 1))) < 1e-13);

  ScalarField other(Grid::cube(2, 8, 2 * kPi), 1.0);
  CHECK_THROWS_AS(integrate(one, other), ShapeMismatch);
}

TEST_CASE("integration against sqrt(det g) converges under refinement") {
  // density of g = diag(1 + 0.3 sin x, 1 + 0.2 cos y), integrand exp(cos x sin y)
  auto integral = [](int n) {
    const Grid g = Grid::cube(2, n, 2 * kPi);
    ScalarField f(g), dens(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double x = g.coordinate(p, 0), y = g.coordinate(p, 1);
      f[p] = std::exp(std::cos(x) * std::sin(y));
      dens[p] = std::sqrt((1 + 0.3 * std::sin(x)) * (1 + 0.2 * std::cos(y)));
    }
    return integrate(f, dens);
  };
  const double ref = integral(256);
  const double e8 = std::abs(integral(8) - ref), e16 = std::abs(integral(16) - ref);
  CHECK(e16 < 1e-4);
  CHECK(e16 < e8 / 16.0);
}

TEST_CASE("norms") {
  const Grid g = Grid::cube(2, 16, 2 * kPi);
  CHECK(sup_norm(SymTensor2Field(g)) == 0.0);
  const MetricState m = build_metric_state(SymTensor2Field::identity(g), {false});
  CHECK(l2_inner(SymTensor2Field(g), SymTensor2Field(g), m) == 0.0);
  const SymTensor2Field id = SymTensor2Field::identity(g);
  CHECK(l2_inner(id, id, m) == doctest::Approx(2 * 4 * kPi * kPi).epsilon(1e-14));

  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Grid small = Grid::cube(1, 8, 1.0);
    SymTensor2Field h(small);
    fill_random_noise(h, rng);
    const MetricState ms = build_metric_state(SymTensor2Field::identity(small), {false});
    REQUIRE(l2_inner(h, h, ms) >= 0.0);
  }
  ComponentArray v(g, 2);
  v.at(1, 7) = -4.5;
  CHECK(sup_norm(v) == 4.5);
}

TEST_CASE("field arithmetic checks shapes") {
  const Grid a = Grid::cube(2, 8, 1.0), b = Grid::cube(2, 10, 1.0);
  ScalarField x(a, 1.0), y(b, 1.0);
  CHECK_THROWS_AS(x += y, ShapeMismatch);
  ScalarField z = x + x;
  CHECK(z[5] == 2.0);
  z.axpy(-0.5, x);
  CHECK(z[5] == 1.5);
  CHECK(sym_index(1, 0, 3) == sym_index(0, 1, 3));
  CHECK(sym_size(3) == 6);
}

TEST_CASE("three-form storage is totally antisymmetric") {
  const Grid g = Grid::cube(3, 8, 1.0);
  ThreeFormField H(g, 2.0);
  CHECK(H.full(0, 1, 2, 0) == 2.0);
  CHECK(H.full(1, 0, 2, 0) == -2.0);
  CHECK(H.full(2, 0, 1, 0) == 2.0);
  CHECK(H.full(0, 0, 2, 0) == 0.0);
  CHECK_THROWS(ThreeFormField(Grid::cube(2, 8, 1.0)));
}
