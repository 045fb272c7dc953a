#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "rflab/errors.hpp"
#include "rflab/random_fields.hpp"
#include "rflab/targets.hpp"

using namespace rflab;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const ComponentArray& a, const ComponentArray& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

SymTensor2Field random_metric(const Grid& g, Rng& rng) {
  SymTensor2Field h(g);
  fill_random_smooth(h, rng, 1, 0.2);
  return SymTensor2Field::identity(g) + h;
}

FiberMetricField random_fiber(const Grid& g, int N, Rng& rng, double amp = 0.3) {
  FiberMetricField G(g, N);
  fill_random_smooth(G, rng, 1, amp);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int i = 0; i < N; ++i) G(i, i, p) += 1.0;
  return G;
}

// symmetric basis matrix for packed coordinate alpha of S_N
Eigen::MatrixXd basis(int alpha, int N) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j)
      if (sym_index(i, j, N) == alpha) E(i, j) = E(j, i) = 1.0;
  return E;
}

// Gram matrix of tr(G^-1 X G^-1 Y) in packed coordinates
Eigen::MatrixXd gram(const Eigen::MatrixXd& G) {
  const int N = static_cast<int>(G.rows()), P = sym_size(N);
  const Eigen::MatrixXd Gi = G.inverse();
  Eigen::MatrixXd M(P, P);
  for (int a = 0; a < P; ++a)
    for (int b = 0; b < P; ++b) M(a, b) = (Gi * basis(a, N) * Gi * basis(b, N)).trace();
  return M;
}

// Gamma^c_ab of S_N by central differences of the Gram matrix
std::vector<Eigen::MatrixXd> fd_christoffel(const Eigen::MatrixXd& G) {
  const int N = static_cast<int>(G.rows()), P = sym_size(N);
  const double eps = 1e-5;
  std::vector<Eigen::MatrixXd> dM(P);
  for (int d = 0; d < P; ++d) dM[d] = (gram(G + eps * basis(d, N)) - gram(G - eps * basis(d, N))) / (2 * eps);
  const Eigen::MatrixXd Mi = gram(G).inverse();
  std::vector<Eigen::MatrixXd> Gam(P, Eigen::MatrixXd::Zero(P, P));
  for (int c = 0; c < P; ++c)
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b)
        for (int d = 0; d < P; ++d)
          Gam[c](a, b) += 0.5 * Mi(c, d) * (dM[a](d, b) + dM[b](d, a) - dM[d](a, b));
  return Gam;
}

}  // namespace

TEST_CASE("SPD metric is positive on symmetric directions") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    FiberMat A(3, 3), X(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        A(r, c) = u(rng);
        X(r, c) = u(rng);
      }
    const FiberMat G = A * A.transpose() + 0.1 * FiberMat::Identity(3, 3);
    const FiberMat S = X + X.transpose();
    REQUIRE(spd_metric(G, S, S) > 0.0);
    REQUIRE(spd_metric(G, S, G) == doctest::Approx(S.cwiseProduct(G.inverse()).sum()));
  }
}

TEST_CASE("tension field") {
  Rng rng(32);
  SUBCASE("constant maps") {
    const Grid g = Grid::cube(2, 8, 2 * kPi);
    const MetricState m = build_metric_state(random_metric(g, rng), {false});
    CHECK(sup_norm(tension_field(MapField(g, TargetSpace::euclidean(3), 2.5), m)) < 1e-12);
    FiberMetricField G(g, 2);
    G.set_identity(2.0);
    CHECK(sup_norm(tension_field(MapField(G), m)) < 1e-12);
  }
  SUBCASE("euclidean sine on the circle") {
    const Grid g = Grid::cube(1, 64, 2 * kPi);
    const MetricState m = build_metric_state(SymTensor2Field::identity(g), {false});
    MapField phi(g, TargetSpace::euclidean(1)), expect(g, TargetSpace::euclidean(1));
    for (std::size_t p = 0; p < g.size(); ++p) {
      phi.value(0, p) = std::sin(g.coordinate(p, 0));
      expect.value(0, p) = -phi.value(0, p);
    }
    CHECK(max_abs_diff(tension_field(phi, m), expect) < 1e-5);
  }
  SUBCASE("SPD target against a Christoffel sum with finite-difference Christoffels") {
    const Grid g = Grid::cube(2, 10, 2 * kPi);
    const MetricState m = build_metric_state(random_metric(g, rng), {false});
    const int N = 2, P = 3;
    const MapField G(random_fiber(g, N, rng));
    const MapField tau = tension_field(G, m);
    std::vector<ScalarField> comp(P, ScalarField(g)), lap;
    std::vector<ComponentArray> d;
    for (int c = 0; c < P; ++c) {
      std::copy(G.comp(c), G.comp(c) + g.size(), comp[c].raw().begin());
      lap.push_back(laplacian_scalar(comp[c], m));
      d.push_back(first_partials(comp[c]));
    }
    double e = 0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const auto Gam = fd_christoffel(G.matrix(p));
      for (int c = 0; c < P; ++c) {
        double v = lap[c][p];
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int al = 0; al < P; ++al)
              for (int be = 0; be < P; ++be) v += m.g_inv(a, b, p) * Gam[c](al, be) * d[al].at(a, p) * d[be].at(b, p);
        e = std::max(e, std::abs(v - tau.at(c, p)));
      }
    }
    CHECK(e <= 1e-8);
  }
  SUBCASE("non-SPD point") {
    const Grid g = Grid::cube(1, 8, 1.0);
    const MetricState m = build_metric_state(SymTensor2Field::identity(g), {false});
    FiberMetricField G(g, 2);
    G.set_identity();
    G(1, 1, 5) = -1.0;
    CHECK_THROWS_AS(tension_field(MapField(G), m), NotPositiveDefinite);
  }
}

TEST_CASE("pullback form") {
  Rng rng(33);
  const Grid g = Grid::cube(2, 32, 2 * kPi);
  CHECK(sup_norm(pullback_form(MapField(g, TargetSpace::euclidean(2), 1.0))) == 0.0);

  // (sin x, cos x) pulls the Euclidean metric back to dx^2
  auto circle_err = [](int n) {
    const Grid gc = Grid::cube(2, n, 2 * kPi);
    MapField circle(gc, TargetSpace::euclidean(2));
    for (std::size_t p = 0; p < gc.size(); ++p) {
      circle.value(0, p) = std::sin(gc.coordinate(p, 0));
      circle.value(1, p) = std::cos(gc.coordinate(p, 0));
    }
    const SymTensor2Field P = pullback_form(circle);
    double e = 0;
    for (std::size_t p = 0; p < gc.size(); ++p)
      e = std::max({e, std::abs(P(0, 0, p) - 1.0), std::abs(P(0, 1, p)), std::abs(P(1, 1, p))});
    return e;
  };
  const double e16 = circle_err(16), e32 = circle_err(32);
  CHECK(e32 < 2e-4);
  CHECK(std::log2(e16 / e32) > 3.8);

  MapField noisy(g, TargetSpace::euclidean(3));
  fill_random_noise(noisy, rng);
  const SymTensor2Field Q = pullback_form(noisy);
  const SymTensor2Field R = pullback_form(MapField(random_fiber(g, 3, rng, 0.4)));
  for (std::size_t p = 0; p < g.size(); ++p)
    for (const SymTensor2Field* T : {&Q, &R}) {
      Eigen::Matrix2d M;
      M << (*T)(0, 0, p), (*T)(0, 1, p), (*T)(0, 1, p), (*T)(1, 1, p);
      REQUIRE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(M).eigenvalues().minCoeff() >= -1e-12);
    }
  CHECK_THROWS_AS(pullback_form(MapField(Grid::cube(2, 8, 1.0), TargetSpace::spd(2))), NotPositiveDefinite);
}

TEST_CASE("fiber energy term and coupling constant") {
  Rng rng(34);
  const Grid g = Grid::cube(2, 12, 2 * kPi);
  const FiberMetricField G = random_fiber(g, 3, rng);
  const SymTensor2Field E = fiber_metric_energy_term(G);
  // independent trace evaluation of 1/2 tr(G^-1 d_a G G^-1 d_b G)
  std::vector<ComponentArray> d;
  for (int c = 0; c < G.components(); ++c) {
    ScalarField s(g);
    std::copy(G.comp(c), G.comp(c) + g.size(), s.raw().begin());
    d.push_back(first_partials(s));
  }
  double e = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    Eigen::Matrix3d M, Gi;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(i, j) = G(i, j, p);
    Gi = M.inverse();
    Eigen::Matrix3d dG[2];
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dG[a](i, j) = d[sym_index(i, j, 3)].at(a, p);
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) e = std::max(e, std::abs(0.5 * (Gi * dG[a] * Gi * dG[b]).trace() - E(a, b, p)));
  }
  CHECK(e < 1e-12);

  const CouplingFit fit = fit_fiber_coupling(G);
  CHECK(fit.c == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(fit.residual < 1e-10);
}

TEST_CASE("fiber equation is a modified harmonic map flow") {
  Rng rng(35);
  const Grid g = Grid::cube(2, 10, 2 * kPi);
  const MetricState m = build_metric_state(random_metric(g, rng), {false});
  VecOneFormField A0(g, 2);
  FiberMetricField Gc(g, 2);
  Gc.set_identity(1.5);
  CHECK(check_modified_hmf_identity(MapField(Gc), A0, m) < 1e-14);

  const FiberMetricField G = random_fiber(g, 2, rng);
  CHECK(check_modified_hmf_identity(MapField(G), A0, m) <= 1e-10);

  VecOneFormField A(g, 2);
  fill_random_smooth(A, rng, 2, 0.5);
  CHECK(check_modified_hmf_identity(MapField(G), A, m) <= 1e-10);
  CHECK(check_modified_hmf_identity(MapField(G), A, m, true) <= 1e-10);

  // congruence G -> P^T G P with constant invertible P
  Eigen::Matrix2d P;
  P << 1.3, 0.4, -0.2, 0.9;
  FiberMetricField H(g, 2);
  for (std::size_t p = 0; p < g.size(); ++p) {
    Eigen::Matrix2d M;
    M << G(0, 0, p), G(0, 1, p), G(0, 1, p), G(1, 1, p);
    const Eigen::Matrix2d C = P.transpose() * M * P;
    H(0, 0, p) = C(0, 0);
    H(0, 1, p) = C(0, 1);
    H(1, 1, p) = C(1, 1);
  }
  CHECK(check_modified_hmf_identity(MapField(H), A, m) <= 1e-10);

  CHECK_THROWS_AS(check_modified_hmf_identity(MapField(g, TargetSpace::euclidean(2)), A, m), DomainError);
}
