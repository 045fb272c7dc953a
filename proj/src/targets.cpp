#include "rflab/targets.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rflab {

namespace {

FiberMat load_packed(const ComponentArray& f, int N, std::size_t p, int offset = 0) {
  FiberMat M(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) M(i, j) = f.at(offset + sym_index(i, j, N), p);
  return M;
}

void store_packed(ComponentArray& f, int N, std::size_t p, const FiberMat& M) {
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) f.at(sym_index(i, j, N), p) = 0.5 * (M(i, j) + M(j, i));
}

FiberMat spd_inverse(const FiberMat& G, std::size_t p) {
  Eigen::LLT<FiberMat> llt(G);
  if (!G.allFinite() || llt.info() != Eigen::Success) throw NotPositiveDefinite("fiber metric", p);
  return llt.solve(FiberMat::Identity(G.rows(), G.cols()));
}

void require_rank(int N) {
  if (N < 1 || N > kMaxFiber) throw DomainError("fiber rank must be between 1 and 4");
}

}  // namespace

TargetSpace TargetSpace::euclidean(int k) {
  if (k < 1) throw DomainError("euclidean target needs k >= 1");
  return {Kind::euclidean, k};
}

TargetSpace TargetSpace::spd(int N) {
  require_rank(N);
  return {Kind::spd, N};
}

double spd_metric(const FiberMat& G, const FiberMat& X, const FiberMat& Y) {
  Eigen::LLT<FiberMat> llt(G);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("spd_metric base point", 0);
  const FiberMat a = llt.solve(X), b = llt.solve(Y);
  return (a * b).trace();
}

MapField::MapField(const FiberMetricField& G)
    : ComponentArray(G), target_(TargetSpace::spd(G.rank())) {}

FiberMat MapField::matrix(std::size_t p) const {
  if (target_.kind != TargetSpace::Kind::spd) throw DomainError("MapField::matrix needs an SPD target");
  return load_packed(*this, target_.rank, p);
}

void MapField::set_matrix(std::size_t p, const FiberMat& M) {
  if (target_.kind != TargetSpace::Kind::spd)
    throw DomainError("MapField::set_matrix needs an SPD target");
  store_packed(*this, target_.rank, p, M);
}

FiberMetricField MapField::as_fiber_metric() const {
  if (target_.kind != TargetSpace::Kind::spd) throw DomainError("as_fiber_metric needs an SPD target");
  FiberMetricField G(grid_, target_.rank);
  G.raw() = data_;
  return G;
}

MapField tension_field(const MapField& phi, const MetricState& m) {
  phi.require_grid(m.grid(), "tension_field");
  const int n = m.dim(), nc = phi.components();
  const ComponentArray d = first_partials(phi);
  const ComponentArray dd = second_partials(phi, d);
  MapField out(phi.grid(), phi.target());
  // componentwise Laplacian
  for (std::size_t p = 0; p < phi.points(); ++p)
    for (int c = 0; c < nc; ++c) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double v = dd.at(sym_index(a, b, n) * nc + c, p);
          for (int k = 0; k < n; ++k) v -= m.gamma(k, a, b, p) * d.at(k * nc + c, p);
          s += m.g_inv(a, b, p) * v;
        }
      out.at(c, p) = s;
    }
  if (phi.target().kind == TargetSpace::Kind::euclidean) return out;

  const int N = phi.target().rank;
  for (std::size_t p = 0; p < phi.points(); ++p) {
    const FiberMat Gi = spd_inverse(phi.matrix(p), p);
    FiberMat dG[kMaxDim];
    for (int a = 0; a < n; ++a) dG[a] = load_packed(d, N, p, a * nc);
    FiberMat q = FiberMat::Zero(N, N);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) q += m.g_inv(a, b, p) * dG[a] * Gi * dG[b];
    FiberMat t = out.matrix(p) - q;
    out.set_matrix(p, t);
  }
  return out;
}

SymTensor2Field pullback_form(const MapField& phi) {
  const int n = phi.grid().dim(), nc = phi.components();
  const ComponentArray d = first_partials(phi);
  SymTensor2Field out(phi.grid());
  if (phi.target().kind == TargetSpace::Kind::euclidean) {
    for (std::size_t p = 0; p < phi.points(); ++p)
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          double s = 0.0;
          for (int c = 0; c < nc; ++c) s += d.at(a * nc + c, p) * d.at(b * nc + c, p);
          out(a, b, p) = s;
        }
    return out;
  }
  const int N = phi.target().rank;
  for (std::size_t p = 0; p < phi.points(); ++p) {
    const FiberMat Gi = spd_inverse(phi.matrix(p), p);
    FiberMat u[kMaxDim];
    for (int a = 0; a < n; ++a) u[a] = Gi * load_packed(d, N, p, a * nc);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) out(a, b, p) = (u[a] * u[b]).trace();
  }
  return out;
}

SymTensor2Field fiber_metric_energy_term(const FiberMetricField& G) {
  const int n = G.grid().dim(), N = G.rank(), nc = G.components();
  require_rank(N);
  const ComponentArray d = first_partials(G);
  SymTensor2Field out(G.grid());
  for (std::size_t p = 0; p < G.points(); ++p) {
    const FiberMat Gi = spd_inverse(load_packed(G, N, p), p);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double s = 0.0;
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
              for (int l = 0; l < N; ++l)
                s += Gi(i, k) * Gi(j, l) * d.at(a * nc + sym_index(i, j, N), p) *
                     d.at(b * nc + sym_index(k, l, N), p);
        out(a, b, p) = 0.5 * s;
      }
  }
  return out;
}

CouplingFit fit_fiber_coupling(const FiberMetricField& G) {
  const SymTensor2Field E = fiber_metric_energy_term(G);
  const SymTensor2Field P = pullback_form(MapField(G));
  double ep = 0.0, pp = 0.0;
  for (std::size_t i = 0; i < E.raw().size(); ++i) {
    ep += E.raw()[i] * P.raw()[i];
    pp += P.raw()[i] * P.raw()[i];
  }
  CouplingFit fit;
  if (pp == 0.0) return fit;
  fit.c = ep / (2.0 * pp);
  for (std::size_t i = 0; i < E.raw().size(); ++i)
    fit.residual = std::max(fit.residual, std::abs(E.raw()[i] - 2.0 * fit.c * P.raw()[i]));
  return fit;
}

FiberMetricField fiber_metric_rhs(const FiberMetricField& G, const VecOneFormField& A,
                                  const MetricState& m) {
  G.require_grid(m.grid(), "fiber_metric_rhs");
  A.require_grid(m.grid(), "fiber_metric_rhs");
  const int n = m.dim(), N = G.rank(), nc = G.components(), q = pair_count(n);
  require_rank(N);
  if (A.fiber_rank() != N) throw ShapeMismatch("fiber_metric_rhs: A and G fiber ranks differ");
  const ComponentArray d = first_partials(G);
  const ComponentArray dd = second_partials(G, d);
  const ComponentArray F = exterior_derivative_oneform(A);
  auto dA = [&](int k, int a, int b, std::size_t p) {
    if (a == b) return 0.0;
    const double v = F.at(k * q + pair_index(a, b, n), p);
    return a < b ? v : -v;
  };
  FiberMetricField out(G.grid(), N);
  for (std::size_t p = 0; p < G.points(); ++p) {
    const FiberMat Gm = load_packed(G, N, p);
    const FiberMat Gi = spd_inverse(Gm, p);
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double gab = m.g_inv(a, b, p);
            double lap = dd.at(sym_index(a, b, n) * nc + sym_index(i, j, N), p);
            for (int k = 0; k < n; ++k) lap -= m.gamma(k, a, b, p) * d.at(k * nc + sym_index(i, j, N), p);
            v += gab * lap;
            for (int k = 0; k < N; ++k)
              for (int l = 0; l < N; ++l)
                v -= gab * Gi(k, l) * d.at(a * nc + sym_index(i, k, N), p) *
                     d.at(b * nc + sym_index(l, j, N), p);
          }
        double quad = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              for (int e = 0; e < n; ++e) {
                const double gg = m.g_inv(a, c, p) * m.g_inv(b, e, p);
                if (gg == 0.0) continue;
                for (int k = 0; k < N; ++k)
                  for (int l = 0; l < N; ++l)
                    quad += gg * Gm(i, k) * Gm(j, l) * dA(k, a, b, p) * dA(l, c, e, p);
              }
        out(i, j, p) = v - 0.5 * quad;
      }
  }
  return out;
}

FiberMetricField fiber_curvature_quadratic(const FiberMetricField& G, const VecOneFormField& A,
                                           const MetricState& m) {
  G.require_grid(m.grid(), "fiber_curvature_quadratic");
  const int n = m.dim(), N = G.rank(), q = pair_count(n);
  require_rank(N);
  if (A.fiber_rank() != N) throw ShapeMismatch("fiber_curvature_quadratic: fiber ranks differ");
  const ComponentArray F = exterior_derivative_oneform(A);
  FiberMetricField out(G.grid(), N);
  for (std::size_t p = 0; p < G.points(); ++p) {
    const FiberMat Gm = load_packed(G, N, p);
    FiberMat M = FiberMat::Zero(N, N);
    // sum over ordered pairs (a, b), (c, d): 4 * sum over a < b, c < d
    for (int I = 0; I < q; ++I)
      for (int J = 0; J < q; ++J) {
        int a = 0, b = 0, c = 0, e = 0;
        for (int x = 0; x < n; ++x)
          for (int y = x + 1; y < n; ++y) {
            if (pair_index(x, y, n) == I) { a = x; b = y; }
            if (pair_index(x, y, n) == J) { c = x; e = y; }
          }
        const double w = m.g_inv(a, c, p) * m.g_inv(b, e, p) - m.g_inv(a, e, p) * m.g_inv(b, c, p);
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxFiber, 1> fI(N), fJ(N);
        for (int k = 0; k < N; ++k) {
          fI(k) = F.at(k * q + I, p);
          fJ(k) = F.at(k * q + J, p);
        }
        M += 2.0 * w * fI * fJ.transpose();
      }
    store_packed(out, N, p, 0.5 * Gm * M * Gm);
  }
  return out;
}

double check_modified_hmf_identity(const MapField& G, const VecOneFormField& A, const MetricState& m,
                                   bool trace_free) {
  if (G.target().kind != TargetSpace::Kind::spd)
    throw DomainError("check_modified_hmf_identity needs an SPD target");
  const FiberMetricField Gf = G.as_fiber_metric();
  const FiberMetricField lhs = fiber_metric_rhs(Gf, A, m);
  MapField rhs = tension_field(G, m);
  rhs -= fiber_curvature_quadratic(Gf, A, m);
  const int N = Gf.rank();
  double r = 0.0;
  for (std::size_t p = 0; p < G.points(); ++p) {
    FiberMat a = load_packed(lhs, N, p), b = rhs.matrix(p);
    if (trace_free) {
      const FiberMat Gm = G.matrix(p);
      const FiberMat Gi = spd_inverse(Gm, p);
      a -= (Gi * a).trace() / N * Gm;
      b -= (Gi * b).trace() / N * Gm;
    }
    r = std::max(r, (a - b).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace rflab
