#include "rflab/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rflab {

namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct PointMetric {
  int n;
  double g[kMaxDim][kMaxDim];
  double gi[kMaxDim][kMaxDim];
  PointMetric(const MetricState& m, std::size_t p) : n(m.dim()) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        g[a][b] = m.g(a, b, p);
        gi[a][b] = m.g_inv(a, b, p);
      }
  }
};

void require_christoffel_derivatives(const MetricState& m, const char* op) {
  if (!m.dchristoffel)
    throw DomainError(std::string(op) + ": metric state was built without Christoffel derivatives");
}

void require_metric_grid(const ComponentArray& f, const MetricState& m, const char* op) {
  f.require_grid(m.grid(), op);
}

}  // namespace

int pair_index(int a, int b, int n) {
  if (a > b) std::swap(a, b);
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}

double MetricState::riemann_at(int a, int b, int c, int d, std::size_t p) const {
  if (a == b || c == d) return 0.0;
  double s = 1.0;
  if (a > b) { std::swap(a, b); s = -s; }
  if (c > d) { std::swap(c, d); s = -s; }
  const int n = dim(), q = pair_count(n);
  return s * riemann.at(sym_index(pair_index(a, b, n), pair_index(c, d, n), q), p);
}

void require_spd(const PackedSymField& f, const char* what) {
  const int r = f.rank();
  for (std::size_t p = 0; p < f.points(); ++p) {
    SmallMat A(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) A(i, j) = f(i, j, p);
    if (!A.allFinite()) throw NotPositiveDefinite(what, p);
    Eigen::LLT<SmallMat> llt(A);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite(what, p);
  }
}

MetricState build_metric_state(const SymTensor2Field& g, MetricBuildOptions opt) {
  const Grid& grid = g.grid();
  const int n = grid.dim(), P = sym_size(n), q = pair_count(n);
  const std::size_t N = grid.size();

  MetricState m;
  m.g = g;
  m.g_inv = SymTensor2Field(grid);
  m.dg = first_partials(g);
  const ComponentArray dd = second_partials(g, m.dg);
  m.christoffel = ComponentArray(grid, n * P);
  m.riemann = ComponentArray(grid, sym_size(q));
  m.ricci = SymTensor2Field(grid);
  m.scalar = ScalarField(grid);
  m.vol_density = ScalarField(grid);
  if (opt.christoffel_derivatives) m.dchristoffel.emplace(grid, n * n * P);

  double asym = 0.0;
  double gi[3][3], dgl[3][3][3], ddl[3][3][3][3];
  double first[3][3][3], second[3][3][3];
  double Rp[6][6];
  for (std::size_t p = 0; p < N; ++p) {
    SmallMat A(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) A(a, b) = g(a, b, p);
    if (!A.allFinite()) throw NotPositiveDefinite("metric", p);
    Eigen::LLT<SmallMat> llt(A);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("metric", p);
    SmallMat Ai = llt.solve(SmallMat::Identity(n, n));
    double det = 1.0;
    for (int a = 0; a < n; ++a) det *= llt.matrixL()(a, a);
    m.vol_density[p] = det;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) gi[a][b] = 0.5 * (Ai(a, b) + Ai(b, a));
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) m.g_inv(a, b, p) = gi[a][b];

    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dgl[c][a][b] = m.dg.at(c * P + sym_index(a, b, n), p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            ddl[i][j][a][b] = dd.at(sym_index(i, j, n) * P + sym_index(a, b, n), p);

    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          first[c][a][b] = 0.5 * (dgl[a][c][b] + dgl[b][c][a] - dgl[c][a][b]);
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0.0;
          for (int c = 0; c < n; ++c) s += gi[k][c] * first[c][a][b];
          second[k][a][b] = s;
        }
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) m.christoffel.at(k * P + sym_index(a, b, n), p) = second[k][a][b];

    // R_abcd for a < b, c < d
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = c + 1; d < n; ++d) {
            double r = 0.5 * (ddl[b][c][a][d] + ddl[a][d][b][c] - ddl[a][c][b][d] - ddl[b][d][a][c]);
            for (int e = 0; e < n; ++e)
              r += second[e][b][c] * first[e][a][d] - second[e][b][d] * first[e][a][c];
            Rp[pair_index(a, b, n)][pair_index(c, d, n)] = r;
          }
    for (int I = 0; I < q; ++I)
      for (int J = I; J < q; ++J) {
        asym = std::max(asym, std::abs(Rp[I][J] - Rp[J][I]));
        const double v = 0.5 * (Rp[I][J] + Rp[J][I]);
        Rp[I][J] = Rp[J][I] = v;
        m.riemann.at(sym_index(I, J, q), p) = v;
      }
    auto R = [&](int a, int b, int c, int d) {
      if (a == b || c == d) return 0.0;
      double s = 1.0;
      if (a > b) { std::swap(a, b); s = -s; }
      if (c > d) { std::swap(c, d); s = -s; }
      return s * Rp[pair_index(a, b, n)][pair_index(c, d, n)];
    };
    double scal = 0.0;
    for (int a = 0; a < n; ++a)
      for (int c = a; c < n; ++c) {
        double s = 0.0;
        for (int b = 0; b < n; ++b)
          for (int d = 0; d < n; ++d) s += gi[b][d] * R(a, b, c, d);
        m.ricci(a, c, p) = s;
        scal += (a == c ? 1.0 : 2.0) * gi[a][c] * s;
      }
    m.scalar[p] = scal;

    if (opt.christoffel_derivatives) {
      for (int i = 0; i < n; ++i) {
        double dgi[3][3];
        for (int k = 0; k < n; ++k)
          for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) s -= gi[k][a] * dgl[i][a][b] * gi[b][c];
            dgi[k][c] = s;
          }
        for (int k = 0; k < n; ++k)
          for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
              double s = 0.0;
              for (int c = 0; c < n; ++c) {
                const double dfirst =
                    0.5 * (ddl[i][a][c][b] + ddl[i][b][c][a] - ddl[i][c][a][b]);
                s += dgi[k][c] * first[c][a][b] + gi[k][c] * dfirst;
              }
              m.dchristoffel->at((i * n + k) * P + sym_index(a, b, n), p) = s;
            }
      }
    }
  }
  m.riemann_asymmetry = asym;
  return m;
}

ScalarField laplacian_scalar(const ScalarField& f, const MetricState& m) {
  require_metric_grid(f, m, "laplacian_scalar");
  const int n = m.dim();
  const ComponentArray df = first_partials(f);
  const ComponentArray ddf = second_partials(f, df);
  ScalarField out(f.grid());
  for (std::size_t p = 0; p < f.points(); ++p) {
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double hab = ddf.at(sym_index(a, b, n), p);
        for (int k = 0; k < n; ++k) hab -= m.gamma(k, a, b, p) * df.at(k, p);
        s += m.g_inv(a, b, p) * hab;
      }
    out[p] = s;
  }
  return out;
}

SymTensor2Field hessian(const ScalarField& f, const MetricState& m) {
  require_metric_grid(f, m, "hessian");
  const int n = m.dim();
  const ComponentArray df = first_partials(f);
  const ComponentArray ddf = second_partials(f, df);
  SymTensor2Field out(f.grid());
  for (std::size_t p = 0; p < f.points(); ++p)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double hab = ddf.at(sym_index(a, b, n), p);
        for (int k = 0; k < n; ++k) hab -= m.gamma(k, a, b, p) * df.at(k, p);
        out(a, b, p) = hab;
      }
  return out;
}

ScalarField grad_norm_sq(const ScalarField& f, const MetricState& m) {
  require_metric_grid(f, m, "grad_norm_sq");
  const int n = m.dim();
  const ComponentArray df = first_partials(f);
  ScalarField out(f.grid());
  for (std::size_t p = 0; p < f.points(); ++p) {
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) s += m.g_inv(a, b, p) * df.at(a, p) * df.at(b, p);
    out[p] = s;
  }
  return out;
}

VecOneFormField exterior_derivative(const ScalarField& f) {
  VecOneFormField out(f.grid(), 1);
  for (int a = 0; a < f.grid().dim(); ++a) stencil::d1(f.comp(0), out.comp(a), f.grid(), a);
  return out;
}

ComponentArray covariant_hessian_sym(const SymTensor2Field& h, const MetricState& m) {
  require_metric_grid(h, m, "covariant_hessian_sym");
  require_christoffel_derivatives(m, "covariant_hessian_sym");
  const int n = m.dim(), P = sym_size(n);
  const ComponentArray dh = first_partials(h);
  const ComponentArray ddh = second_partials(h, dh);
  ComponentArray out(h.grid(), n * n * P);
  double H[3][3], DH[3][3][3], DDH[3][3][3][3], Gm[3][3][3], dG[3][3][3][3], T[3][3][3];
  for (std::size_t p = 0; p < h.points(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int s = sym_index(i, j, n);
        H[i][j] = h.at(s, p);
        for (int a = 0; a < n; ++a) {
          DH[a][i][j] = dh.at(a * P + s, p);
          for (int b = 0; b < n; ++b) DDH[a][b][i][j] = ddh.at(sym_index(a, b, n) * P + s, p);
        }
      }
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Gm[k][a][b] = m.gamma(k, a, b, p);
          for (int i = 0; i < n; ++i) dG[i][k][a][b] = m.dgamma(i, k, a, b, p);
        }
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double t = DH[b][i][j];
          for (int e = 0; e < n; ++e) t -= Gm[e][b][i] * H[e][j] + Gm[e][b][j] * H[i][e];
          T[b][i][j] = t;
        }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double v = DDH[a][b][i][j];
            for (int e = 0; e < n; ++e) {
              v -= dG[a][e][b][i] * H[e][j] + Gm[e][b][i] * DH[a][e][j] +
                   dG[a][e][b][j] * H[i][e] + Gm[e][b][j] * DH[a][i][e];
              v -= Gm[e][a][b] * T[e][i][j] + Gm[e][a][i] * T[b][e][j] + Gm[e][a][j] * T[b][i][e];
            }
            out.at((a * n + b) * P + sym_index(i, j, n), p) = v;
          }
  }
  return out;
}

ComponentArray covariant_hessian_oneform(const VecOneFormField& w, const MetricState& m) {
  require_metric_grid(w, m, "covariant_hessian_oneform");
  require_christoffel_derivatives(m, "covariant_hessian_oneform");
  const int n = m.dim(), N = w.fiber_rank(), nc = w.components();
  const ComponentArray dw = first_partials(w);
  const ComponentArray ddw = second_partials(w, dw);
  ComponentArray out(w.grid(), N * n * n * n);
  double W[3], DW[3][3], DDW[3][3][3], Gm[3][3][3], dG[3][3][3][3], T[3][3];
  for (std::size_t p = 0; p < w.points(); ++p) {
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Gm[k][a][b] = m.gamma(k, a, b, p);
          for (int i = 0; i < n; ++i) dG[i][k][a][b] = m.dgamma(i, k, a, b, p);
        }
    for (int f = 0; f < N; ++f) {
      for (int c = 0; c < n; ++c) {
        const int ci = w.index(f, c);
        W[c] = w.at(ci, p);
        for (int a = 0; a < n; ++a) {
          DW[a][c] = dw.at(a * nc + ci, p);
          for (int b = 0; b < n; ++b) DDW[a][b][c] = ddw.at(sym_index(a, b, n) * nc + ci, p);
        }
      }
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double t = DW[b][c];
          for (int e = 0; e < n; ++e) t -= Gm[e][b][c] * W[e];
          T[b][c] = t;
        }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            double v = DDW[a][b][c];
            for (int e = 0; e < n; ++e) {
              v -= dG[a][e][b][c] * W[e] + Gm[e][b][c] * DW[a][e];
              v -= Gm[e][a][b] * T[e][c] + Gm[e][a][c] * T[b][e];
            }
            out.at(((f * n + a) * n + b) * n + c, p) = v;
          }
    }
  }
  return out;
}

SymTensor2Field rough_laplacian(const SymTensor2Field& h, const MetricState& m) {
  const int n = m.dim(), P = sym_size(n);
  const ComponentArray H2 = covariant_hessian_sym(h, m);
  SymTensor2Field out(h.grid());
  for (std::size_t p = 0; p < h.points(); ++p)
    for (int s = 0; s < P; ++s) {
      double v = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) v += m.g_inv(a, b, p) * H2.at((a * n + b) * P + s, p);
      out.at(s, p) = v;
    }
  return out;
}

SymTensor2Field lichnerowicz_curvature_terms(const SymTensor2Field& h, const MetricState& m,
                                             const std::optional<SyntheticCurvature>& synth) {
  require_metric_grid(h, m, "lichnerowicz");
  const int n = m.dim();
  const bool syn = synth && synth->active();
  SymTensor2Field out(h.grid());
  double H[3][3], hu[3][3], Rc[3][3], Rcm[3][3];
  for (std::size_t p = 0; p < h.points(); ++p) {
    PointMetric pm(m, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H[i][j] = h(i, j, p);
    if (syn) {
      double tr = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tr += pm.gi[i][j] * H[i][j];
      const double K = synth->K, lam = synth->lambda();
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          out(i, j, p) = 2.0 * K * (pm.g[i][j] * tr - H[i][j]) - 2.0 * lam * H[i][j];
      continue;
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) s += pm.gi[a][c] * pm.gi[b][d] * H[c][d];
        hu[a][b] = s;
        Rc[a][b] = m.ricci(a, b, p);
      }
    // Rcm[i][k] = Rc_i^k
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += Rc[i][l] * pm.gi[l][k];
        Rcm[i][k] = s;
      }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) v += 2.0 * m.riemann_at(i, a, j, b, p) * hu[a][b];
        for (int k = 0; k < n; ++k) v -= Rcm[i][k] * H[k][j] + Rcm[j][k] * H[i][k];
        out(i, j, p) = v;
      }
  }
  return out;
}

SymTensor2Field lichnerowicz(const SymTensor2Field& h, const MetricState& m,
                             const std::optional<SyntheticCurvature>& synth) {
  SymTensor2Field out = rough_laplacian(h, m);
  out += lichnerowicz_curvature_terms(h, m, synth);
  return out;
}

VecOneFormField divergence_symtensor(const SymTensor2Field& h, const MetricState& m) {
  require_metric_grid(h, m, "divergence_symtensor");
  const int n = m.dim(), P = sym_size(n);
  const ComponentArray dh = first_partials(h);
  VecOneFormField out(h.grid(), 1);
  for (std::size_t p = 0; p < h.points(); ++p)
    for (int b = 0; b < n; ++b) {
      double v = 0.0;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
          double nab = dh.at(a * P + sym_index(c, b, n), p);
          for (int e = 0; e < n; ++e)
            nab -= m.gamma(e, a, c, p) * h(e, b, p) + m.gamma(e, a, b, p) * h(c, e, p);
          v -= m.g_inv(a, c, p) * nab;
        }
      out(0, b, p) = v;
    }
  return out;
}

SymTensor2Field gauge_linear_terms(const SymTensor2Field& h, const MetricState& m) {
  const int n = m.dim(), P = sym_size(n);
  const ComponentArray H2 = covariant_hessian_sym(h, m);
  auto at = [&](int a, int b, int i, int j, std::size_t p) {
    return H2.at((a * n + b) * P + sym_index(i, j, n), p);
  };
  SymTensor2Field out(h.grid());
  for (std::size_t p = 0; p < h.points(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int c = 0; c < n; ++c) {
            const double gac = m.g_inv(a, c, p);
            v -= gac * (at(i, a, c, j, p) + at(j, a, c, i, p));
            v += gac * at(i, j, a, c, p);
          }
        out(i, j, p) = v;
      }
  return out;
}

namespace {

enum class OneFormOp { hodge, delta_d, d_delta, rough };

VecOneFormField oneform_operator(const VecOneFormField& w, const MetricState& m, OneFormOp op) {
  const int n = m.dim(), N = w.fiber_rank();
  const ComponentArray W2 = covariant_hessian_oneform(w, m);
  VecOneFormField out(w.grid(), N);
  for (std::size_t p = 0; p < w.points(); ++p)
    for (int f = 0; f < N; ++f) {
      auto at = [&](int a, int b, int c) { return W2.at(((f * n + a) * n + b) * n + c, p); };
      for (int c = 0; c < n; ++c) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double gab = m.g_inv(a, b, p);
            switch (op) {
              case OneFormOp::hodge:
                v += gab * (at(c, a, b) + at(a, b, c) - at(a, c, b));
                break;
              case OneFormOp::delta_d:
                v -= gab * (at(a, b, c) - at(a, c, b));
                break;
              case OneFormOp::d_delta:
                v -= gab * at(c, a, b);
                break;
              case OneFormOp::rough:
                v += gab * at(a, b, c);
                break;
            }
          }
        out(f, c, p) = v;
      }
    }
  return out;
}

}  // namespace

VecOneFormField hodge_laplacian_oneform(const VecOneFormField& w, const MetricState& m) {
  return oneform_operator(w, m, OneFormOp::hodge);
}
VecOneFormField delta_d_oneform(const VecOneFormField& w, const MetricState& m) {
  return oneform_operator(w, m, OneFormOp::delta_d);
}
VecOneFormField d_delta_oneform(const VecOneFormField& w, const MetricState& m) {
  return oneform_operator(w, m, OneFormOp::d_delta);
}
VecOneFormField rough_laplacian_oneform(const VecOneFormField& w, const MetricState& m) {
  return oneform_operator(w, m, OneFormOp::rough);
}

ComponentArray exterior_derivative_oneform(const VecOneFormField& w) {
  const int n = w.grid().dim(), N = w.fiber_rank(), q = pair_count(n);
  const ComponentArray dw = first_partials(w);
  const int nc = w.components();
  ComponentArray out(w.grid(), N * q);
  for (int f = 0; f < N; ++f)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        double* o = out.comp(f * q + pair_index(a, b, n));
        const double* dab = dw.comp(a * nc + w.index(f, b));
        const double* dba = dw.comp(b * nc + w.index(f, a));
        for (std::size_t p = 0; p < w.points(); ++p) o[p] = dab[p] - dba[p];
      }
  return out;
}

ThreeFormField hodge_laplacian_threeform(const ThreeFormField& H, const MetricState& m) {
  if (H.grid().dim() != 3) throw DomainError("hodge_laplacian_threeform: dim must be 3");
  require_metric_grid(H, m, "hodge_laplacian_threeform");
  ScalarField f(H.grid());
  for (std::size_t p = 0; p < H.points(); ++p) f[p] = H[p] / m.vol_density[p];
  const ScalarField lf = laplacian_scalar(f, m);
  ThreeFormField out(H.grid());
  for (std::size_t p = 0; p < H.points(); ++p) out[p] = m.vol_density[p] * lf[p];
  return out;
}

SymTensor2Field torsion_square(const ThreeFormField& H, const MetricState& m) {
  if (H.grid().dim() != 3) throw DomainError("torsion_square: dim must be 3");
  require_metric_grid(H, m, "torsion_square");
  SymTensor2Field out(H.grid());
  for (std::size_t p = 0; p < H.points(); ++p) {
    // H_ipr = eps_ipr H_012 gives Hcal = 2 H_012^2 det(g^-1) g
    const double v = m.vol_density[p];
    const double c = 2.0 * H[p] * H[p] / (v * v);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) out(i, j, p) = c * m.g(i, j, p);
  }
  return out;
}

VectorField gradient_field(const ScalarField& f, const MetricState& m, double c) {
  require_metric_grid(f, m, "gradient_field");
  const int n = m.dim();
  const ComponentArray df = first_partials(f);
  const ComponentArray ddf = second_partials(f, df);
  VectorField X(f.grid());
  X.enable_jacobian();
  ComponentArray& J = X.jacobian();
  for (std::size_t p = 0; p < f.points(); ++p) {
    PointMetric pm(m, p);
    double v[3];
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += pm.gi[k][l] * df.at(l, p);
      v[k] = s;
      X(k, p) = c * s;
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        // d_i g^kl df_l + g^kl dd_il f, with d_i g^kl = -g^ka d_i g_ab g^bl
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s -= pm.gi[k][a] * m.dmetric(i, a, b, p) * v[b];
        for (int l = 0; l < n; ++l) s += pm.gi[k][l] * ddf.at(sym_index(i, l, n), p);
        J.at(i * n + k, p) = c * s;
      }
  }
  return X;
}

SymTensor2Field lie_derivative_metric(const VectorField& X, const MetricState& m) {
  require_metric_grid(X, m, "lie_derivative_metric");
  const int n = m.dim();
  ComponentArray J;
  if (X.has_jacobian()) {
    J = X.jacobian();
  } else {
    J = ComponentArray(X.grid(), n * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) stencil::d1(X.comp(k), J.comp(i * n + k), X.grid(), i);
  }
  SymTensor2Field out(X.grid());
  for (std::size_t p = 0; p < X.points(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = 0.0;
        for (int k = 0; k < n; ++k)
          v += X(k, p) * m.dmetric(k, i, j, p) + m.g(k, j, p) * J.at(i * n + k, p) +
               m.g(i, k, p) * J.at(j * n + k, p);
        out(i, j, p) = v;
      }
  return out;
}

ScalarField lie_derivative_scalar(const VectorField& X, const ScalarField& f) {
  X.require_grid(f.grid(), "lie_derivative_scalar");
  const int n = f.grid().dim();
  ScalarField out(f.grid());
  std::vector<double> d(f.points());
  for (int k = 0; k < n; ++k) {
    stencil::d1(f.comp(0), d.data(), f.grid(), k);
    for (std::size_t p = 0; p < f.points(); ++p) out[p] += X(k, p) * d[p];
  }
  return out;
}

VectorField deturck_field(const MetricState& m, const MetricState& m0) {
  m.g.require_grid(m0.grid(), "deturck_field");
  require_christoffel_derivatives(m, "deturck_field");
  require_christoffel_derivatives(m0, "deturck_field");
  const int n = m.dim();
  VectorField W(m.grid());
  W.enable_jacobian();
  ComponentArray& J = W.jacobian();
  double dG[3][3][3];
  for (std::size_t p = 0; p < m.grid().size(); ++p) {
    PointMetric pm(m, p);
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dG[k][a][b] = m.gamma(k, a, b, p) - m0.gamma(k, a, b, p);
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += pm.gi[a][b] * dG[k][a][b];
      W(k, p) = s;
    }
    for (int i = 0; i < n; ++i) {
      double dgi[3][3];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0.0;
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) s -= pm.gi[a][c] * m.dmetric(i, c, d, p) * pm.gi[d][b];
          dgi[a][b] = s;
        }
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            s += dgi[a][b] * dG[k][a][b] +
                 pm.gi[a][b] * (m.dgamma(i, k, a, b, p) - m0.dgamma(i, k, a, b, p));
        J.at(i * n + k, p) = s;
      }
    }
  }
  return W;
}

double l2_inner(const ScalarField& f, const ScalarField& k, const MetricState& m) {
  f.require_same_shape(k, "l2_inner");
  require_metric_grid(f, m, "l2_inner");
  double s = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) s += f[p] * k[p] * m.vol_density[p];
  return s * f.grid().cell_volume();
}

double l2_inner(const SymTensor2Field& h, const SymTensor2Field& k, const MetricState& m) {
  h.require_same_shape(k, "l2_inner");
  require_metric_grid(h, m, "l2_inner");
  const int n = m.dim();
  double s = 0.0;
  for (std::size_t p = 0; p < h.points(); ++p) {
    PointMetric pm(m, p);
    double v = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) v += pm.gi[a][c] * pm.gi[b][d] * h(a, b, p) * k(c, d, p);
    s += v * m.vol_density[p];
  }
  return s * h.grid().cell_volume();
}

double l2_inner(const VecOneFormField& w, const VecOneFormField& u, const MetricState& m) {
  w.require_same_shape(u, "l2_inner");
  require_metric_grid(w, m, "l2_inner");
  const int n = m.dim(), N = w.fiber_rank();
  double s = 0.0;
  for (std::size_t p = 0; p < w.points(); ++p) {
    double v = 0.0;
    for (int f = 0; f < N; ++f)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) v += m.g_inv(a, b, p) * w(f, a, p) * u(f, b, p);
    s += v * m.vol_density[p];
  }
  return s * w.grid().cell_volume();
}

double l2_inner(const ThreeFormField& H, const ThreeFormField& K, const MetricState& m) {
  H.require_same_shape(K, "l2_inner");
  require_metric_grid(H, m, "l2_inner");
  double s = 0.0;
  for (std::size_t p = 0; p < H.points(); ++p) {
    const double v = m.vol_density[p];
    s += 6.0 * H[p] * K[p] / (v * v) * v;
  }
  return s * H.grid().cell_volume();
}

}  // namespace rflab
