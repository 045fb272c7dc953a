#include "rflab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "rflab/field_io.hpp"
#include "rflab/random_fields.hpp"

namespace rflab {

Grid make_grid(const GridSpec& spec) { return Grid::cube(spec.dim, spec.points, spec.period); }

namespace {

ScalarField bump(const Grid& grid, const InitialSpec& in, int axis) {
  ScalarField f(grid, in.offset);
  axis %= grid.dim();
  for (std::size_t p = 0; p < grid.size(); ++p)
    f[p] += in.amplitude * std::sin(2.0 * std::numbers::pi * in.mode * grid.coordinate(p, axis) / grid.period(axis));
  return f;
}

ScalarField scalar_part(const Grid& grid, const InitialSpec& in, Rng& rng, int axis = 0) {
  if (in.preset == "sin-bump") return bump(grid, in, axis);
  ScalarField f(grid, in.offset);
  if (in.preset == "random") f += random_smooth_scalar(grid, rng, in.mode, in.amplitude);
  return f;
}

// exp of a diagonal bump, so the result stays SPD for any amplitude
void spd_bump(PackedSymField& G, const ScalarField& s) {
  const int N = G.rank();
  G.set_identity();
  if (N < 2) {
    for (std::size_t p = 0; p < G.points(); ++p) G(0, 0, p) = std::exp(s[p]);
    return;
  }
  for (std::size_t p = 0; p < G.points(); ++p) {
    G(0, 0, p) = std::exp(s[p]);
    G(1, 1, p) = std::exp(-s[p]);
  }
}

template <class F>
void override_from(const std::string& path, const char* key, F& field) {
  if (path.empty()) return;
  try {
    std::ifstream is(path);
    if (!is) throw ConfigError(key, "cannot open '" + path + "'");
    FieldFile ff = read_field(is);
    ff.data.require_same_shape(field, key);
    field.raw() = ff.data.raw();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

FlowState initial_state(const ScenarioConfig& cfg) {
  const Grid grid = make_grid(cfg.grid);
  const InitialSpec& in = cfg.init;
  Rng rng(cfg.seed);

  SymTensor2Field g = SymTensor2Field::identity(grid);
  if (in.preset == "random") {
    SymTensor2Field d(grid);
    fill_random_smooth(d, rng, in.mode, 0.2 * in.amplitude);
    g += d;
  }
  override_from(in.metric_file, "initial.metric_file", g);

  FlowState st;
  switch (cfg.system) {
    case SystemKind::hrf: {
      const TargetSpace target =
          cfg.flow.target == "spd" ? TargetSpace::spd(cfg.flow.target_rank) : TargetSpace::euclidean(cfg.flow.target_rank);
      MapField phi(grid, target);
      if (target.kind == TargetSpace::Kind::euclidean) {
        for (int l = 0; l < target.rank; ++l) {
          const ScalarField s = scalar_part(grid, in, rng, l);
          std::copy(s.raw().begin(), s.raw().end(), phi.comp(l));
        }
      } else {
        InitialSpec bumped = in;
        bumped.offset = 0.0;
        const ScalarField s = in.preset == "fixed-point" ? ScalarField(grid) : scalar_part(grid, bumped, rng);
        FiberMetricField G(grid, target.rank);
        spd_bump(G, s);
        phi = MapField(G);
      }
      override_from(in.field_file, "initial.field_file", phi);
      st.fields = HrfState{g, phi};
      break;
    }
    case SystemKind::warped: {
      ScalarField phi = scalar_part(grid, in, rng);
      override_from(in.field_file, "initial.field_file", phi);
      st.fields = WarpedState{g, phi, cfg.flow.mu};
      break;
    }
    case SystemKind::invariant: {
      const int N = cfg.flow.fiber_rank;
      VecOneFormField A(grid, N);
      FiberMetricField G(grid, N);
      G.set_identity();
      if (in.preset == "sin-bump") {
        InitialSpec bumped = in;
        bumped.offset = 0.0;
        const ScalarField s = bump(grid, bumped, 1);
        std::copy(s.raw().begin(), s.raw().end(), A.comp(A.index(0, 0)));
      } else if (in.preset == "random") {
        fill_random_smooth(A, rng, in.mode, in.amplitude);
        spd_bump(G, random_smooth_scalar(grid, rng, in.mode, in.amplitude));
      }
      override_from(in.field_file, "initial.field_file", A);
      override_from(in.fiber_file, "initial.fiber_file", G);
      st.fields = InvariantState{g, A, G};
      break;
    }
    case SystemKind::connection: {
      ThreeFormField H(grid);
      if (in.preset != "fixed-point") {
        const ScalarField s = scalar_part(grid, in, rng);
        H.raw() = s.raw();
      } else {
        H.fill(in.offset);
      }
      override_from(in.field_file, "initial.field_file", H);
      st.fields = ConnectionState{g, H};
      break;
    }
  }
  try {
    st.validate();
  } catch (const Error& e) {
    throw ConfigError("initial", e.what());
  }
  return st;
}

FlowParams flow_params(const ScenarioConfig& cfg, const FlowState& init) {
  FlowParams p;
  p.c = {cfg.flow.c0, cfg.flow.c_rate};
  p.s = cfg.flow.s;
  p.lambda = cfg.flow.lambda;
  p.m = cfg.flow.m;
  p.warped_form = warped_form_from_string(cfg.flow.warped_form);
  if (cfg.flow.synth_K) p.synth = SyntheticCurvature::space_form(*cfg.flow.synth_K, cfg.grid.dim);
  if (const auto* w = std::get_if<WarpedState>(&init.fields)) p.phi_avg0 = average(w->phi, w->g);
  if (cfg.flow.gauge) p.deturck_reference = make_reference(init.metric());
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError("flow", e.what());
  }
  return p;
}

LinearOperator scenario_operator(const ScenarioConfig& cfg, const FlowState& init) {
  const Block block = block_from_string(cfg.spectrum.block);
  OperatorOptions opt;
  opt.trace_free = cfg.spectrum.trace_free;
  if (block == Block::L1_map) opt.fiber_rank = cfg.flow.target_rank;
  if (block == Block::L1_oneform || block == Block::L2_fiber) opt.fiber_rank = cfg.flow.fiber_rank;
  if (const auto* inv = std::get_if<InvariantState>(&init.fields)) opt.G0 = inv->G;
  std::optional<SyntheticCurvature> synth;
  if (cfg.flow.synth_K) synth = SyntheticCurvature::space_form(*cfg.flow.synth_K, cfg.grid.dim);
  try {
    return assemble_operator(cfg.system, block, make_reference(init.metric()), synth, cfg.flow.lambda, opt);
  } catch (const DomainError& e) {
    throw ConfigError("spectrum.block", e.what());
  }
}

}  // namespace rflab
