// rflab: simulate, spectrum and verify subcommands.
#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "rflab/config.hpp"
#include "rflab/estimates.hpp"
#include "rflab/field_io.hpp"
#include "rflab/scenario.hpp"
#include "rflab/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rflab;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { ok = 0, failed = 1, config_error = 2, numerical_error = 3 };

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

std::pair<double, double> eig_range(const PackedSymField& f) {
  const int n = f.rank();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  Eigen::MatrixXd M(n, n);
  for (std::size_t p = 0; p < f.points(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = f(i, j, p);
    const Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues();
    lo = std::min(lo, e(0));
    hi = std::max(hi, e(n - 1));
  }
  return {lo, hi};
}

std::pair<double, double> value_range(const ComponentArray& f) {
  const auto [lo, hi] = std::minmax_element(f.raw().begin(), f.raw().end());
  return {*lo, *hi};
}

std::string system_columns(SystemKind k) {
  switch (k) {
    case SystemKind::hrf: return "map_min,map_max";
    case SystemKind::warped: return "phi_min,phi_max,phi_avg";
    case SystemKind::invariant: return "A_sup,G_min_eig,G_max_eig";
    case SystemKind::connection: return "H_min,H_max";
  }
  return {};
}

/// Writes one trajectory row per observation and keeps the last good state.
class TrajectoryWriter : public FlowObserver {
 public:
  explicit TrajectoryWriter(const fs::path& path, SystemKind k) : out_(path) {
    out_ << "t,checksum,g_min_eig,g_max_eig," << system_columns(k) << "\n";
  }

  void observe(const FlowState& st) override {
    last = st;
    const auto [gl, gh] = eig_range(st.metric());
    out_ << csv_num(st.time) << ',' << hex(st.checksum()) << ',' << csv_num(gl) << ',' << csv_num(gh);
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, HrfState>) {
            const auto [a, b] = value_range(s.phi);
            out_ << ',' << csv_num(a) << ',' << csv_num(b);
          } else if constexpr (std::is_same_v<S, WarpedState>) {
            const auto [a, b] = value_range(s.phi);
            out_ << ',' << csv_num(a) << ',' << csv_num(b) << ',' << csv_num(average(s.phi, s.g));
          } else if constexpr (std::is_same_v<S, InvariantState>) {
            const auto [a, b] = eig_range(s.G);
            out_ << ',' << csv_num(sup_norm(s.A)) << ',' << csv_num(a) << ',' << csv_num(b);
          } else {
            const auto [a, b] = value_range(s.H);
            out_ << ',' << csv_num(a) << ',' << csv_num(b);
          }
        },
        st.fields);
    out_ << '\n';
    ++rows;
  }

  std::optional<FlowState> last;
  std::size_t rows = 0;

 private:
  std::ofstream out_;
};

void save_state(const fs::path& dir, const std::string& prefix, const FlowState& st) {
  save_field((dir / (prefix + "_g.field")).string(), st.metric());
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, HrfState>) {
          if (s.phi.target().kind == TargetSpace::Kind::spd) {
            save_field((dir / (prefix + "_map.field")).string(), s.phi.as_fiber_metric());
          } else {
            for (int l = 0; l < s.phi.target().rank; ++l) {
              ScalarField c(s.phi.grid());
              std::copy(s.phi.comp(l), s.phi.comp(l) + c.points(), c.raw().begin());
              save_field((dir / (prefix + "_map" + std::to_string(l) + ".field")).string(), c);
            }
          }
        } else if constexpr (std::is_same_v<S, WarpedState>) {
          save_field((dir / (prefix + "_phi.field")).string(), s.phi);
        } else if constexpr (std::is_same_v<S, InvariantState>) {
          save_field((dir / (prefix + "_A.field")).string(), s.A);
          save_field((dir / (prefix + "_G.field")).string(), s.G);
        } else {
          save_field((dir / (prefix + "_H.field")).string(), s.H);
        }
      },
      st.fields);
}

json manifest_base(const std::string& command, const ScenarioConfig& cfg) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["config_hash"] = hex(config_hash(cfg));
  m["seed"] = cfg.seed;
  m["system"] = to_string(cfg.system);
  return m;
}

ScenarioConfig load(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = load_config(path);
  if (!out.empty()) cfg.out_dir = out;
  if (seed) cfg.seed = *seed;
  return cfg;
}

int cmd_simulate(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg;
  FlowState init;
  FlowParams params;
  try {
    cfg = load(config, out, seed);
    init = initial_state(cfg);
    params = flow_params(cfg, init);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  }
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize_config(cfg));

  TrajectoryWriter traj(dir / "trajectory.csv", cfg.system);
  std::vector<std::unique_ptr<BoundMonitor>> monitors;
  for (const std::string& name : cfg.monitors.names) {
    if (name == "sandwich") monitors.push_back(std::make_unique<SandwichMonitor>(cfg.monitors.margin, cfg.monitors.c1));
    else monitors.push_back(std::make_unique<GradientDecayMonitor>(cfg.monitors.margin, cfg.monitors.c1));
  }
  std::vector<FlowObserver*> observers{&traj};
  for (auto& m : monitors) observers.push_back(m.get());

  json manifest = manifest_base("simulate", cfg);
  try {
    const Trajectory tr = run_flow(init, params, cfg.stepper, observers, false);
    for (auto& m : monitors) write_text(dir / ("monitor_" + m->name() + ".csv"), m->csv());
    if (traj.last) save_state(dir, "final", *traj.last);
    manifest["status"] = "ok";
    manifest["steps"] = tr.steps;
    manifest["t_final"] = tr.times.empty() ? 0.0 : tr.times.back();
    manifest["stop_reason"] = tr.stop_reason;
    manifest["final_checksum"] = tr.checksums.empty() ? std::string() : hex(tr.checksums.back());
    json mons = json::object();
    for (auto& m : monitors) mons[m->name()] = {{"violations", m->violations()}, {"worst_slack", m->worst_slack()}};
    manifest["monitors"] = mons;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    for (auto& m : monitors)
      std::cout << m->name() << ": " << m->violations() << " violations over " << m->rows().size() << " samples\n";
    std::cout << "simulate: " << tr.steps << " steps, " << traj.rows << " rows written to " << dir.string() << "\n";
    return ok;
  } catch (const Error& e) {
    std::ostringstream dump;
    dump << "error: " << e.what() << "\n";
    if (const auto* npd = dynamic_cast<const NotPositiveDefinite*>(&e)) dump << "point: " << npd->point() << "\n";
    if (traj.last) {
      dump << "last_good_time: " << csv_num(traj.last->time) << "\n";
      dump << "last_good_checksum: " << hex(traj.last->checksum()) << "\n";
      save_state(dir, "last_good", *traj.last);
    }
    write_text(dir / "diagnostic.txt", dump.str());
    for (auto& m : monitors) write_text(dir / ("monitor_" + m->name() + ".csv"), m->csv());
    manifest["status"] = "numerical failure";
    manifest["error"] = e.what();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cerr << "numerical failure: " << e.what() << " (see " << (dir / "diagnostic.txt").string() << ")\n";
    return numerical_error;
  }
}

int cmd_spectrum(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg;
  LinearOperator op;
  try {
    cfg = load(config, out, seed);
    op = scenario_operator(cfg, initial_state(cfg));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  }
  SpectrumOptions opt;
  opt.force_iterative = cfg.spectrum.force_iterative;
  opt.seed = cfg.seed;
  try {
    const SpectrumReport rep = spectrum(op, cfg.spectrum.count, opt);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const std::string text = format_report(rep);
    write_text(dir / "spectrum.txt", text);
    write_text(dir / "config.ini", serialize_config(cfg));
    json manifest = manifest_base("spectrum", cfg);
    manifest["status"] = rep.converged ? "ok" : "not converged";
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << text;
    return rep.converged ? ok : numerical_error;
  } catch (const Error& e) {
    std::cerr << "spectrum failed: " << e.what() << "\n";
    return numerical_error;
  }
}

int cmd_verify(const std::string& suite, const std::string& out) {
  std::vector<int> ids;
  try {
    ids = suite_criteria(suite);
  } catch (const DomainError& e) {
    std::cerr << e.what() << " (expected one of:";
    for (const auto& s : suite_names()) std::cerr << " " << s;
    std::cerr << ")\n";
    return config_error;
  }
  json report;
  report["suite"] = suite;
  report["version"] = kVersion;
  json checks = json::array();
  bool all = true;
  for (int id : ids) {
    const CheckResult r = run_criterion(id);
    std::cout << summary_line(r) << std::endl;
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    checks.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"metrics", m}});
    all = all && r.pass;
  }
  report["checks"] = checks;
  report["pass"] = all;
  const fs::path dir(out.empty() ? "." : out);
  fs::create_directories(dir);
  write_text(dir / "verify_report.json", report.dump(2) + "\n");
  return all ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rflab: numerical laboratory for extended Ricci flow systems"};
  app.require_subcommand(1);
  std::string config, out, suite;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "run a flow scenario");
  sim->add_option("--config", config, "scenario INI file")->required();
  sim->add_option("--out", out, "output directory (overrides scenario.out)");
  sim->add_option("--seed", seed, "RNG seed (overrides scenario.seed)");

  auto* spec = app.add_subcommand("spectrum", "eigenvalues of a linearized block");
  spec->add_option("--config", config, "scenario INI file")->required();
  spec->add_option("--out", out, "output directory (overrides scenario.out)");
  spec->add_option("--seed", seed, "Lanczos start vector seed");

  auto* ver = app.add_subcommand("verify", "run acceptance checks");
  ver->add_option("--suite", suite, "identities, linearization, estimates, spectra or all")->required();
  ver->add_option("--out", out, "directory for verify_report.json (default: current directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }

  try {
    if (*sim) return cmd_simulate(config, out, seed);
    if (*spec) return cmd_spectrum(config, out, seed);
    return cmd_verify(suite, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return numerical_error;
  }
}
