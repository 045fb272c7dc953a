#include "rflab/config.hpp"
#include "rflab/stability.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rflab {

namespace pt = boost::property_tree;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Reads keys from one section, remembering which were consumed.
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto c = root.get_child_optional(name_)) node_ = &*c;
  }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!node_) return std::nullopt;
    auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void get(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void get(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(key, *v);
  }

  void get(const std::string& key, std::optional<double>& out) {
    if (auto v = raw(key)) out = v->empty() ? std::nullopt : std::optional<double>(to_double(key, *v));
  }

  template <class I>
    requires std::integral<I>
  void get(const std::string& key, I& out) {
    if (auto v = raw(key)) {
      I x{};
      auto r = std::from_chars(v->data(), v->data() + v->size(), x);
      if (v->empty() || r.ec != std::errc() || r.ptr != v->data() + v->size())
        throw ConfigError(qualified(key), "expected an integer, got '" + *v + "'");
      out = x;
    }
  }

  void get(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else throw ConfigError(qualified(key), "expected true or false, got '" + *v + "'");
    }
  }

  void get(const std::string& key, std::vector<std::string>& out) {
    if (auto v = raw(key)) {
      out.clear();
      std::istringstream is(*v);
      std::string item;
      while (std::getline(is, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    }
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [k, v] : *node_)
      if (!seen_.count(k)) throw ConfigError(qualified(k), "unknown key");
  }

 private:
  double to_double(const std::string& key, const std::string& v) const {
    double x = 0.0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
      throw ConfigError(qualified(key), "expected a number, got '" + v + "'");
    return x;
  }

  std::string name_;
  const pt::ptree* node_ = nullptr;
  std::set<std::string> seen_;
};

template <class F>
void checked(const std::string& key, F f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

void validate(const ScenarioConfig& c) {
  if (c.grid.dim < 1 || c.grid.dim > 3) throw ConfigError("grid.dim", "must be 1, 2 or 3");
  if (c.grid.points < 8) throw ConfigError("grid.points", "need at least 8 points per axis");
  if (!(c.grid.period > 0.0)) throw ConfigError("grid.period", "must be positive");
  if (c.init.preset != "fixed-point" && c.init.preset != "sin-bump" && c.init.preset != "random")
    throw ConfigError("initial.preset", "unknown preset '" + c.init.preset + "'");
  if (c.system == SystemKind::connection && c.grid.dim != 3)
    throw ConfigError("grid.dim", "the connection system needs a 3-dimensional grid");
  if (c.flow.mu != -0.5 && c.flow.mu != 0.0 && c.flow.mu != 0.5)
    throw ConfigError("flow.mu", "must be -0.5, 0 or 0.5");
  if (!(c.flow.m > 0.0)) throw ConfigError("flow.m", "must be positive");
  if (c.flow.target != "euclidean" && c.flow.target != "spd")
    throw ConfigError("flow.target", "must be euclidean or spd");
  if (c.flow.target_rank < 1 || (c.flow.target == "spd" && c.flow.target_rank > kMaxFiber))
    throw ConfigError("flow.target_rank", "out of range");
  if (c.flow.fiber_rank < 1 || c.flow.fiber_rank > kMaxFiber) throw ConfigError("flow.fiber_rank", "out of range");
  if (!(c.flow.c0 >= 0.0)) throw ConfigError("flow.c0", "coupling must be non-negative");
  if (!(c.flow.c_rate >= 0.0)) throw ConfigError("flow.c_rate", "coupling must be non-increasing (rate >= 0)");
  if (c.flow.synth_K) {
    const double lam = *c.flow.synth_K * (c.grid.dim - 1);
    if (std::abs(lam - c.flow.lambda) > 1e-14 * (1.0 + std::abs(lam)))
      throw ConfigError("flow.lambda", "must equal synth_K (dim - 1)");
  }
  checked("flow.warped_form", [&] { warped_form_from_string(c.flow.warped_form); });
  checked("spectrum.block", [&] { block_from_string(c.spectrum.block); });
  if (!(c.stepper.dt > 0.0)) throw ConfigError("stepper.dt", "must be positive");
  if (!(c.stepper.cfl > 0.0)) throw ConfigError("stepper.cfl", "must be positive");
  if (!(c.stepper.t_end >= 0.0)) throw ConfigError("stepper.t_end", "must be non-negative");
  if (c.stepper.record_every < 1) throw ConfigError("stepper.record_every", "must be at least 1");
  for (const std::string& n : c.monitors.names)
    if (n != "sandwich" && n != "gradient_decay") throw ConfigError("monitors.names", "unknown monitor '" + n + "'");
  if (!c.monitors.names.empty() && c.system != SystemKind::warped)
    throw ConfigError("monitors.names", "monitors apply to warped runs only");
  if (!(c.monitors.margin >= 0.0)) throw ConfigError("monitors.margin", "must be non-negative");
  if (c.spectrum.count < 1) throw ConfigError("spectrum.count", "must be at least 1");
  if (c.out_dir.empty()) throw ConfigError("scenario.out", "must not be empty");
}

}  // namespace

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return system == o.system && grid == o.grid && init == o.init && flow == o.flow && stepper.dt == o.stepper.dt &&
         stepper.cfl == o.stepper.cfl && stepper.t_end == o.stepper.t_end &&
         stepper.record_every == o.stepper.record_every && monitors == o.monitors && spectrum == o.spectrum &&
         out_dir == o.out_dir && seed == o.seed;
}

ScenarioConfig parse_config(const std::string& text) {
  pt::ptree root;
  std::istringstream is(text);
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  static const std::set<std::string> sections = {"scenario", "grid",     "initial", "flow",
                                                 "stepper",  "monitors", "spectrum"};
  for (const auto& [k, v] : root) {
    if (sections.count(k)) continue;
    if (v.empty()) throw ConfigError(k, v.data().empty() ? "unknown section" : "key outside any section");
    throw ConfigError(k + "." + v.begin()->first, "unknown section");
  }

  ScenarioConfig c;
  Section sc(root, "scenario");
  std::string system = to_string(c.system);
  sc.get("system", system);
  checked("scenario.system", [&] { c.system = system_from_string(system); });
  sc.get("seed", c.seed);
  sc.get("out", c.out_dir);
  sc.reject_unknown();

  Section g(root, "grid");
  g.get("dim", c.grid.dim);
  g.get("points", c.grid.points);
  g.get("period", c.grid.period);
  g.reject_unknown();

  Section in(root, "initial");
  in.get("preset", c.init.preset);
  in.get("amplitude", c.init.amplitude);
  in.get("mode", c.init.mode);
  in.get("offset", c.init.offset);
  in.get("metric_file", c.init.metric_file);
  in.get("field_file", c.init.field_file);
  in.get("fiber_file", c.init.fiber_file);
  in.reject_unknown();

  Section f(root, "flow");
  f.get("c0", c.flow.c0);
  f.get("c_rate", c.flow.c_rate);
  f.get("s", c.flow.s);
  f.get("lambda", c.flow.lambda);
  f.get("m", c.flow.m);
  f.get("mu", c.flow.mu);
  f.get("gauge", c.flow.gauge);
  f.get("warped_form", c.flow.warped_form);
  f.get("target", c.flow.target);
  f.get("target_rank", c.flow.target_rank);
  f.get("fiber_rank", c.flow.fiber_rank);
  f.get("synth_K", c.flow.synth_K);
  f.reject_unknown();

  Section st(root, "stepper");
  st.get("dt", c.stepper.dt);
  st.get("cfl", c.stepper.cfl);
  st.get("t_end", c.stepper.t_end);
  st.get("record_every", c.stepper.record_every);
  st.reject_unknown();

  Section mo(root, "monitors");
  mo.get("names", c.monitors.names);
  mo.get("margin", c.monitors.margin);
  mo.get("c1", c.monitors.c1);
  mo.reject_unknown();

  Section sp(root, "spectrum");
  sp.get("block", c.spectrum.block);
  sp.get("count", c.spectrum.count);
  sp.get("trace_free", c.spectrum.trace_free);
  sp.get("force_iterative", c.spectrum.force_iterative);
  sp.reject_unknown();

  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "[scenario]\n"
     << "system = " << to_string(c.system) << "\n"
     << "seed = " << c.seed << "\n"
     << "out = " << c.out_dir << "\n\n";
  os << "[grid]\n"
     << "dim = " << c.grid.dim << "\n"
     << "points = " << c.grid.points << "\n"
     << "period = " << fmt(c.grid.period) << "\n\n";
  os << "[initial]\n"
     << "preset = " << c.init.preset << "\n"
     << "amplitude = " << fmt(c.init.amplitude) << "\n"
     << "mode = " << c.init.mode << "\n"
     << "offset = " << fmt(c.init.offset) << "\n"
     << "metric_file = " << c.init.metric_file << "\n"
     << "field_file = " << c.init.field_file << "\n"
     << "fiber_file = " << c.init.fiber_file << "\n\n";
  os << "[flow]\n"
     << "c0 = " << fmt(c.flow.c0) << "\n"
     << "c_rate = " << fmt(c.flow.c_rate) << "\n"
     << "s = " << fmt(c.flow.s) << "\n"
     << "lambda = " << fmt(c.flow.lambda) << "\n"
     << "m = " << fmt(c.flow.m) << "\n"
     << "mu = " << fmt(c.flow.mu) << "\n"
     << "gauge = " << fmt(c.flow.gauge) << "\n"
     << "warped_form = " << c.flow.warped_form << "\n"
     << "target = " << c.flow.target << "\n"
     << "target_rank = " << c.flow.target_rank << "\n"
     << "fiber_rank = " << c.flow.fiber_rank << "\n"
     << "synth_K = " << (c.flow.synth_K ? fmt(*c.flow.synth_K) : std::string()) << "\n\n";
  os << "[stepper]\n"
     << "dt = " << fmt(c.stepper.dt) << "\n"
     << "cfl = " << fmt(c.stepper.cfl) << "\n"
     << "t_end = " << fmt(c.stepper.t_end) << "\n"
     << "record_every = " << c.stepper.record_every << "\n\n";
  os << "[monitors]\nnames = ";
  for (std::size_t i = 0; i < c.monitors.names.size(); ++i) os << (i ? "," : "") << c.monitors.names[i];
  os << "\nmargin = " << fmt(c.monitors.margin) << "\n"
     << "c1 = " << fmt(c.monitors.c1) << "\n\n";
  os << "[spectrum]\n"
     << "block = " << c.spectrum.block << "\n"
     << "count = " << c.spectrum.count << "\n"
     << "trace_free = " << fmt(c.spectrum.trace_free) << "\n"
     << "force_iterative = " << fmt(c.spectrum.force_iterative) << "\n";
  return os.str();
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.out_dir = "-";
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace rflab
