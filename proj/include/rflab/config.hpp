#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rflab/flows.hpp"

namespace rflab {

struct GridSpec {
  int dim = 2;
  int points = 32;
  double period = 6.283185307179586;
  bool operator==(const GridSpec&) const = default;
};

/// Initial data: a named preset plus optional field files overriding parts of it.
struct InitialSpec {
  std::string preset = "fixed-point";  ///< fixed-point, sin-bump, random
  double amplitude = 0.1;
  int mode = 1;
  double offset = 0.0;  ///< constant added to phi (warped) or the map (hrf)
  std::string metric_file;
  std::string field_file;  ///< phi, A or H depending on the system
  std::string fiber_file;  ///< G (invariant)
  bool operator==(const InitialSpec&) const = default;
};

struct FlowSpec {
  double c0 = 0.0;
  double c_rate = 0.0;
  double s = 0.0;
  double lambda = 0.0;
  double m = 1.0;
  double mu = -0.5;
  bool gauge = false;
  std::string warped_form = "reduced";
  std::string target = "euclidean";  ///< hrf target kind: euclidean or spd
  int target_rank = 1;
  int fiber_rank = 1;  ///< N for the invariant system
  std::optional<double> synth_K;
  bool operator==(const FlowSpec&) const = default;
};

struct MonitorSpec {
  std::vector<std::string> names;  ///< sandwich, gradient_decay
  double margin = 1e-3;
  double c1 = 0.0;
  bool operator==(const MonitorSpec&) const = default;
};

struct SpectrumSpec {
  std::string block = "L0_metric";
  int count = 6;
  bool trace_free = false;
  bool force_iterative = false;
  bool operator==(const SpectrumSpec&) const = default;
};

struct ScenarioConfig {
  SystemKind system = SystemKind::hrf;
  GridSpec grid;
  InitialSpec init;
  FlowSpec flow;
  StepperConfig stepper;
  MonitorSpec monitors;
  SpectrumSpec spectrum;
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  bool operator==(const ScenarioConfig& o) const;
};

/// INI text with sections [scenario] [grid] [initial] [flow] [stepper] [monitors] [spectrum].
/// Unknown keys and unparsable values raise ConfigError naming "section.key".
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
/// Every key, doubles in shortest round-trip form.
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a of the serialized config, ignoring the output directory.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace rflab
