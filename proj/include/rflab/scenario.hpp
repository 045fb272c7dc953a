#pragma once

#include "rflab/config.hpp"
#include "rflab/stability.hpp"

namespace rflab {

Grid make_grid(const GridSpec& spec);

/// Initial state from the preset, then any field files on top of it.
///   fixed-point: flat metric, constant fields (phi = offset, A = 0, G = I, H = 0)
///   sin-bump:    the scalar part becomes offset + amplitude sin(mode x)
///   random:      smooth random perturbations of size amplitude (seeded)
FlowState initial_state(const ScenarioConfig& cfg);

/// FlowParams for the scenario; the DeTurck reference is the initial metric.
FlowParams flow_params(const ScenarioConfig& cfg, const FlowState& init);

/// Linearized block operator at the initial state of the scenario.
LinearOperator scenario_operator(const ScenarioConfig& cfg, const FlowState& init);

}  // namespace rflab
