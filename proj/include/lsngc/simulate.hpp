#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lsngc/core.hpp"

namespace lsngc {

enum class NetworkModel {
    two_logistic,
    three_fan_out,
    three_fan_in,
    five_linear,
    five_nonlinear,
    zachary_undirected,
    zachary_directed,
};

NetworkModel model_from_string(const std::string& name); // throws BadConfig
std::string model_to_string(NetworkModel model);
const std::vector<std::string>& all_model_names();

/// Coupling constants (and, for tests, initial conditions "init1".."initN" /
/// "init_all") can be overridden by name; unknown keys throw BadConfig.
struct SimulationSpec {
    NetworkModel model = NetworkModel::two_logistic;
    int t = 500;        // points kept after burn-in
    int burn_in = 50;
    std::uint64_t seed = 0;
    std::map<std::string, double> overrides;
};

struct Simulation {
    TimeSeriesEnsemble ensemble;
    AdjacencyMatrix truth;
};

/// Dispatch on spec.model. All generators are bit-deterministic in spec and
/// throw DivergedTrajectory (naming the seed) when a trajectory escapes.
Simulation simulate(const SimulationSpec& spec);

Simulation gen_two_logistic(const SimulationSpec& spec);

enum class ThreeNodeVariant { fan_out, fan_in };
Simulation gen_three_node(const SimulationSpec& spec, ThreeNodeVariant variant);

enum class FiveNodeVariant { linear, nonlinear };
Simulation gen_five_node(const SimulationSpec& spec, FiveNodeVariant variant);

/// Same recursion with caller-supplied innovations (5 x (burn_in + T)).
/// Exposed so tests can drive the system with a chosen noise stream.
Simulation gen_five_node_with_innovations(const SimulationSpec& spec, FiveNodeVariant variant,
                                          const Matrix& innovations);

enum class ZacharyVariant { undirected, directed };
Simulation gen_zachary(const SimulationSpec& spec, ZacharyVariant variant);

/// The canonical 34-node, 78-edge karate-club graph (0-indexed pairs).
/// Verified against an embedded checksum at first use.
const std::vector<std::pair<int, int>>& zachary_edges();

} // namespace lsngc
