#include "lsngc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lsngc/errors.hpp"
#include "lsngc/rng.hpp"

namespace lsngc {

namespace {

constexpr double kDivergenceBound = 1e6;

const std::map<std::string, NetworkModel>& model_table() {
    static const std::map<std::string, NetworkModel> table = {
        {"two_logistic", NetworkModel::two_logistic},
        {"three_fan_out", NetworkModel::three_fan_out},
        {"three_fan_in", NetworkModel::three_fan_in},
        {"five_linear", NetworkModel::five_linear},
        {"five_nonlinear", NetworkModel::five_nonlinear},
        {"zachary_undirected", NetworkModel::zachary_undirected},
        {"zachary_directed", NetworkModel::zachary_directed},
    };
    return table;
}

struct OverrideReader {
    const std::map<std::string, double>* map;
    mutable std::set<std::string> consumed;

    double get(const std::string& key, double fallback) const {
        const auto it = map->find(key);
        if (it == map->end()) return fallback;
        consumed.insert(key);
        return it->second;
    }

    void finish(const std::string& model) const {
        for (const auto& [key, value] : *map) {
            (void)value;
            if (!consumed.count(key))
                throw BadConfig("unknown override '" + key + "' for model " + model);
        }
    }
};

std::vector<double> initial_conditions(const SimulationSpec& spec, const OverrideReader& ov,
                                       std::size_t n) {
    Rng rng = make_rng(spec.seed, "simulate/init");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.next_double();
    const auto all = spec.overrides.find("init_all");
    if (all != spec.overrides.end()) {
        std::fill(x.begin(), x.end(), all->second);
        ov.consumed.insert("init_all");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::string key = "init" + std::to_string(i + 1);
        const auto it = spec.overrides.find(key);
        if (it != spec.overrides.end()) {
            x[i] = it->second;
            ov.consumed.insert(key);
        }
    }
    return x;
}

void check_bounded(const std::vector<double>& x, const SimulationSpec& spec, int step) {
    for (double v : x)
        if (!std::isfinite(v) || std::fabs(v) > kDivergenceBound)
            throw DivergedTrajectory(model_to_string(spec.model) + " diverged at step " +
                                     std::to_string(step) + " with seed " +
                                     std::to_string(spec.seed));
}

std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

Simulation package(const SimulationSpec& spec, const std::vector<std::vector<double>>& history,
                   Matrix truth_edges, bool directed) {
    const std::size_t n = history.front().size();
    Simulation sim;
    sim.ensemble.data = Matrix(n, static_cast<std::size_t>(spec.t));
    sim.ensemble.series_names = default_names(n);
    sim.ensemble.normalized = false;
    for (int t = 0; t < spec.t; ++t)
        for (std::size_t i = 0; i < n; ++i)
            sim.ensemble.data(i, static_cast<std::size_t>(t)) =
                history[static_cast<std::size_t>(spec.burn_in + t)][i];
    sim.truth.edges = std::move(truth_edges);
    sim.truth.directed = directed;
    return sim;
}

void validate_spec(const SimulationSpec& spec) {
    if (spec.t < 10) throw BadConfig("simulation needs T >= 10");
    if (spec.burn_in < 0) throw BadConfig("burn_in must be >= 0");
}

// x_j(t+1) = x_j(t) * (gamma_jj - sum_i gamma_ji x_i(t)); the growth constant
// doubles as the self-coupling inside the sum, logistic-map style.
Simulation run_coupled_logistic(const SimulationSpec& spec, const Matrix& gamma,
                                const OverrideReader& ov, Matrix truth) {
    const std::size_t n = gamma.rows();
    std::vector<double> x = initial_conditions(spec, ov, n);
    ov.finish(model_to_string(spec.model));

    const int total = spec.burn_in + spec.t;
    std::vector<std::vector<double>> history;
    history.reserve(static_cast<std::size_t>(total));
    history.push_back(x);
    std::vector<double> next(n);
    for (int step = 1; step < total; ++step) {
        for (std::size_t j = 0; j < n; ++j) {
            double rate = gamma(j, j);
            for (std::size_t i = 0; i < n; ++i) rate -= gamma(j, i) * x[i];
            next[j] = x[j] * rate;
        }
        x = next;
        check_bounded(x, spec, step);
        history.push_back(x);
    }
    return package(spec, history, std::move(truth), true);
}

} // namespace

NetworkModel model_from_string(const std::string& name) {
    const auto it = model_table().find(name);
    if (it == model_table().end()) throw BadConfig("unknown model '" + name + "'");
    return it->second;
}

std::string model_to_string(NetworkModel model) {
    for (const auto& [name, value] : model_table())
        if (value == model) return name;
    return "unknown";
}

const std::vector<std::string>& all_model_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, value] : model_table()) {
            (void)value;
            out.push_back(name);
        }
        return out;
    }();
    return names;
}

Simulation simulate(const SimulationSpec& spec) {
    switch (spec.model) {
        case NetworkModel::two_logistic: return gen_two_logistic(spec);
        case NetworkModel::three_fan_out: return gen_three_node(spec, ThreeNodeVariant::fan_out);
        case NetworkModel::three_fan_in: return gen_three_node(spec, ThreeNodeVariant::fan_in);
        case NetworkModel::five_linear: return gen_five_node(spec, FiveNodeVariant::linear);
        case NetworkModel::five_nonlinear:
            return gen_five_node(spec, FiveNodeVariant::nonlinear);
        case NetworkModel::zachary_undirected:
            return gen_zachary(spec, ZacharyVariant::undirected);
        case NetworkModel::zachary_directed: return gen_zachary(spec, ZacharyVariant::directed);
    }
    throw BadConfig("unhandled model");
}

Simulation gen_two_logistic(const SimulationSpec& spec) {
    validate_spec(spec);
    OverrideReader ov{&spec.overrides, {}};
    const double r1 = ov.get("r1", 3.7);
    const double r2 = ov.get("r2", 3.8);
    const double g12 = ov.get("gamma_12", 0.0);  // influence of x2 on x1
    const double g21 = ov.get("gamma_21", 0.32); // influence of x1 on x2

    Matrix gamma(2, 2);
    gamma(0, 0) = r1;
    gamma(0, 1) = g12;
    gamma(1, 0) = g21;
    gamma(1, 1) = r2;

    Matrix truth(2, 2);
    if (g21 != 0.0) truth(0, 1) = 1.0;
    if (g12 != 0.0) truth(1, 0) = 1.0;
    return run_coupled_logistic(spec, gamma, ov, std::move(truth));
}

Simulation gen_three_node(const SimulationSpec& spec, ThreeNodeVariant variant) {
    validate_spec(spec);
    OverrideReader ov{&spec.overrides, {}};
    Matrix gamma(3, 3);
    const bool fan_out = variant == ThreeNodeVariant::fan_out;
    gamma(0, 0) = ov.get("gamma_11", 4.0);
    gamma(1, 1) = ov.get("gamma_22", fan_out ? 3.1 : 3.6);
    gamma(2, 2) = ov.get("gamma_33", 2.12);
    gamma(1, 0) = ov.get("gamma_21", fan_out ? 0.21 : 0.0);
    gamma(2, 0) = ov.get("gamma_31", fan_out ? -0.636 : 0.636);
    gamma(2, 1) = ov.get("gamma_32", fan_out ? 0.0 : -0.636);
    gamma(0, 1) = ov.get("gamma_12", 0.0);
    gamma(0, 2) = ov.get("gamma_13", 0.0);
    gamma(1, 2) = ov.get("gamma_23", 0.0);

    Matrix truth(3, 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i)
            if (i != j && gamma(j, i) != 0.0) truth(i, j) = 1.0; // gamma_ji couples i -> j
    return run_coupled_logistic(spec, gamma, ov, std::move(truth));
}

Simulation gen_five_node(const SimulationSpec& spec, FiveNodeVariant variant) {
    validate_spec(spec);
    OverrideReader ov{&spec.overrides, {}};
    const double scale = ov.get("innovation_scale", 1.0);
    ov.finish(model_to_string(spec.model));

    const int total = spec.burn_in + spec.t;
    Rng rng = make_rng(spec.seed, "simulate/innovations");
    Matrix innovations(5, static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t)
        for (std::size_t i = 0; i < 5; ++i)
            innovations(i, static_cast<std::size_t>(t)) = scale * rng.next_gaussian();
    return gen_five_node_with_innovations(spec, variant, innovations);
}

Simulation gen_five_node_with_innovations(const SimulationSpec& spec, FiveNodeVariant variant,
                                          const Matrix& innovations) {
    validate_spec(spec);
    const int total = spec.burn_in + spec.t;
    if (innovations.rows() != 5 || innovations.cols() != static_cast<std::size_t>(total))
        throw ShapeMismatch("innovations must be 5 x (burn_in + T)");

    const bool nonlinear = variant == FiveNodeVariant::nonlinear;
    const double rt2 = std::sqrt(2.0);

    // Lags up to 3; everything before t = 0 is zero-initialized warm-up.
    auto lag = [&](const std::vector<std::vector<double>>& h, int t, std::size_t i,
                   int back) -> double {
        const int idx = t - back;
        return idx < 0 ? 0.0 : h[static_cast<std::size_t>(idx)][i];
    };

    std::vector<std::vector<double>> history;
    history.reserve(static_cast<std::size_t>(total));
    SimulationSpec bounded = spec;
    for (int t = 0; t < total; ++t) {
        const auto w = [&](std::size_t i) { return innovations(i, static_cast<std::size_t>(t)); };
        const double x1_lag2 = lag(history, t, 0, 2);
        const double drive = nonlinear ? x1_lag2 * x1_lag2 : x1_lag2;
        std::vector<double> x(5);
        x[0] = w(0) + 0.95 * rt2 * lag(history, t, 0, 1) - 0.9025 * lag(history, t, 0, 2);
        x[1] = w(1) + 0.5 * drive;
        x[2] = w(2) - 0.4 * lag(history, t, 0, 3);
        x[3] = w(3) - 0.5 * drive + 0.5 * rt2 * lag(history, t, 3, 1) +
               0.25 * rt2 * lag(history, t, 4, 1);
        x[4] = w(4) - 0.5 * rt2 * lag(history, t, 3, 1) + 0.5 * rt2 * lag(history, t, 4, 1);
        check_bounded(x, bounded, t);
        history.push_back(std::move(x));
    }

    Matrix truth(5, 5);
    truth(0, 1) = truth(0, 2) = truth(0, 3) = 1.0;
    truth(3, 4) = truth(4, 3) = 1.0;
    return package(spec, history, std::move(truth), true);
}

const std::vector<std::pair<int, int>>& zachary_edges() {
    static const std::vector<std::pair<int, int>> edges = [] {
        const std::vector<std::pair<int, int>> raw = {
            {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
            {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
            {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
            {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
            {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
            {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
            {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
            {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
            {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
            {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33},
        };
        // FNV-1a over the pair bytes; guards the constant against edits.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& [a, b] : raw) {
            h = (h ^ static_cast<std::uint64_t>(a)) * 0x100000001b3ULL;
            h = (h ^ static_cast<std::uint64_t>(b)) * 0x100000001b3ULL;
        }
        if (raw.size() != 78 || h != 0x6ae90f24f3712aa2ULL)
            throw Error("zachary edge list failed its checksum");
        return raw;
    }();
    return edges;
}

Simulation gen_zachary(const SimulationSpec& spec, ZacharyVariant variant) {
    validate_spec(spec);
    OverrideReader ov{&spec.overrides, {}};
    const bool directed = variant == ZacharyVariant::directed;
    const double a = ov.get("a", 1.8);
    const double s = ov.get("s", 0.01);
    const double c = ov.get("c", directed ? 0.05 : 0.025);

    constexpr std::size_t n = 34;
    const auto& edges = zachary_edges();

    // coupling(i, j) is the influence of node j on node i.
    Matrix coupling(n, n);
    Matrix truth(n, n);
    if (directed) {
        Rng topo = make_rng(spec.seed, "simulate/zachary-topology");
        std::vector<std::pair<int, int>> oriented; // (from, to)
        oriented.reserve(edges.size());
        for (const auto& [u, v] : edges) {
            if (topo.next_below(2) == 0)
                oriented.emplace_back(u, v);
            else
                oriented.emplace_back(v, u);
        }
        const auto perm = topo.permutation(edges.size());
        for (std::size_t k = 0; k < 5; ++k) {
            const auto& [from, to] = oriented[perm[k]];
            coupling(static_cast<std::size_t>(from), static_cast<std::size_t>(to)) = c;
            truth(static_cast<std::size_t>(to), static_cast<std::size_t>(from)) = 1.0;
        }
        for (const auto& [from, to] : oriented) {
            coupling(static_cast<std::size_t>(to), static_cast<std::size_t>(from)) = c;
            truth(static_cast<std::size_t>(from), static_cast<std::size_t>(to)) = 1.0;
        }
    } else {
        for (const auto& [u, v] : edges) {
            coupling(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = c;
            coupling(static_cast<std::size_t>(v), static_cast<std::size_t>(u)) = c;
            truth(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = 1.0;
            truth(static_cast<std::size_t>(v), static_cast<std::size_t>(u)) = 1.0;
        }
    }

    std::vector<double> x = initial_conditions(spec, ov, n);
    ov.finish(model_to_string(spec.model));

    Rng noise = make_rng(spec.seed, "simulate/noise");
    const int total = spec.burn_in + spec.t;
    std::vector<std::vector<double>> history;
    history.reserve(static_cast<std::size_t>(total));
    history.push_back(x);
    std::vector<double> next(n), local(n);
    for (int step = 1; step < total; ++step) {
        for (std::size_t i = 0; i < n; ++i) local[i] = 1.0 - a * x[i] * x[i];
        for (std::size_t i = 0; i < n; ++i) {
            // (1 - sum_j c_ij) f_i + sum_j c_ij f_j, written so the coupling
            // corrections vanish exactly when all states coincide.
            double acc = local[i];
            for (std::size_t j = 0; j < n; ++j) {
                if (coupling(i, j) == 0.0) continue;
                acc += coupling(i, j) * (local[j] - local[i]);
            }
            next[i] = acc + s * noise.next_gaussian();
        }
        x = next;
        check_bounded(x, spec, step);
        history.push_back(x);
    }
    return package(spec, history, std::move(truth), directed);
}

} // namespace lsngc
