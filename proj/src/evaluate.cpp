#include "lsngc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "lsngc/baselines.hpp"
#include "lsngc/causality.hpp"
#include "lsngc/embedding.hpp"
#include "lsngc/errors.hpp"

namespace lsngc {

namespace {

void check_same_size(const Matrix& scores, const AdjacencyMatrix& truth) {
    if (scores.rows() != truth.size() || scores.cols() != truth.size())
        throw ShapeMismatch("score matrix " + std::to_string(scores.rows()) + "x" +
                            std::to_string(scores.cols()) + " does not match truth of size " +
                            std::to_string(truth.size()));
}

} // namespace

double roc_auc(const Matrix& scores, const AdjacencyMatrix& truth) {
    check_same_size(scores, truth);
    const std::size_t n = truth.size();

    // Mid-rank formulation: AUC = (rank-sum of positives - n1(n1+1)/2) / (n1*n0),
    // identical to pair counting with ties at 0.5.
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < n; ++r) {
            if (s == r) continue;
            values.push_back(scores(s, r));
            labels.push_back(truth.edges(s, r) != 0.0 ? 1 : 0);
        }
    const std::size_t m = values.size();
    const std::size_t n1 = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n0 = m - n1;
    if (n1 == 0 || n0 == 0)
        throw DegenerateTruth("truth needs at least one edge and one non-edge off-diagonal");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0; // 1-based
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += mid_rank;
        i = j + 1;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

std::pair<double, double> sens_spec(const Matrix& mask, const AdjacencyMatrix& truth) {
    check_same_size(mask, truth);
    const std::size_t n = truth.size();
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < n; ++r) {
            if (s == r) continue;
            const bool edge = truth.edges(s, r) != 0.0;
            const bool hit = mask(s, r) != 0.0;
            if (edge && hit) ++tp;
            else if (edge) ++fn;
            else if (hit) ++fp;
            else ++tn;
        }
    if (tp + fn == 0 || tn + fp == 0)
        throw DegenerateTruth("truth needs at least one edge and one non-edge off-diagonal");
    return {static_cast<double>(tp) / static_cast<double>(tp + fn),
            static_cast<double>(tn) / static_cast<double>(tn + fp)};
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw BadConfig("box_stats needs at least one value");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();

    const auto quantile = [&](double p) {
        const double h = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = static_cast<std::size_t>(std::ceil(h));
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };

    BoxStats stats;
    stats.q1 = quantile(0.25);
    stats.median = quantile(0.5);
    stats.q3 = quantile(0.75);
    const double iqr = stats.q3 - stats.q1;
    const double lo_fence = stats.q1 - 1.5 * iqr;
    const double hi_fence = stats.q3 + 1.5 * iqr;
    stats.whisker_low = stats.q3;
    stats.whisker_high = stats.q1;
    for (double v : values) {
        if (v >= lo_fence) {
            stats.whisker_low = v;
            break;
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        if (values[i] <= hi_fence) {
            stats.whisker_high = values[i];
            break;
        }
    }
    return stats;
}

Method method_from_string(const std::string& name) {
    if (name == "lsngc") return Method::lsngc;
    if (name == "lm") return Method::lm;
    throw BadConfig("unknown method '" + name + "' (expected lsngc or lm)");
}

std::string method_to_string(Method method) {
    return method == Method::lsngc ? "lsngc" : "lm";
}

std::vector<BenchmarkReport> run_benchmark(const BenchmarkRequest& request) {
    if (request.runs < 1) throw BadConfig("runs must be >= 1");
    if (request.lengths.empty()) throw BadConfig("need at least one length");
    request.config.validate();

    std::vector<BenchmarkReport> reports;
    for (const int t : request.lengths) {
        BenchmarkReport report;
        report.network = model_to_string(request.network.model);
        report.method = method_to_string(request.method);
        report.t = t;

        int reserve_counter = 0;
        for (int run = 0; run < request.runs; ++run) {
            SimulationSpec spec = request.network;
            spec.t = t;
            spec.seed = request.network.seed + static_cast<std::uint64_t>(run);

            Simulation sim;
            for (;;) {
                try {
                    sim = simulate(spec);
                    break;
                } catch (const DivergedTrajectory&) {
                    if (reserve_counter >= 10) throw;
                    spec.seed = request.network.seed +
                                static_cast<std::uint64_t>(request.runs + reserve_counter);
                    ++reserve_counter;
                }
            }

            RunConfig config = request.config;
            config.seed = request.config.seed + static_cast<std::uint64_t>(run);

            RecoveryScore score;
            if (request.method == Method::lsngc) {
                const AffinityMatrix affinity = lsngc_affinity(sim.ensemble, config);
                score.auc = roc_auc(log_transform(affinity, config.epsilon_log), sim.truth);
                const auto [sens, spec_v] = sens_spec(affinity.significant, sim.truth);
                score.sensitivity = sens;
                score.specificity = spec_v;
            } else {
                const int d = select_lag(normalize(sim.ensemble), config);
                const auto scores =
                    cross_map_score(sim.ensemble, d, d + 1, config.workers);
                score.auc = roc_auc(scores.score, sim.truth);
                if (request.lm_surrogates > 0) {
                    const auto sig =
                        lm_significance(sim.ensemble, scores, request.lm_surrogates,
                                        config.alpha, config.seed, config.workers);
                    const auto [sens, spec_v] = sens_spec(sig.significant, sim.truth);
                    score.sensitivity = sens;
                    score.specificity = spec_v;
                } else {
                    score.sensitivity = std::numeric_limits<double>::quiet_NaN();
                    score.specificity = std::numeric_limits<double>::quiet_NaN();
                }
            }
            score.combined = 0.5 * (score.sensitivity + score.specificity);
            report.per_run.push_back(score);
        }
        report.redraws = reserve_counter;

        std::vector<double> aucs, sens, specs;
        for (const auto& s : report.per_run) {
            aucs.push_back(s.auc);
            if (std::isfinite(s.sensitivity)) sens.push_back(s.sensitivity);
            if (std::isfinite(s.specificity)) specs.push_back(s.specificity);
        }
        report.auc = box_stats(aucs);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        report.sensitivity = sens.empty() ? BoxStats{nan, nan, nan, nan, nan} : box_stats(sens);
        report.specificity = specs.empty() ? BoxStats{nan, nan, nan, nan, nan} : box_stats(specs);
        reports.push_back(std::move(report));
    }
    return reports;
}

namespace {

nlohmann::json box_to_json(const BoxStats& b) {
    return {{"median", b.median},
            {"q1", b.q1},
            {"q3", b.q3},
            {"whisker_low", b.whisker_low},
            {"whisker_high", b.whisker_high}};
}

// Published kernel Granger causality medians for comparison; that method is
// not implemented here, so they ride along as annotations only.
double kgc_reference_median(const std::string& network) {
    if (network == "five_linear") return 0.82;
    if (network == "zachary_directed") return 0.52;
    if (network == "zachary_undirected") return 0.51;
    return -1.0;
}

} // namespace

void write_reports(const std::vector<BenchmarkReport>& reports, const std::string& json_path,
                   const std::string& csv_path) {
    nlohmann::json array = nlohmann::json::array();
    for (const auto& report : reports) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& s : report.per_run)
            runs.push_back({{"auc", s.auc},
                            {"sensitivity", s.sensitivity},
                            {"specificity", s.specificity},
                            {"combined", s.combined}});
        nlohmann::json entry = {{"network", report.network},
                                {"method", report.method},
                                {"T", report.t},
                                {"auc", box_to_json(report.auc)},
                                {"sensitivity", box_to_json(report.sensitivity)},
                                {"specificity", box_to_json(report.specificity)},
                                {"redraws", report.redraws},
                                {"per_run", runs}};
        const double kgc = kgc_reference_median(report.network);
        if (kgc > 0.0) entry["kgc_reference_median"] = kgc;
        array.push_back(std::move(entry));
    }
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot open '" + json_path + "' for writing");
    out << array.dump(2) << '\n';
    if (!out) throw IoError("write to '" + json_path + "' failed");

    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot open '" + csv_path + "' for writing");
    csv << "network,method,T,run,auc,sensitivity,specificity\n";
    for (const auto& report : reports)
        for (std::size_t run = 0; run < report.per_run.size(); ++run) {
            const auto& s = report.per_run[run];
            csv << report.network << ',' << report.method << ',' << report.t << ',' << run << ','
                << s.auc << ',' << s.sensitivity << ',' << s.specificity << '\n';
        }
    if (!csv) throw IoError("write to '" + csv_path + "' failed");
}

} // namespace lsngc
