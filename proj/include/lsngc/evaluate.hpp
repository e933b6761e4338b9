#pragma once

#include <string>
#include <vector>

#include "lsngc/core.hpp"
#include "lsngc/simulate.hpp"

namespace lsngc {

struct RecoveryScore {
    double auc = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double combined = 0.0; // (sensitivity + specificity) / 2
};

/// Boxplot summary: median and quartiles by linear interpolation between
/// order statistics, whiskers at the most extreme samples within 1.5 IQR of
/// the box.
struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
};

BoxStats box_stats(std::vector<double> values);

struct BenchmarkReport {
    std::string network;
    std::string method;
    int t = 0;
    std::vector<RecoveryScore> per_run;
    BoxStats auc;
    BoxStats sensitivity;
    BoxStats specificity;
    int redraws = 0; // diverged simulations replaced from the reserve seeds
};

/// Mann-Whitney AUC over the N(N-1) off-diagonal entries, ties counted 0.5.
/// Throws DegenerateTruth when the off-diagonal labels are all identical.
double roc_auc(const Matrix& scores, const AdjacencyMatrix& truth);

/// (TP/(TP+FN), TN/(TN+FP)) over the off-diagonal cells.
std::pair<double, double> sens_spec(const Matrix& mask, const AdjacencyMatrix& truth);

enum class Method { lsngc, lm };
Method method_from_string(const std::string& name);
std::string method_to_string(Method method);

struct BenchmarkRequest {
    SimulationSpec network;      // seed is the base; runs use seed+0..seed+runs-1
    Method method = Method::lsngc;
    int runs = 50;
    std::vector<int> lengths = {500};
    RunConfig config;
    int lm_surrogates = 100;     // 0 skips the LM significance mask (sens/spec NaN)
};

/// One report per requested length. Diverged simulations are re-drawn from
/// reserve seeds (base + runs + counter, at most 10 per report cell).
std::vector<BenchmarkReport> run_benchmark(const BenchmarkRequest& request);

/// Report JSON array plus the flat CSV (network, method, T, run, auc,
/// sensitivity, specificity) used as the figure-data contract.
void write_reports(const std::vector<BenchmarkReport>& reports, const std::string& json_path,
                   const std::string& csv_path);

} // namespace lsngc
