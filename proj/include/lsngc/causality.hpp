#pragma once

#include <vector>

#include "lsngc/core.hpp"

namespace lsngc {

struct RegressionFit {
    Matrix weights;                   // R x P, row r maps feature rows to target row r
    std::vector<double> rss_per_target;
    std::size_t n_samples = 0;
    std::size_t n_params = 0;
    bool used_ridge = false;
};

/// Multi-target ordinary least squares of targets (R x n) on features
/// (P x n), no intercept: the GRBF activations already sum to 1 per sample,
/// so a constant column would be exactly collinear. Solved by Householder QR
/// with column pivoting; a trace-scaled ridge (lambda = 1e-8 * trace/P)
/// takes over when the pivoted R turns out rank-deficient.
RegressionFit least_squares_fit(const Matrix& features, const Matrix& targets);

/// F ratio ((rss_r - rss_u)/(p_u - p_r)) / (rss_u/(n - p_u - 1)).
/// A negative numerator is clamped to 0; *clamped (optional) reports it.
double f_statistic(double rss_r, double rss_u, int p_u, int p_r, int n, bool* clamped = nullptr);

/// Upper tail of the F(df1, df2) distribution via the regularized incomplete
/// beta function (continued fraction, absolute error <= 1e-10).
double f_pvalue(double f, int df1, int df2);

/// Benjamini-Hochberg: largest k with p_(k) <= k*alpha/m marks every
/// hypothesis with p <= p_(k); ties share fate; empty when no k qualifies.
std::vector<bool> fdr_mask(const std::vector<double>& p_values, double alpha);

/// The lsNGC pipeline: normalize, embed Z, global k-means codebook, then per
/// source s fit the unrestricted ([f(Z_s); g(W_s)]) and restricted (f(Z_s))
/// models on one-step-ahead targets and fill row s of the affinity matrix
/// with per-target F statistics, p-values and the FDR mask. The per-source
/// loop runs under OpenMP with config.workers threads (0 = all); results are
/// bit-identical for every worker count.
AffinityMatrix lsngc_affinity(const TimeSeriesEnsemble& ensemble, const RunConfig& config);

/// Plain-loop reference of the same per-source computation, kept for testing
/// the parallel path and as the benchmark baseline.
AffinityMatrix lsngc_affinity_serial(const TimeSeriesEnsemble& ensemble, const RunConfig& config);

/// Entrywise log(f + epsilon) of the F matrix, diagonal left as sentinel.
Matrix log_transform(const AffinityMatrix& matrix, double epsilon);

} // namespace lsngc
