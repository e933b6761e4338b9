#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lsngc/core.hpp"

namespace lsngc {

/// Bivariate cross-mapping evidence. score(s, r) is the Pearson correlation
/// between x_s and its simplex-projection estimate built from x_r's delay
/// states: if x_r's attractor cross-predicts x_s well, x_s influenced x_r.
struct CrossMapScore {
    Matrix score; // N x N, diagonal sentinel
    int neighbor_count = 0;
    int embedding_dim = 0;
};

/// Simplex-projection cross-mapping over every ordered pair. k nearest
/// neighbors of each library state (Theiler exclusion of +-d samples, exact
/// duplicates handled by collapsing onto the zero-distance matches) supply
/// exponentially distance-weighted estimates of the simultaneous source
/// value. The per-pair loop runs under OpenMP with `workers` threads
/// (0 = all hardware threads).
CrossMapScore cross_map_score(const TimeSeriesEnsemble& ensemble, int d, int k, int workers = 0);

/// Plain-loop reference of the same computation, kept for testing the
/// parallel path and as the benchmark baseline.
CrossMapScore cross_map_score_serial(const TimeSeriesEnsemble& ensemble, int d, int k);

/// Iterative amplitude-adjusted Fourier transform surrogate: alternates
/// spectrum matching (impose the original's Fourier amplitudes) and amplitude
/// matching (rank-remap onto the original's sorted values) until the spectrum
/// error stops decreasing or max_iter is hit. Always ends on an amplitude
/// step, so the value multiset is exactly preserved.
std::vector<double> iaaft_surrogate(std::span<const double> series, int max_iter,
                                    std::uint64_t seed);
inline std::vector<double> iaaft_surrogate(std::span<const double> series, std::uint64_t seed) {
    return iaaft_surrogate(series, 100, seed);
}

struct LmSignificance {
    Matrix p_value;    // empirical (1 + #{null >= obs}) / (1 + count)
    Matrix significant; // FDR mask at alpha, diagonal sentinel
    std::vector<double> null_samples;
};

/// Null distribution from cross-mapping between IAAFT surrogates of randomly
/// chosen series pairs (the surrogates interact with nothing, so every null
/// draw is a no-coupling score), pooled across the ensemble.
/// Requires n_surrogates >= 100 for p-value resolution 0.01.
LmSignificance lm_significance(const TimeSeriesEnsemble& ensemble, const CrossMapScore& scores,
                               int n_surrogates, double alpha, std::uint64_t seed,
                               int workers = 0);

} // namespace lsngc
