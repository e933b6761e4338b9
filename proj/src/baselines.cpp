#include "lsngc/baselines.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <numeric>

#include "fft.hpp"
#include "lsngc/causality.hpp"
#include "lsngc/errors.hpp"
#include "lsngc/rng.hpp"

namespace lsngc {

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

struct NeighborTable {
    // For each library state: k neighbor state indices and their distances,
    // sorted nearest first.
    std::vector<std::vector<std::size_t>> index;
    std::vector<std::vector<double>> dist;
};

// Library of x_r: windows of length d ending at times d-1 .. T-1. Neighbor
// candidates exclude |i - j| <= d (Theiler window against trivial temporal
// matches, which also rules out self-matches).
NeighborTable build_neighbors(const double* series, std::size_t t, int d, int k) {
    const std::size_t m = t - static_cast<std::size_t>(d) + 1;
    NeighborTable table;
    table.index.resize(m);
    table.dist.resize(m);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        // Small k: insertion into a sorted buffer beats a heap.
        std::vector<std::size_t> best_idx;
        std::vector<double> best_dist;
        best_idx.reserve(static_cast<std::size_t>(k));
        best_dist.reserve(static_cast<std::size_t>(k));
        for (std::size_t j = 0; j < m; ++j) {
            const auto gap = i > j ? i - j : j - i;
            if (gap <= static_cast<std::size_t>(d)) continue;
            double sq = 0.0;
            for (int c = 0; c < d; ++c) {
                const double diff = series[i + static_cast<std::size_t>(c)] -
                                    series[j + static_cast<std::size_t>(c)];
                sq += diff * diff;
            }
            if (best_dist.size() == static_cast<std::size_t>(k) && sq >= best_dist.back())
                continue;
            auto pos = std::upper_bound(best_dist.begin(), best_dist.end(), sq);
            const auto at = static_cast<std::size_t>(pos - best_dist.begin());
            best_dist.insert(pos, sq);
            best_idx.insert(best_idx.begin() + static_cast<std::ptrdiff_t>(at), j);
            if (best_dist.size() > static_cast<std::size_t>(k)) {
                best_dist.pop_back();
                best_idx.pop_back();
            }
        }
        for (double& v : best_dist) v = std::sqrt(v);
        table.index[i] = std::move(best_idx);
        table.dist[i] = std::move(best_dist);
    }
    return table;
}

// Simplex weights w_i = exp(-dist_i / dist_1). When the nearest distance is
// zero the limit collapses all weight onto the exact matches; with every
// distance zero that is the documented uniform fallback.
void simplex_weights(const std::vector<double>& dist, std::vector<double>& w) {
    w.resize(dist.size());
    const double nearest = dist.empty() ? 0.0 : dist.front();
    if (nearest <= 0.0) {
        for (std::size_t i = 0; i < dist.size(); ++i) w[i] = dist[i] <= 0.0 ? 1.0 : 0.0;
        return;
    }
    for (std::size_t i = 0; i < dist.size(); ++i) w[i] = std::exp(-dist[i] / nearest);
}

CrossMapScore run_cross_map(const TimeSeriesEnsemble& ensemble, int d, int k, int workers,
                            bool parallel) {
    validate_ensemble(ensemble);
    if (d < 1) throw BadConfig("cross_map_score needs d >= 1");
    if (k < 1) throw BadConfig("cross_map_score needs k >= 1");
    const std::size_t n = ensemble.n_series();
    const std::size_t t = ensemble.n_points();
    if (t <= static_cast<std::size_t>(d + k))
        throw SeriesTooShort("cross-mapping needs T > d + k; got T=" + std::to_string(t));
    // Theiler exclusion removes up to 2d+1 candidates around each state.
    const std::size_t m = t - static_cast<std::size_t>(d) + 1;
    if (m <= static_cast<std::size_t>(2 * d + k))
        throw SeriesTooShort("too few library states for k neighbors with Theiler exclusion");

    std::vector<NeighborTable> tables(n);
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r)
            tables[static_cast<std::size_t>(r)] =
                build_neighbors(ensemble.data.row_ptr(static_cast<std::size_t>(r)), t, d, k);
    } else {
        for (std::size_t r = 0; r < n; ++r)
            tables[r] = build_neighbors(ensemble.data.row_ptr(r), t, d, k);
    }

    CrossMapScore result;
    result.score = Matrix(n, n, kDiagonalSentinel);
    result.neighbor_count = k;
    result.embedding_dim = d;

    const int offset = d - 1; // state j ends at time j + d - 1
    std::vector<double> w, estimate(m), truth_vals(m);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& table = tables[r];
        for (std::size_t s = 0; s < n; ++s) {
            if (s == r) continue;
            const double* xs = ensemble.data.row_ptr(s);
            for (std::size_t j = 0; j < m; ++j) {
                simplex_weights(table.dist[j], w);
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < table.index[j].size(); ++i) {
                    num += w[i] * xs[table.index[j][i] + static_cast<std::size_t>(offset)];
                    den += w[i];
                }
                estimate[j] = den > 0.0 ? num / den : 0.0;
                truth_vals[j] = xs[j + static_cast<std::size_t>(offset)];
            }
            result.score(s, r) = pearson(estimate, truth_vals);
        }
    }
    return result;
}

} // namespace

CrossMapScore cross_map_score(const TimeSeriesEnsemble& ensemble, int d, int k, int workers) {
    return run_cross_map(ensemble, d, k, workers, true);
}

CrossMapScore cross_map_score_serial(const TimeSeriesEnsemble& ensemble, int d, int k) {
    return run_cross_map(ensemble, d, k, 0, false);
}

std::vector<double> iaaft_surrogate(std::span<const double> series, int max_iter,
                                    std::uint64_t seed) {
    const std::size_t t = series.size();
    if (t < 8) throw SeriesTooShort("IAAFT needs T >= 8");

    std::vector<double> sorted_values(series.begin(), series.end());
    std::sort(sorted_values.begin(), sorted_values.end());

    const auto spectrum = detail::fft_real(std::vector<double>(series.begin(), series.end()));
    std::vector<double> target_amp(t);
    double amp_norm = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        target_amp[i] = std::abs(spectrum[i]);
        amp_norm += target_amp[i] * target_amp[i];
    }
    amp_norm = std::sqrt(amp_norm);

    Rng rng = make_rng(seed, "baselines/iaaft");
    const auto perm = rng.permutation(t);
    std::vector<double> current(t);
    for (std::size_t i = 0; i < t; ++i) current[i] = series[perm[i]];

    auto rank_remap = [&](const std::vector<double>& v) {
        std::vector<std::size_t> order(t);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> out(t);
        for (std::size_t rank = 0; rank < t; ++rank) out[order[rank]] = sorted_values[rank];
        return out;
    };

    auto current_spectrum = detail::fft_real(current);
    double prev_err = std::numeric_limits<double>::infinity();
    std::vector<double> result = rank_remap(current);

    for (int iter = 0; iter < max_iter; ++iter) {
        // Spectrum step: keep phases, impose the target amplitudes.
        std::vector<std::complex<double>> adjusted(t);
        for (std::size_t i = 0; i < t; ++i) {
            const double mag = std::abs(current_spectrum[i]);
            adjusted[i] = mag > 0.0 ? current_spectrum[i] * (target_amp[i] / mag)
                                    : std::complex<double>(target_amp[i], 0.0);
        }
        detail::fft(adjusted, true);
        std::vector<double> phase_matched(t);
        for (std::size_t i = 0; i < t; ++i) phase_matched[i] = adjusted[i].real();

        // Amplitude step: exact value multiset back.
        result = rank_remap(phase_matched);

        auto result_spectrum = detail::fft_real(result);
        double err = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            const double diff = std::abs(result_spectrum[i]) - target_amp[i];
            err += diff * diff;
        }
        err = amp_norm > 0.0 ? std::sqrt(err) / amp_norm : 0.0;
        if (err >= prev_err - 1e-14) break;
        prev_err = err;
        current_spectrum = std::move(result_spectrum);
    }
    return result;
}

LmSignificance lm_significance(const TimeSeriesEnsemble& ensemble, const CrossMapScore& scores,
                               int n_surrogates, double alpha, std::uint64_t seed, int workers) {
    validate_ensemble(ensemble);
    if (n_surrogates < 100)
        throw BadConfig("lm_significance needs >= 100 surrogate draws for 0.01 resolution");
    const std::size_t n = ensemble.n_series();
    if (scores.score.rows() != n || scores.score.cols() != n)
        throw ShapeMismatch("scores do not match the ensemble");
    const std::size_t t = ensemble.n_points();
    const int d = scores.embedding_dim;
    const int k = scores.neighbor_count;

    LmSignificance out;
    out.null_samples.assign(static_cast<std::size_t>(n_surrogates), 0.0);

    const int threads = workers > 0 ? workers : omp_get_max_threads();
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n_surrogates); ++j) {
        try {
            const auto draw = static_cast<std::uint64_t>(j);
            Rng pair_rng = make_rng(seed, "baselines/null-pair", draw);
            const std::size_t a = static_cast<std::size_t>(pair_rng.next_below(n));
            std::size_t b = static_cast<std::size_t>(pair_rng.next_below(n - 1));
            if (b >= a) ++b;

            TimeSeriesEnsemble pair;
            pair.data = Matrix(2, t);
            pair.series_names = {"surrogate_a", "surrogate_b"};
            const auto sa = iaaft_surrogate(
                std::span<const double>(ensemble.data.row_ptr(a), t), 100,
                derive_stream(seed, "baselines/iaaft-null", 2 * draw));
            const auto sb = iaaft_surrogate(
                std::span<const double>(ensemble.data.row_ptr(b), t), 100,
                derive_stream(seed, "baselines/iaaft-null", 2 * draw + 1));
            for (std::size_t i = 0; i < t; ++i) {
                pair.data(0, i) = sa[i];
                pair.data(1, i) = sb[i];
            }
            const auto null_score = cross_map_score_serial(pair, d, k);
            out.null_samples[static_cast<std::size_t>(j)] = null_score.score(0, 1);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    out.p_value = Matrix(n, n, kDiagonalSentinel);
    std::vector<double> sorted_null = out.null_samples;
    std::sort(sorted_null.begin(), sorted_null.end());
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < n; ++r) {
            if (s == r) continue;
            const double obs = scores.score(s, r);
            const auto geq = sorted_null.end() -
                             std::lower_bound(sorted_null.begin(), sorted_null.end(), obs);
            out.p_value(s, r) = (1.0 + static_cast<double>(geq)) /
                                (1.0 + static_cast<double>(n_surrogates));
        }

    std::vector<double> flat_p;
    flat_p.reserve(n * (n - 1));
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < n; ++r)
            if (s != r) flat_p.push_back(out.p_value(s, r));
    const auto mask = fdr_mask(flat_p, alpha);
    out.significant = Matrix(n, n, kDiagonalSentinel);
    std::size_t idx = 0;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < n; ++r)
            if (s != r) out.significant(s, r) = mask[idx++] ? 1.0 : 0.0;
    return out;
}

} // namespace lsngc
