#include "lsngc/causality.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "lsngc/embedding.hpp"
#include "lsngc/errors.hpp"
#include "lsngc/grbf.hpp"
#include "lsngc/rng.hpp"

namespace lsngc {

namespace {

Matrix transposed(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

// Householder QR with column pivoting of a (n x p), reflections applied to b
// (n x r) in lockstep. Returns false when the pivoted diagonal signals rank
// deficiency, leaving the ridge path to the caller.
bool pivoted_qr_solve(Matrix a, Matrix b, Matrix& weights_out) {
    const std::size_t n = a.rows();
    const std::size_t p = a.cols();
    const std::size_t r = b.cols();

    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> diag(p, 0.0);

    for (std::size_t j = 0; j < p; ++j) {
        // Pivot: remaining column with the largest trailing norm. p is tiny
        // (c_f + c_g), so recomputing beats norm downdating drift.
        std::size_t best = j;
        double best_norm = -1.0;
        for (std::size_t c = j; c < p; ++c) {
            double nrm = 0.0;
            for (std::size_t i = j; i < n; ++i) nrm += a(i, c) * a(i, c);
            if (nrm > best_norm) {
                best_norm = nrm;
                best = c;
            }
        }
        if (best != j) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a(i, j), a(i, best));
            std::swap(perm[j], perm[best]);
        }

        double norm_x = std::sqrt(best_norm);
        if (!(norm_x > 0.0)) {
            diag[j] = 0.0;
            continue;
        }
        const double alpha = a(j, j) >= 0.0 ? -norm_x : norm_x;
        std::vector<double> v(n - j);
        v[0] = a(j, j) - alpha;
        for (std::size_t i = j + 1; i < n; ++i) v[i - j] = a(i, j);
        double vsq = 0.0;
        for (double x : v) vsq += x * x;
        diag[j] = alpha;
        if (vsq <= 0.0) continue;
        const double scale = 2.0 / vsq;

        for (std::size_t c = j + 1; c < p; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i - j] * a(i, c);
            dot *= scale;
            for (std::size_t i = j; i < n; ++i) a(i, c) -= dot * v[i - j];
        }
        for (std::size_t c = 0; c < r; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i - j] * b(i, c);
            dot *= scale;
            for (std::size_t i = j; i < n; ++i) b(i, c) -= dot * v[i - j];
        }
        a(j, j) = alpha;
    }

    double max_diag = 0.0, min_diag = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p; ++j) {
        max_diag = std::max(max_diag, std::fabs(diag[j]));
        min_diag = std::min(min_diag, std::fabs(diag[j]));
    }
    if (!(max_diag > 0.0) || min_diag <= max_diag * 1e-10) return false;

    weights_out = Matrix(r, p);
    std::vector<double> y(p);
    for (std::size_t c = 0; c < r; ++c) {
        for (std::size_t j = p; j-- > 0;) {
            double acc = b(j, c);
            for (std::size_t k = j + 1; k < p; ++k) acc -= a(j, k) * y[k];
            y[j] = acc / diag[j];
        }
        for (std::size_t j = 0; j < p; ++j) weights_out(c, perm[j]) = y[j];
    }
    return true;
}

// (F F^T + lambda I) W^T = F B^T via Cholesky; lambda trace-scaled.
bool ridge_solve(const Matrix& features, const Matrix& targets, Matrix& weights_out) {
    const std::size_t p = features.rows();
    const std::size_t n = features.cols();
    const std::size_t r = targets.rows();

    Matrix gram(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double acc = 0.0;
            const double* fi = features.row_ptr(i);
            const double* fj = features.row_ptr(j);
            for (std::size_t t = 0; t < n; ++t) acc += fi[t] * fj[t];
            gram(i, j) = acc;
            gram(j, i) = acc;
        }
    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i) trace += gram(i, i);
    const double lambda = 1e-8 * (trace / static_cast<double>(p));
    for (std::size_t i = 0; i < p; ++i) gram(i, i) += lambda;

    // Cholesky, lower triangle in place.
    Matrix chol = gram;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = chol(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= chol(i, k) * chol(j, k);
            if (i == j) {
                if (!(acc > 0.0)) return false;
                chol(i, j) = std::sqrt(acc);
            } else {
                chol(i, j) = acc / chol(j, j);
            }
        }
    }

    weights_out = Matrix(r, p);
    std::vector<double> rhs(p), y(p);
    for (std::size_t tr = 0; tr < r; ++tr) {
        for (std::size_t i = 0; i < p; ++i) {
            double acc = 0.0;
            const double* fi = features.row_ptr(i);
            const double* bt = targets.row_ptr(tr);
            for (std::size_t t = 0; t < n; ++t) acc += fi[t] * bt[t];
            rhs[i] = acc;
        }
        for (std::size_t i = 0; i < p; ++i) {
            double acc = rhs[i];
            for (std::size_t k = 0; k < i; ++k) acc -= chol(i, k) * y[k];
            y[i] = acc / chol(i, i);
        }
        for (std::size_t i = p; i-- > 0;) {
            double acc = y[i];
            for (std::size_t k = i + 1; k < p; ++k) acc -= chol(k, i) * weights_out(tr, k);
            weights_out(tr, i) = acc / chol(i, i);
        }
    }
    return weights_out.all_finite();
}

} // namespace

RegressionFit least_squares_fit(const Matrix& features, const Matrix& targets) {
    const std::size_t p = features.rows();
    const std::size_t n = features.cols();
    const std::size_t r = targets.rows();
    if (targets.cols() != n)
        throw ShapeMismatch("features have " + std::to_string(n) + " samples, targets " +
                            std::to_string(targets.cols()));
    if (p == 0 || r == 0) throw ShapeMismatch("empty regression system");
    if (n < p)
        throw ShapeMismatch("need at least as many samples as parameters: n=" +
                            std::to_string(n) + ", p=" + std::to_string(p));

    RegressionFit fit;
    fit.n_samples = n;
    fit.n_params = p;

    if (!pivoted_qr_solve(transposed(features), transposed(targets), fit.weights)) {
        fit.used_ridge = true;
        if (!ridge_solve(features, targets, fit.weights))
            throw DegenerateSystem("regression system is singular even with ridge fallback");
    }
    if (!fit.weights.all_finite())
        throw DegenerateSystem("regression produced non-finite weights");

    fit.rss_per_target.assign(r, 0.0);
    for (std::size_t tr = 0; tr < r; ++tr) {
        const double* b = targets.row_ptr(tr);
        double rss = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double pred = 0.0;
            for (std::size_t i = 0; i < p; ++i) pred += fit.weights(tr, i) * features(i, t);
            const double resid = b[t] - pred;
            rss += resid * resid;
        }
        fit.rss_per_target[tr] = rss;
    }
    return fit;
}

double f_statistic(double rss_r, double rss_u, int p_u, int p_r, int n, bool* clamped) {
    if (p_u <= p_r) throw BadDegreesOfFreedom("p_u must exceed p_r");
    if (n <= p_u + 1)
        throw BadDegreesOfFreedom("need n > p_u + 1 for a positive denominator df; n=" +
                                  std::to_string(n) + ", p_u=" + std::to_string(p_u));
    if (!(rss_u > 0.0)) throw DegenerateSystem("unrestricted RSS must be positive");
    if (clamped) *clamped = false;
    double numer = (rss_r - rss_u) / static_cast<double>(p_u - p_r);
    if (numer < 0.0) {
        numer = 0.0;
        if (clamped) *clamped = true;
    }
    const double denom = rss_u / static_cast<double>(n - p_u - 1);
    return numer / denom;
}

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                            (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

} // namespace

double f_pvalue(double f, int df1, int df2) {
    if (df1 < 1 || df2 < 1) throw BadDegreesOfFreedom("degrees of freedom must be >= 1");
    if (!(f >= 0.0)) throw BadDegreesOfFreedom("f must be non-negative");
    if (std::isinf(f)) return 0.0;
    const double x = df2 / (df2 + df1 * f);
    return reg_inc_beta(0.5 * df2, 0.5 * df1, x);
}

std::vector<bool> fdr_mask(const std::vector<double>& p_values, double alpha) {
    const std::size_t m = p_values.size();
    std::vector<bool> mask(m, false);
    if (m == 0) return mask;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    double threshold = -1.0;
    for (std::size_t k = m; k >= 1; --k) {
        const double bound = static_cast<double>(k) * alpha / static_cast<double>(m);
        if (p_values[order[k - 1]] <= bound) {
            threshold = p_values[order[k - 1]];
            break;
        }
    }
    if (threshold < 0.0) return mask;
    for (std::size_t i = 0; i < m; ++i) mask[i] = p_values[i] <= threshold;
    return mask;
}

namespace {

struct SourceResult {
    std::vector<double> f_row;
    std::vector<double> p_row;
    int clamped = 0;
};

struct PipelineContext {
    const TimeSeriesEnsemble* norm;
    const StateSpace* z_full;
    const GrbfCodebook* global_codebook;
    const Matrix* targets;
    RunConfig config;
    int d;
    int n;
};

std::string source_label(const TimeSeriesEnsemble& ensemble, std::size_t s) {
    if (s < ensemble.series_names.size() && !ensemble.series_names[s].empty())
        return ensemble.series_names[s];
    return "series" + std::to_string(s);
}

// One iteration of Algorithm step 5: everything needed to fill affinity row s.
SourceResult analyze_source(const PipelineContext& ctx, std::size_t s) {
    const auto& norm = *ctx.norm;
    const std::size_t n_series = norm.n_series();
    const std::size_t t = norm.n_points();

    const auto w_s = delay_embed_single(
        std::span<const double>(norm.data.row_ptr(s), t), ctx.d);

    // The source codebook draws its stream from the series label, so
    // relabeling the ensemble permutes results instead of reshuffling them.
    const std::uint64_t seed_s =
        derive_stream(ctx.config.seed, "causality/kmeans-source/" + source_label(norm, s));
    GrbfCodebook source_book;
    source_book.centers = kmeans(w_s.states, ctx.config.c_g, seed_s);
    source_book.sigma = kernel_width(source_book.centers);
    const Matrix g = activations(w_s, source_book);

    const GrbfCodebook pruned = prune_centers(*ctx.global_codebook, ctx.z_full->source_dims, s);
    const auto z_s = delay_embed_ensemble(norm, ctx.d, s);
    const Matrix f = activations(z_s, pruned);

    const std::size_t p_r = f.rows();
    const std::size_t p_u = p_r + g.rows();
    Matrix stacked(p_u, f.cols());
    for (std::size_t i = 0; i < p_r; ++i)
        std::copy_n(f.row_ptr(i), f.cols(), stacked.row_ptr(i));
    for (std::size_t i = 0; i < g.rows(); ++i)
        std::copy_n(g.row_ptr(i), g.cols(), stacked.row_ptr(p_r + i));

    const RegressionFit unrestricted = least_squares_fit(stacked, *ctx.targets);

    // The restricted model covers X \ x_s only; its features carry nothing
    // about x_s, so the self-row stays undefined.
    Matrix targets_rest(n_series - 1, ctx.targets->cols());
    std::vector<std::size_t> rest_rows;
    for (std::size_t r = 0; r < n_series; ++r) {
        if (r == s) continue;
        std::copy_n(ctx.targets->row_ptr(r), ctx.targets->cols(),
                    targets_rest.row_ptr(rest_rows.size()));
        rest_rows.push_back(r);
    }
    const RegressionFit restricted = least_squares_fit(f, targets_rest);

    SourceResult result;
    result.f_row.assign(n_series, kDiagonalSentinel);
    result.p_row.assign(n_series, kDiagonalSentinel);
    const int df2 = ctx.n - static_cast<int>(p_u) - 1;
    for (std::size_t idx = 0; idx < rest_rows.size(); ++idx) {
        const std::size_t r = rest_rows[idx];
        const double rss_u = std::max(unrestricted.rss_per_target[r], 1e-300);
        bool clamped = false;
        const double f_val = f_statistic(restricted.rss_per_target[idx], rss_u,
                                         static_cast<int>(p_u), static_cast<int>(p_r), ctx.n,
                                         &clamped);
        if (clamped) ++result.clamped;
        result.f_row[r] = f_val;
        result.p_row[r] = f_pvalue(f_val, static_cast<int>(p_u - p_r), df2);
    }
    return result;
}

AffinityMatrix run_pipeline(const TimeSeriesEnsemble& ensemble, const RunConfig& config,
                            bool parallel) {
    config.validate();
    validate_ensemble(ensemble);

    const TimeSeriesEnsemble norm = normalize(ensemble);
    const int d = select_lag(norm, config);
    const std::size_t n_series = norm.n_series();
    const std::size_t t = norm.n_points();
    const int n = static_cast<int>(t) - d;
    const int min_t = d + config.c_f + config.c_g + 2;
    if (n <= config.c_f + config.c_g + 1)
        throw InsufficientSamples("T=" + std::to_string(t) + " is too short for d=" +
                                  std::to_string(d) + ", c_f=" + std::to_string(config.c_f) +
                                  ", c_g=" + std::to_string(config.c_g) +
                                  "; need T >= " + std::to_string(min_t));

    const StateSpace z_full = delay_embed_ensemble(norm, d);
    GrbfCodebook global_codebook;
    global_codebook.centers = kmeans(z_full.states, config.c_f,
                                     derive_stream(config.seed, "causality/kmeans-global"));
    global_codebook.sigma = kernel_width(global_codebook.centers);
    const Matrix targets = prediction_targets(norm, d);

    PipelineContext ctx{&norm, &z_full, &global_codebook, &targets, config, d, n};

    std::vector<SourceResult> rows(n_series);
    if (parallel) {
        const int workers = config.workers > 0 ? config.workers : omp_get_max_threads();
        std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n_series); ++s) {
            try {
                rows[static_cast<std::size_t>(s)] =
                    analyze_source(ctx, static_cast<std::size_t>(s));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::size_t s = 0; s < n_series; ++s) rows[s] = analyze_source(ctx, s);
    }

    AffinityMatrix affinity;
    affinity.f_stat = Matrix(n_series, n_series, kDiagonalSentinel);
    affinity.p_value = Matrix(n_series, n_series, kDiagonalSentinel);
    affinity.significant = Matrix(n_series, n_series, kDiagonalSentinel);
    for (std::size_t s = 0; s < n_series; ++s) {
        affinity.clamped_count += rows[s].clamped;
        for (std::size_t r = 0; r < n_series; ++r) {
            if (r == s) continue;
            affinity.f_stat(s, r) = rows[s].f_row[r];
            affinity.p_value(s, r) = rows[s].p_row[r];
        }
    }

    std::vector<double> flat_p;
    flat_p.reserve(n_series * (n_series - 1));
    for (std::size_t s = 0; s < n_series; ++s)
        for (std::size_t r = 0; r < n_series; ++r)
            if (r != s) flat_p.push_back(affinity.p_value(s, r));
    const std::vector<bool> mask = fdr_mask(flat_p, config.alpha);
    std::size_t idx = 0;
    for (std::size_t s = 0; s < n_series; ++s)
        for (std::size_t r = 0; r < n_series; ++r)
            if (r != s) affinity.significant(s, r) = mask[idx++] ? 1.0 : 0.0;

    return affinity;
}

} // namespace

AffinityMatrix lsngc_affinity(const TimeSeriesEnsemble& ensemble, const RunConfig& config) {
    return run_pipeline(ensemble, config, true);
}

AffinityMatrix lsngc_affinity_serial(const TimeSeriesEnsemble& ensemble,
                                     const RunConfig& config) {
    return run_pipeline(ensemble, config, false);
}

Matrix log_transform(const AffinityMatrix& matrix, double epsilon) {
    const std::size_t n = matrix.size();
    Matrix out(n, n, kDiagonalSentinel);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < n; ++r) {
            if (r == s) continue;
            out(s, r) = std::log(matrix.f_stat(s, r) + epsilon);
        }
    return out;
}

} // namespace lsngc
