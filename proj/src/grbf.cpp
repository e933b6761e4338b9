#include "lsngc/grbf.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "lsngc/errors.hpp"
#include "lsngc/rng.hpp"

namespace lsngc {

namespace {

// The public layout keeps one point per column. Distance-heavy loops want one
// point per row so the inner dimension is contiguous; transpose once on entry.
Matrix transposed(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

#ifndef NDEBUG
double objective(const Matrix& pts, const Matrix& ctr, const std::vector<int>& assign) {
    double total = 0.0;
    for (std::size_t p = 0; p < pts.rows(); ++p)
        total += squared_distance(pts.row_ptr(p),
                                  ctr.row_ptr(static_cast<std::size_t>(assign[p])), pts.cols());
    return total;
}
#endif

} // namespace

Matrix kmeans(const Matrix& points, int k, std::uint64_t seed) {
    const std::size_t dim = points.rows();
    const std::size_t m = points.cols();
    if (k < 1) throw TooFewPoints("k must be >= 1");
    if (m < static_cast<std::size_t>(k))
        throw TooFewPoints("k-means needs at least k points: k=" + std::to_string(k) +
                           ", points=" + std::to_string(m));

    const Matrix pts = transposed(points);             // m x dim, one point per row
    Matrix ctr(static_cast<std::size_t>(k), dim);      // k x dim, one center per row
    Rng rng = make_rng(seed, "grbf/kmeans++");

    // k-means++ seeding: first center uniform, the rest proportional to the
    // squared distance to the closest already-chosen center.
    std::vector<double> d2(m, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = static_cast<std::size_t>(rng.next_below(m));
        std::copy_n(pts.row_ptr(first), dim, ctr.row_ptr(0));
        for (std::size_t p = 0; p < m; ++p)
            d2[p] = squared_distance(pts.row_ptr(p), ctr.row_ptr(0), dim);
    }
    for (std::size_t c = 1; c < static_cast<std::size_t>(k); ++c) {
        double total = 0.0;
        for (std::size_t p = 0; p < m; ++p) total += d2[p];
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = static_cast<std::size_t>(rng.next_below(m));
        } else {
            const double draw = rng.next_double() * total;
            double acc = 0.0;
            chosen = m - 1;
            for (std::size_t p = 0; p < m; ++p) {
                acc += d2[p];
                if (acc >= draw) {
                    chosen = p;
                    break;
                }
            }
        }
        std::copy_n(pts.row_ptr(chosen), dim, ctr.row_ptr(c));
        for (std::size_t p = 0; p < m; ++p)
            d2[p] = std::min(d2[p], squared_distance(pts.row_ptr(p), ctr.row_ptr(c), dim));
    }

    std::vector<int> assign(m, -1);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
#ifndef NDEBUG
    double prev_objective = std::numeric_limits<double>::infinity();
#endif

    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;

        // Per-point assignment is independent; ties break toward the lower
        // center index, so the outcome does not depend on scheduling.
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(m); ++pp) {
            const std::size_t p = static_cast<std::size_t>(pp);
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double dist =
                    squared_distance(pts.row_ptr(p), ctr.row_ptr(static_cast<std::size_t>(c)), dim);
                if (dist < best) {
                    best = dist;
                    best_c = c;
                }
            }
            if (assign[p] != best_c) {
                assign[p] = best_c;
                changed = true;
            }
        }

#ifndef NDEBUG
        {
            const double obj = objective(pts, ctr, assign);
            assert(obj <= prev_objective * (1.0 + 1e-9) + 1e-12);
            prev_objective = obj;
        }
#endif
        if (!changed) break;

        // Serial center update in fixed point order keeps the floating-point
        // accumulation identical for every thread count.
        Matrix sums(static_cast<std::size_t>(k), dim);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t p = 0; p < m; ++p) {
            const auto c = static_cast<std::size_t>(assign[p]);
            ++counts[c];
            const double* src = pts.row_ptr(p);
            double* dst = sums.row_ptr(c);
            for (std::size_t i = 0; i < dim; ++i) dst[i] += src[i];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) continue;
            const double inv = 1.0 / counts[c];
            double* dst = ctr.row_ptr(c);
            const double* src = sums.row_ptr(c);
            for (std::size_t i = 0; i < dim; ++i) dst[i] = src[i] * inv;
        }

        // Re-seed empty clusters at the point farthest from its assigned
        // center; repeat with the next-farthest for multiple gaps.
        std::vector<bool> taken(m, false);
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] != 0) continue;
            double worst = -1.0;
            std::size_t worst_p = 0;
            for (std::size_t p = 0; p < m; ++p) {
                if (taken[p]) continue;
                const double dist = squared_distance(
                    pts.row_ptr(p), ctr.row_ptr(static_cast<std::size_t>(assign[p])), dim);
                if (dist > worst) {
                    worst = dist;
                    worst_p = p;
                }
            }
            taken[worst_p] = true;
            std::copy_n(pts.row_ptr(worst_p), dim, ctr.row_ptr(c));
            assign[worst_p] = static_cast<int>(c);
#ifndef NDEBUG
            prev_objective = std::numeric_limits<double>::infinity();
#endif
        }
    }
    return transposed(ctr);
}

double kernel_width(const Matrix& centers) {
    const std::size_t c = centers.cols();
    if (c == 0) throw TooFewPoints("kernel_width needs at least one center");
    if (c == 1) return 1.0;
    const Matrix ctr = transposed(centers);
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
            sum += std::sqrt(squared_distance(ctr.row_ptr(i), ctr.row_ptr(j), ctr.cols()));
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

Matrix activations(const StateSpace& states, const GrbfCodebook& codebook) {
    const std::size_t dim = states.dim();
    if (dim != codebook.dim())
        throw DimensionMismatch("state dimension " + std::to_string(dim) +
                                " != center dimension " + std::to_string(codebook.dim()));
    const std::size_t m = states.n_states();
    const std::size_t c = codebook.size();
    const double inv_sigma2 = 1.0 / (codebook.sigma * codebook.sigma);

    const Matrix pts = transposed(states.states);   // m x dim
    const Matrix ctr = transposed(codebook.centers); // c x dim

    Matrix act(c, m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t col = 0; col < static_cast<std::ptrdiff_t>(m); ++col) {
        const std::size_t j = static_cast<std::size_t>(col);
        const double* state = pts.row_ptr(j);
        double max_exp = -std::numeric_limits<double>::infinity();
        std::vector<double> exps(c);
        for (std::size_t i = 0; i < c; ++i) {
            exps[i] = -squared_distance(state, ctr.row_ptr(i), dim) * inv_sigma2;
            if (exps[i] > max_exp) max_exp = exps[i];
        }
        double denom = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            exps[i] = std::exp(exps[i] - max_exp);
            denom += exps[i];
        }
        for (std::size_t i = 0; i < c; ++i) act(i, j) = exps[i] / denom;
    }
    return act;
}

GrbfCodebook prune_centers(const GrbfCodebook& codebook,
                           const std::vector<StateSpace::Coordinate>& layout,
                           std::size_t exclude) {
    if (layout.size() != codebook.dim())
        throw DimensionMismatch("layout has " + std::to_string(layout.size()) +
                                " coordinates, centers have " + std::to_string(codebook.dim()));
    std::vector<std::size_t> keep;
    bool found = false;
    for (std::size_t row = 0; row < layout.size(); ++row) {
        if (layout[row].series == exclude)
            found = true;
        else
            keep.push_back(row);
    }
    if (!found) throw BadIndex("series " + std::to_string(exclude) + " not present in layout");

    GrbfCodebook pruned;
    pruned.centers = Matrix(keep.size(), codebook.size());
    for (std::size_t r = 0; r < keep.size(); ++r)
        for (std::size_t c = 0; c < codebook.size(); ++c)
            pruned.centers(r, c) = codebook.centers(keep[r], c);
    pruned.sigma = kernel_width(pruned.centers);
    return pruned;
}

} // namespace lsngc
