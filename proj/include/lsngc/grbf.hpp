#pragma once

#include <cstdint>

#include "lsngc/embedding.hpp"
#include "lsngc/matrix.hpp"

namespace lsngc {

/// k-means cluster centers plus the shared Gaussian kernel width.
struct GrbfCodebook {
    Matrix centers; // D x c, one center per column
    double sigma = 1.0;

    std::size_t dim() const { return centers.rows(); }
    std::size_t size() const { return centers.cols(); }
};

/// Lloyd's algorithm from a seeded k-means++ start. Assignments break ties
/// toward the lower center index; empty clusters are re-seeded to the point
/// farthest from its current center. Converges when assignments stop
/// changing, capped at 300 iterations. Bit-deterministic in (points, k, seed)
/// and independent of thread count. Throws TooFewPoints when M < k.
Matrix kmeans(const Matrix& points, int k, std::uint64_t seed);

/// Mean Euclidean distance over all unordered center pairs; 1.0 for a single
/// center, where no pair exists.
double kernel_width(const Matrix& centers);

/// Normalized Gaussian activations: column m holds
/// exp(-||state_m - center_i||^2 / sigma^2) renormalized to sum to 1 over i.
/// Exponents are shifted by the per-column maximum before exponentiation.
Matrix activations(const StateSpace& states, const GrbfCodebook& codebook);

/// Drops the excluded series' d rows from the centers (the layout comes from
/// the unexcluded ensemble embedding) and recomputes sigma for the projected
/// space, where the original mean distance would overestimate the spread.
GrbfCodebook prune_centers(const GrbfCodebook& codebook,
                           const std::vector<StateSpace::Coordinate>& layout,
                           std::size_t exclude);

} // namespace lsngc
