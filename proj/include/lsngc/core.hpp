#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lsngc/matrix.hpp"

namespace lsngc {

/// Off-diagonal-only N x N outputs carry NaN on the diagonal. NaN (rather
/// than 0) makes accidental inclusion in a downstream ranking or count blow
/// up visibly instead of silently skewing it.
inline constexpr double kDiagonalSentinel = std::numeric_limits<double>::quiet_NaN();

/// N series by T time points. Rows are series.
struct TimeSeriesEnsemble {
    Matrix data;
    std::vector<std::string> series_names;
    bool normalized = false;

    std::size_t n_series() const { return data.rows(); }
    std::size_t n_points() const { return data.cols(); }
};

/// Validates the [TYPE] invariants: N >= 2, T >= 2, all values finite,
/// names match N. Throws InvalidEnsemble.
void validate_ensemble(const TimeSeriesEnsemble& ensemble);

/// Ground-truth network. edges(s, r) == 1 means a directed edge s -> r.
struct AdjacencyMatrix {
    Matrix edges;
    bool directed = true;

    std::size_t size() const { return edges.rows(); }
};

/// Directed lsNGC scores. Entry (s, r) quantifies the evidence that series s
/// influences series r. Diagonals are the sentinel and never enter any
/// downstream computation.
struct AffinityMatrix {
    Matrix f_stat;
    Matrix p_value;
    Matrix significant;      // 0/1 off-diagonal, sentinel diagonal
    int clamped_count = 0;   // off-diagonal cells where the F numerator was clamped to 0

    std::size_t size() const { return f_stat.rows(); }
};

inline constexpr int kAutoLag = 0; // d == kAutoLag selects Cao's method

struct RunConfig {
    int d = kAutoLag;         // embedding dimension; kAutoLag = choose per series via Cao
    int c_f = 25;             // codebook size for the full-ensemble space Z
    int c_g = 5;              // codebook size for the source space W_s
    double alpha = 0.05;      // FDR level
    std::uint64_t seed = 0;
    double epsilon_log = 1e-12;
    int workers = 0;          // 0 = all hardware threads

    void validate() const;    // throws BadConfig
};

/// Row-wise z-scoring with the sample (T-1) standard deviation. Idempotent up
/// to 1e-9. Throws ConstantSeries when any row has sd < 1e-12.
TimeSeriesEnsemble normalize(const TimeSeriesEnsemble& ensemble);

} // namespace lsngc
