#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lsngc/core.hpp"

namespace lsngc {

/// Delay-coordinate reconstruction. Column j stacks, per series, the values
/// at times j .. j+d-1, so the state ending at time t predicts t+1. There are
/// always T - d columns and every column has a valid one-step-ahead target.
struct StateSpace {
    Matrix states; // D_total x M, one state per column
    int lag = 0;

    struct Coordinate {
        std::size_t series; // which input series this row came from
        int offset;         // 0 = oldest sample in the window, d-1 = newest
    };
    std::vector<Coordinate> source_dims; // one entry per row of states

    std::size_t target_index_offset = 0; // time index of the first column's target (== lag)

    std::size_t dim() const { return states.rows(); }
    std::size_t n_states() const { return states.cols(); }
};

/// Embeds one series. Throws SeriesTooShort when T <= d.
StateSpace delay_embed_single(std::span<const double> series, int d);

/// Embeds the whole ensemble (or all but one series), stacking d-row blocks
/// in series order. Without exclusion the result has N*d rows.
StateSpace delay_embed_ensemble(const TimeSeriesEnsemble& ensemble, int d,
                                std::optional<std::size_t> exclude = std::nullopt);

/// The series values each state column predicts: row r holds x_r(d .. T-1).
Matrix prediction_targets(const TimeSeriesEnsemble& ensemble, int d);

struct CaoResult {
    int dimension = 0;
    bool stochastic = false;    // E2 never left 1: no deterministic structure found
    std::vector<double> e1;     // e1[i] = E1(i+1)
    std::vector<double> e2;     // e2[i] = E2(i+1)
};

/// Cao's method. E(d) is the mean ratio of nearest-neighbor distances between
/// the d+1- and d-dimensional embeddings (max-norm, neighbors at distance 0
/// skipped); E1(d) = E(d+1)/E(d). Returns the smallest d with E1(d+1)/E1(d)
/// within 0.05 of 1, or d_max when E1 never saturates. When E2 stays within
/// 0.12 of 1 for every d the series is flagged stochastic and d_max is
/// returned. Requires T >= 10 * d_max.
CaoResult cao_dimension(std::span<const double> series, int d_max);

/// Resolves the shared embedding dimension for an ensemble: an explicit
/// config.d passes through; auto runs Cao per series (d_max = 10) and takes
/// the maximum, since the stacked Z needs one d for everyone.
int select_lag(const TimeSeriesEnsemble& ensemble, const RunConfig& config);

} // namespace lsngc
