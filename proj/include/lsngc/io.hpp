#pragma once

#include <string>

#include "lsngc/core.hpp"

namespace lsngc {

/// CSV layout: header row of series names, then one row per time point with
/// one column per series. read_ensemble transposes into the N x T ensemble.
/// Throws ParseError (with the 1-based line number), RaggedRows, TooShort.
TimeSeriesEnsemble read_ensemble(const std::string& path);

/// Inverse of read_ensemble. Values are printed with %.17g so a write/read
/// round trip reproduces every double exactly.
void write_ensemble(const TimeSeriesEnsemble& ensemble, const std::string& path);

/// JSON document with keys n, series_names, method, f_stat, p_value,
/// significant; matrices are arrays of rows, diagonals serialized as null.
/// A sibling CSV of f_stat is written next to it (.json swapped for .csv).
/// The method tag records what f_stat holds ("lsngc" F-statistics or "lm"
/// cross-map scores) so evaluation can pick the right transform.
void write_affinity(const AffinityMatrix& matrix, const std::string& path,
                    const std::vector<std::string>& series_names = {},
                    const std::string& method = "lsngc");

struct AffinityFile {
    AffinityMatrix matrix;
    std::vector<std::string> series_names;
    std::string method;
};

AffinityFile read_affinity(const std::string& path);

/// Plain 0/1 matrix CSV, no header, one row per source series.
void write_adjacency(const AdjacencyMatrix& truth, const std::string& path);
AdjacencyMatrix read_adjacency(const std::string& path);

} // namespace lsngc
