#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "lsngc/core.hpp"
#include "lsngc/rng.hpp"

namespace lsngc::test {

inline TimeSeriesEnsemble make_ensemble(std::vector<std::vector<double>> rows,
                                        std::vector<std::string> names = {}) {
    TimeSeriesEnsemble e;
    e.data = Matrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) e.data(i, j) = rows[i][j];
    if (names.empty())
        for (std::size_t i = 1; i <= rows.size(); ++i) names.push_back("x" + std::to_string(i));
    e.series_names = std::move(names);
    return e;
}

inline TimeSeriesEnsemble white_noise_ensemble(std::size_t n, std::size_t t,
                                               std::uint64_t seed) {
    TimeSeriesEnsemble e;
    e.data = Matrix(n, t);
    std::vector<std::string> names;
    for (std::size_t s = 0; s < n; ++s) {
        Rng rng = make_rng(seed, "test/white-noise", s);
        for (std::size_t j = 0; j < t; ++j) e.data(s, j) = rng.next_gaussian();
        names.push_back("w" + std::to_string(s + 1));
    }
    e.series_names = std::move(names);
    return e;
}

/// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("lsngc_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace lsngc::test
