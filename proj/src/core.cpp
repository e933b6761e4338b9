#include "lsngc/core.hpp"

#include <cmath>

#include "lsngc/errors.hpp"

namespace lsngc {

void validate_ensemble(const TimeSeriesEnsemble& ensemble) {
    const std::size_t n = ensemble.n_series();
    const std::size_t t = ensemble.n_points();
    if (n < 2)
        throw InvalidEnsemble("ensemble needs at least 2 series, got " + std::to_string(n));
    if (t < 2)
        throw InvalidEnsemble("ensemble needs at least 2 time points, got " + std::to_string(t));
    if (!ensemble.series_names.empty() && ensemble.series_names.size() != n)
        throw InvalidEnsemble("series_names size does not match series count");
    if (!ensemble.data.all_finite())
        throw InvalidEnsemble("ensemble contains non-finite values");
}

void RunConfig::validate() const {
    if (d < 0) throw BadConfig("embedding dimension must be positive (or auto)");
    if (c_f < 1) throw BadConfig("c_f must be >= 1");
    if (c_g < 1) throw BadConfig("c_g must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadConfig("alpha must lie in (0, 1)");
    if (!(epsilon_log > 0.0)) throw BadConfig("epsilon_log must be positive");
    if (workers < 0) throw BadConfig("workers must be >= 0");
}

TimeSeriesEnsemble normalize(const TimeSeriesEnsemble& ensemble) {
    validate_ensemble(ensemble);
    const std::size_t n = ensemble.n_series();
    const std::size_t t = ensemble.n_points();

    TimeSeriesEnsemble out;
    out.data = Matrix(n, t);
    out.series_names = ensemble.series_names;
    out.normalized = true;

    for (std::size_t s = 0; s < n; ++s) {
        const double* row = ensemble.data.row_ptr(s);
        double sum = 0.0;
        for (std::size_t j = 0; j < t; ++j) sum += row[j];
        const double mean = sum / static_cast<double>(t);

        double ss = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            const double diff = row[j] - mean;
            ss += diff * diff;
        }
        const double sd = std::sqrt(ss / static_cast<double>(t - 1));
        if (sd < 1e-12) {
            const std::string name = ensemble.series_names.empty()
                                         ? "series " + std::to_string(s)
                                         : ensemble.series_names[s];
            throw ConstantSeries(name + " has (near-)zero variance and cannot be normalized");
        }
        double* dst = out.data.row_ptr(s);
        for (std::size_t j = 0; j < t; ++j) dst[j] = (row[j] - mean) / sd;
    }
    return out;
}

} // namespace lsngc
