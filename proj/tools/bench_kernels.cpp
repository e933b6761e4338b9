// Wall-clock comparison of the serial reference paths against the OpenMP
// kernels, with an equality check so a speedup never hides a divergence.

#include <omp.h>

#include <cstdio>
#include <string>

#include "lsngc/baselines.hpp"
#include "lsngc/causality.hpp"
#include "lsngc/matrix.hpp"
#include "lsngc/simulate.hpp"

namespace {

template <typename F>
double time_ms(F&& fn) {
    const double start = omp_get_wtime();
    fn();
    return (omp_get_wtime() - start) * 1e3;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %9.1f ms   omp(%d) %9.1f ms   speedup %.2fx   %s\n", name,
                serial_ms, omp_get_max_threads(), parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    const int t = argc > 1 ? std::stoi(argv[1]) : 500;

    lsngc::SimulationSpec spec;
    spec.model = lsngc::NetworkModel::zachary_directed;
    spec.t = t;
    spec.seed = 7;
    const auto sim = lsngc::simulate(spec);
    std::printf("dataset: %s, N=%zu, T=%d\n", lsngc::model_to_string(spec.model).c_str(),
                sim.ensemble.n_series(), t);

    lsngc::RunConfig config;
    config.d = 2;
    config.seed = 7;

    const int max_threads = omp_get_max_threads();

    // Pin the serial reference to one thread so the inner kernels' own
    // pragmas cannot blur the baseline; results are thread-count invariant
    // either way, which the equality check re-asserts.
    lsngc::AffinityMatrix serial_affinity, parallel_affinity;
    omp_set_num_threads(1);
    const double lsngc_serial =
        time_ms([&] { serial_affinity = lsngc::lsngc_affinity_serial(sim.ensemble, config); });
    omp_set_num_threads(max_threads);
    const double lsngc_parallel =
        time_ms([&] { parallel_affinity = lsngc::lsngc_affinity(sim.ensemble, config); });
    report("lsngc_affinity", lsngc_serial, lsngc_parallel,
           lsngc::bit_equal(serial_affinity.f_stat, parallel_affinity.f_stat) &&
               lsngc::bit_equal(serial_affinity.p_value, parallel_affinity.p_value));

    lsngc::CrossMapScore serial_scores, parallel_scores;
    omp_set_num_threads(1);
    const double lm_serial =
        time_ms([&] { serial_scores = lsngc::cross_map_score_serial(sim.ensemble, 2, 3); });
    omp_set_num_threads(max_threads);
    const double lm_parallel =
        time_ms([&] { parallel_scores = lsngc::cross_map_score(sim.ensemble, 2, 3); });
    report("cross_map_score", lm_serial, lm_parallel,
           lsngc::bit_equal(serial_scores.score, parallel_scores.score));

    return 0;
}
