// Compares the OpenMP checker kernels against the serial reference on the
// quadrant / radial-contraction scenario and verifies identical reports.

#include <chrono>
#include <cstdio>

#include "dynab/checks.hpp"
#include "dynab/cover_abstraction.hpp"

using namespace dynab;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

}  // namespace

int main() {
    StateSpace space(StateSpace::Kind::Box, {{-1, 1}, {-1, 1}});
    ContinuousSystem C{VectorFieldSpec::radial_contraction(2), space, FlowConfig{1e-3, 5.0}};
    OrderedCover cover =
        build_ordered_cover(space, grid_partition(space, {2, 2}), 2048, 7);

    LinearFamily fam{{-Mat::Identity(2, 2)}};
    CoverAbstractionOptions opt;
    std::vector<double> grid = default_time_grid(5.0, 16);
    DiscreteSystem D = build_ex1_system(cover, fam, opt, 1e-3, grid, 7, true);

    const int n_points = 512;

    auto t0 = std::chrono::steady_clock::now();
    ApproximationReport serial =
        check_over_approximation_serial(C, D, cover, n_points, grid, 7);
    auto t1 = std::chrono::steady_clock::now();
    ApproximationReport parallel = check_over_approximation(C, D, cover, n_points, grid, 7);
    auto t2 = std::chrono::steady_clock::now();

    double ts = seconds(t0, t1), tp = seconds(t1, t2);
    std::printf("over-check      serial %.3fs  parallel %.3fs  speedup %.2fx\n", ts, tp,
                ts / tp);
    if (serial.verdict != parallel.verdict ||
        serial.violations.size() != parallel.violations.size()) {
        std::printf("MISMATCH between serial and parallel over-check reports\n");
        return 1;
    }

    ConservativenessOptions copt;
    copt.mc_samples = 20000;
    copt.preimage_samples = 400;
    auto t3 = std::chrono::steady_clock::now();
    ConservativenessEstimate es =
        conservativeness_volume_serial(C, D, cover, grid, copt, 7);
    auto t4 = std::chrono::steady_clock::now();
    ConservativenessEstimate ep = conservativeness_volume(C, D, cover, grid, copt, 7);
    auto t5 = std::chrono::steady_clock::now();

    ts = seconds(t3, t4);
    tp = seconds(t4, t5);
    std::printf("conservativeness serial %.3fs  parallel %.3fs  speedup %.2fx\n", ts, tp,
                ts / tp);
    if (es.value != ep.value) {
        std::printf("MISMATCH between serial and parallel volume estimates\n");
        return 1;
    }
    std::printf("serial and parallel kernels agree\n");
    return 0;
}
