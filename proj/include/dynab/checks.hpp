#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dynab/discrete.hpp"

namespace dynab {

struct Violation {
    double t = 0.0;
    CellId source = -1;        // abstraction of the start point (over) / queried cell (under)
    CellId observed = -1;      // observed image cell (over) / unwitnessed predicted cell (under)
    std::vector<CellId> predicted;
    Vec point;                 // start point when applicable
};

struct ApproximationReport {
    enum class Kind { Over, Under, Complete };
    Kind kind = Kind::Over;
    long checked = 0;
    std::vector<Violation> violations;
    bool verdict = false;      // == violations.empty()
};

struct ConservativenessEstimate {
    double value = 0.0;                       // sup over grid of max over cells
    std::map<double, double> per_time;        // grid time -> worst per-cell volume
    long mc_samples = 0;
    double std_error = 0.0;                   // for the worst cell's estimate
};

struct SafetyVerdict {
    bool safe = true;
    double first_time = 0.0;
    std::vector<CellId> witness_cells;
};

// For each sampled x in M and each grid time, checks
// A(flow(t,x)) in phi(t, A(x)).  The _serial variant is the reference
// implementation; the default parallelizes over samples with OpenMP and
// must produce identical reports.
ApproximationReport check_over_approximation(const ContinuousSystem& C,
                                             const DiscreteSystem& D,
                                             const OrderedCover& A, int n_points,
                                             const std::vector<double>& time_grid,
                                             std::uint64_t seed);
ApproximationReport check_over_approximation_serial(const ContinuousSystem& C,
                                                    const DiscreteSystem& D,
                                                    const OrderedCover& A, int n_points,
                                                    const std::vector<double>& time_grid,
                                                    std::uint64_t seed);

// Refutation-only: every z' in phi(t,z) must be witnessed by some sampled
// x in [z]; a pass means "not refuted at n samples".
ApproximationReport check_under_approximation(const ContinuousSystem& C,
                                              const DiscreteSystem& D,
                                              const OrderedCover& A, int n_points,
                                              const std::vector<double>& time_grid,
                                              std::uint64_t seed);
ApproximationReport check_under_approximation_serial(const ContinuousSystem& C,
                                                     const DiscreteSystem& D,
                                                     const OrderedCover& A, int n_points,
                                                     const std::vector<double>& time_grid,
                                                     std::uint64_t seed);

ApproximationReport check_complete(const ContinuousSystem& C, const DiscreteSystem& D,
                                   const OrderedCover& A, int n_points,
                                   const std::vector<double>& time_grid,
                                   std::uint64_t seed);

struct ConservativenessOptions {
    long mc_samples = 10000;
    int preimage_samples = 1000;  // dense cell sample forward-mapped to approximate A.phi(t,[z])
    double bloat = 0.0;           // metric-ball bloat of the image sample
};

// Monte Carlo estimate of sup_t max_z vol(phi(t,z) \ A.phi(t,[z])).
ConservativenessEstimate conservativeness_volume(const ContinuousSystem& C,
                                                 const DiscreteSystem& D,
                                                 const OrderedCover& A,
                                                 const std::vector<double>& time_grid,
                                                 const ConservativenessOptions& opt,
                                                 std::uint64_t seed);
ConservativenessEstimate conservativeness_volume_serial(const ContinuousSystem& C,
                                                        const DiscreteSystem& D,
                                                        const OrderedCover& A,
                                                        const std::vector<double>& time_grid,
                                                        const ConservativenessOptions& opt,
                                                        std::uint64_t seed);

// Union of phi(t, z) over the initial cells.
std::vector<CellId> discrete_reach(const DiscreteSystem& D, const std::vector<CellId>& init,
                                   double t);

// Requires the over-approximation tag; raises NotOverApproximation otherwise.
SafetyVerdict verify_safety(const DiscreteSystem& D, const OrderedCover& A,
                            const Region& init_region, const Region& unsafe_region,
                            double horizon, const std::vector<double>& time_grid,
                            std::uint64_t seed, int cell_samples = 256);

// The image abstraction A.phi(t,[z]) approximated by forward-mapping a
// dense cell sample (optionally bloated); shared by checkers and oracles.
std::vector<CellId> sampled_image_cells(const ContinuousSystem& C, const OrderedCover& A,
                                        CellId z, double t, int n_samples,
                                        std::uint64_t seed, double bloat = 0.0);

}  // namespace dynab
