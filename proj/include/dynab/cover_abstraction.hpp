#pragma once

#include "dynab/discrete.hpp"

namespace dynab {

// Family of linear vector fields L_i(x) = L_i x enclosing the true field
// through the pol operator: pol{v_1..v_l} = { sum a_i v_i : a_i >= 0,
// sum a_i^2 = 1 }.
struct LinearFamily {
    std::vector<Mat> matrices;

    int count() const { return static_cast<int>(matrices.size()); }
    int dim() const { return static_cast<int>(matrices.front().rows()); }
    double max_norm() const;
};

enum class AlphaNorm { Sphere, Simplex };

// n coefficient draws from the nonnegative unit sphere (absolute-value-of-
// Gaussian normalization), the l vertices e_i prepended.
std::vector<Vec> pol_sample(const std::vector<Vec>& vectors, int n, std::uint64_t seed,
                            AlphaNorm norm = AlphaNorm::Sphere);

struct InclusionReport {
    bool included = false;
    double worst_residual = 0.0;
    Vec worst_point;
};

// Checks xi(x) in pol{L_1 x, .., L_l x} on sampled points: nonnegative
// least squares, then the minimizer rescaled onto the unit sphere with a
// projected-gradient polish; passes when the residual stays below
// tol * (1 + |xi(x)|) everywhere.
InclusionReport check_inclusion(const VectorFieldSpec& spec, const StateSpace& space,
                                const LinearFamily& fam, int n_points, double tol,
                                std::uint64_t seed);

// Nonnegative least squares min_{a>=0} |b - M a|^2 (active-set).
Vec nnls(const Mat& M, const Vec& b);

struct CoverAbstractionOptions {
    int vertex_samples = 64;   // cell samples; HyperRect corners are added on top
    int alpha_samples = 64;
    double bloat = -1.0;       // < 0 selects the default cushion
    AlphaNorm alpha_norm = AlphaNorm::Sphere;
};

// Documented default cushion: 2 * step^2 * max|L_i| * t.
double default_bloat(double step, const LinearFamily& fam, double t);

std::vector<CellId> compute_phi_ex1(const OrderedCover& cover, const LinearFamily& fam,
                                    double t, CellId z, const CoverAbstractionOptions& opt,
                                    double step, std::uint64_t seed);

// DiscreteSystem whose phi evaluates compute_phi_ex1 lazily; tagged as an
// over-approximation only when `inclusion_verified` is set.
DiscreteSystem build_ex1_system(const OrderedCover& cover, const LinearFamily& fam,
                                const CoverAbstractionOptions& opt, double step,
                                std::vector<double> time_grid, std::uint64_t seed,
                                bool inclusion_verified);

}  // namespace dynab
