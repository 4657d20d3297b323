#pragma once

#include <limits>
#include <map>

#include "dynab/checks.hpp"
#include "dynab/discrete.hpp"

namespace dynab {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LevelFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;  // optional, FD fallback
    std::string name;

    Vec gradient_at(const Vec& x) const;
};

// Descent functions V_i with their ordered regular-value lists A^i.
// Index vectors z = (z_1..z_l) address the slab cells
// [z] = inter_i V_i^{-1}([a^i_{z_i - 1}, a^i_{z_i}]); index 0, present
// when include_floor_cells is set, is the floor slab V_i <= a^i_0 (its
// lower level acts as -inf), so the cells tile the whole sublevel range.
struct LevelFamily {
    std::vector<LevelFunction> functions;
    std::vector<std::vector<double>> levels;  // strictly increasing per function
    bool include_floor_cells = true;

    int count() const { return static_cast<int>(functions.size()); }
    int min_index() const { return include_floor_cells ? 0 : 1; }
    int max_index(int i) const { return static_cast<int>(levels[i].size()) - 1; }
    void validate() const;

    double slab_lower(int i, int zi) const { return zi == 0 ? -kInf : levels[i][zi - 1]; }
    double slab_upper(int i, int zi) const { return levels[i][zi]; }
    bool in_slab(const Vec& x, const std::vector<int>& z, double tol = 0.0) const;
};

using LevelIndexVector = std::vector<int>;

struct TimingBox {
    std::vector<std::pair<double, double>> intervals;  // [b_lo, b_hi] per function
    bool empty_cell = false;
};

struct BoxMap {
    const LevelFamily* family = nullptr;
    std::map<LevelIndexVector, TimingBox> boxes;
    std::vector<LevelIndexVector> cells;  // nonempty cells, lexicographic
    std::map<LevelIndexVector, CellId> flat_id;

    const TimingBox& box(const LevelIndexVector& z) const;
};

struct DescentReport {
    bool pass = true;
    double worst = -kInf;  // max of dV_i(xi) over samples
    Vec worst_point;
    bool regular_values = true;
    double min_gradient_norm = kInf;  // over sampled level-set points
};

// dV_i(xi)(x) <= tol on samples; also |grad V_i| >= eps_reg on projected
// level-set points of every finite declared level.
DescentReport check_descent(const VectorFieldSpec& field, const StateSpace& space,
                            const FlowConfig& cfg, const LevelFamily& family,
                            int n_samples, std::uint64_t seed, double tol = 1e-8,
                            double eps_reg = 1e-6);

// Newton projection of space samples onto {V = a}; LevelSetEmpty when no
// point converges inside the space.
std::vector<Vec> level_set_points(const StateSpace& space, const LevelFunction& V, double a,
                                  int n_points, std::uint64_t seed);

// Transit interval through the slab V^{-1}([a_lower, a_upper]): starts on
// the upper level set, time measured by first_crossing_time down to
// a_lower; non-crossers within cfg.t_max contribute +inf.
std::pair<double, double> compute_timing_interval(const VectorFieldSpec& field,
                                                  const StateSpace& space,
                                                  const FlowConfig& cfg,
                                                  const LevelFunction& V, double a_upper,
                                                  double a_lower, int n_trajectories,
                                                  std::uint64_t seed);

struct BoxMapOptions {
    int n_trajectories = 64;
    int emptiness_samples = 4096;
    double slab_tol = 1e-9;
};

BoxMap build_box_map(const VectorFieldSpec& field, const StateSpace& space,
                     const FlowConfig& cfg, const LevelFamily& family,
                     const BoxMapOptions& opt, std::uint64_t seed);

// Componentwise widths of the interval Minkowski sum; +inf propagates.
std::vector<double> apply_L(const std::vector<TimingBox>& boxes);

enum class PhiMode {
    Verbatim,  // chain condition on interval widths, chains ascend by sigma
    Bounds,    // descend while the accumulated minimal transit fits in t
};

struct PhiResult {
    LevelIndexVector cell;
    bool no_admissible_chain = false;  // Verbatim only: even m = 0 failed
};

PhiResult compute_phi_ex4(const BoxMap& boxmap, double t, const LevelIndexVector& z,
                          PhiMode mode = PhiMode::Verbatim);

// Slab cells as an OrderedCover, in flat-id order.
OrderedCover cells_as_cover(const BoxMap& boxmap, const StateSpace& space);

DiscreteSystem build_ex4_system(const BoxMap& boxmap, std::vector<double> time_grid,
                                PhiMode mode = PhiMode::Verbatim);

// check_complete against the Example 4 system with its cells as cover.
ApproximationReport completeness_suite(const VectorFieldSpec& field, const StateSpace& space,
                                       const FlowConfig& cfg, const LevelFamily& family,
                                       const BoxMap& boxmap, int n_points,
                                       const std::vector<double>& time_grid,
                                       std::uint64_t seed,
                                       PhiMode mode = PhiMode::Verbatim);

}  // namespace dynab
