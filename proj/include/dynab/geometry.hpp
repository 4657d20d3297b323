#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dynab/errors.hpp"

namespace dynab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CellId = int;

// Compact coordinate domain: an axis-aligned box, or a flat torus where
// each coordinate is identified modulo its period.
class StateSpace {
public:
    enum class Kind { Box, Torus };

    StateSpace(Kind kind, std::vector<std::pair<double, double>> bounds);

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(bounds_.size()); }
    double lower(int i) const { return bounds_[i].first; }
    double upper(int i) const { return bounds_[i].second; }
    double period(int i) const { return bounds_[i].second - bounds_[i].first; }

    // Canonical representative: identity on boxes, wrap into [lower, upper)
    // on tori.
    Vec canonicalize(const Vec& x) const;
    bool contains(const Vec& x, double tol = 0.0) const;

    // Minimal displacement a - b (shortest representative on tori).
    Vec displacement(const Vec& a, const Vec& b) const;

    double volume() const;
    double diameter() const;  // Euclidean, shortest-representative on tori

private:
    Kind kind_;
    std::vector<std::pair<double, double>> bounds_;
};

// Euclidean or constant-quadratic-form distance, torus-aware.
class MetricSpec {
public:
    MetricSpec() : kind_(Kind::Euclidean) {}
    enum class Kind { Euclidean, QuadraticForm };

    static MetricSpec euclidean() { return MetricSpec(); }
    static MetricSpec quadratic(const Mat& P);

    Kind kind() const { return kind_; }
    const Mat& form() const { return P_; }
    double lambda_max() const { return lambda_max_; }
    double lambda_min() const { return lambda_min_; }

    double distance(const StateSpace& space, const Vec& a, const Vec& b) const;

private:
    Kind kind_;
    Mat P_;
    double lambda_max_ = 1.0, lambda_min_ = 1.0;
};

// Membership-testable subset of the state space.  Sampling is rejection
// from the space with a budget of kSampleBudget attempts per requested
// point; exceeding it raises EmptyRegion.
class Region {
public:
    enum class Kind { HyperRect, MetricBall, Slab, Predicate };
    static constexpr int kSampleBudget = 65536;

    static Region hyper_rect(std::vector<std::pair<double, double>> bounds);
    static Region metric_ball(Vec center, double radius, MetricSpec metric = MetricSpec());
    static Region slab(std::function<bool(const Vec&)> contains, std::string label);
    static Region predicate(std::function<bool(const Vec&)> contains, std::string label);

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    bool contains(const StateSpace& space, const Vec& x) const;
    std::vector<Vec> sample(const StateSpace& space, int n, std::uint64_t seed) const;

    // HyperRect accessors (only valid for that kind).
    const std::vector<std::pair<double, double>>& rect_bounds() const { return rect_; }
    std::vector<Vec> rect_corners() const;

    // MetricBall accessors.
    const Vec& center() const { return center_; }
    double radius() const { return radius_; }
    const MetricSpec& metric() const { return metric_; }

private:
    Kind kind_ = Kind::Predicate;
    std::vector<std::pair<double, double>> rect_;
    Vec center_;
    double radius_ = 0.0;
    MetricSpec metric_;
    std::function<bool(const Vec&)> pred_;
    std::string label_;
};

// Indexed finite family of regions covering the space; carries the
// min-index abstraction map.
class OrderedCover {
public:
    OrderedCover(StateSpace space, std::vector<Region> regions)
        : space_(std::move(space)), regions_(std::move(regions)) {}

    const StateSpace& space() const { return space_; }
    int size() const { return static_cast<int>(regions_.size()); }
    const Region& region(CellId z) const { return regions_[z]; }

    CellId abstract_point(const Vec& x) const;
    std::optional<CellId> try_abstract_point(const Vec& x) const;
    std::vector<Vec> sample_cell(CellId z, int n, std::uint64_t seed) const;

    struct PartitionWitness {
        Vec point;
        CellId a = -1, b = -1;
    };
    // True if no sampled point lies in two regions; otherwise a witness.
    std::pair<bool, PartitionWitness> is_partition(int samples, std::uint64_t seed) const;

private:
    StateSpace space_;
    std::vector<Region> regions_;
};

// Verifies covering on quasi-uniform samples before handing back the cover.
OrderedCover build_ordered_cover(const StateSpace& space, std::vector<Region> regions,
                                 int coverage_samples, std::uint64_t seed);

// Quasi-uniform sample of the space: half Kronecker (R_d) lattice with a
// seeded offset, half seeded uniform draws.
std::vector<Vec> quasi_uniform(const StateSpace& space, int n, std::uint64_t seed);

// Uniform grid partition of the space into per-axis counts, as HyperRects.
std::vector<Region> grid_partition(const StateSpace& space, const std::vector<int>& counts);

}  // namespace dynab
