#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <vector>

#include "dynab/dynamics.hpp"
#include "dynab/geometry.hpp"

namespace dynab {

// Continuous side bundled for the checkers.
struct ContinuousSystem {
    VectorFieldSpec field;
    StateSpace space;
    FlowConfig cfg;
};

// Finite state set Z = {0..n-1} with a discrete flow map
// phi: (t, z) -> subset of Z.  Queries on the time grid are cached;
// the cache is write-once per key (concurrent fills produce identical
// values since phi is pure).
class DiscreteSystem {
public:
    DiscreteSystem(int n_states, std::function<std::vector<CellId>(double, CellId)> phi,
                   std::vector<double> time_grid)
        : n_states_(n_states), phi_fn_(std::move(phi)), time_grid_(std::move(time_grid)) {}

    DiscreteSystem(const DiscreteSystem& o)
        : n_states_(o.n_states_), phi_fn_(o.phi_fn_), time_grid_(o.time_grid_),
          over_tag_(o.over_tag_) {}

    DiscreteSystem& operator=(const DiscreteSystem& o) {
        if (this == &o) return *this;
        n_states_ = o.n_states_;
        phi_fn_ = o.phi_fn_;
        time_grid_ = o.time_grid_;
        over_tag_ = o.over_tag_;
        cache_.clear();
        return *this;
    }

    int n_states() const { return n_states_; }
    const std::vector<double>& time_grid() const { return time_grid_; }

    std::vector<CellId> phi(double t, CellId z) const;

    // Soundness tag: set by a passing over-approximation check or by a
    // construction that guarantees it; gates safety queries.
    bool over_approximation_tag() const { return over_tag_; }
    void tag_over_approximation(bool v) { over_tag_ = v; }

    // Evaluate phi on every (grid time, cell) pair up front so parallel
    // readers never contend on the cache.
    void warm_cache() const;

private:
    int n_states_;
    std::function<std::vector<CellId>(double, CellId)> phi_fn_;
    std::vector<double> time_grid_;
    bool over_tag_ = false;

    mutable std::map<std::pair<double, CellId>, std::vector<CellId>> cache_;
    mutable std::mutex cache_mutex_;
};

// Default query grid: t = 0 plus n_points log-spaced times in (0, t_max].
std::vector<double> default_time_grid(double t_max, int n_points = 32);

}  // namespace dynab
