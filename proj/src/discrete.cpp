#include "dynab/discrete.hpp"

#include <algorithm>
#include <cmath>

namespace dynab {

std::vector<CellId> DiscreteSystem::phi(double t, CellId z) const {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find({t, z});
        if (it != cache_.end()) return it->second;
    }
    std::vector<CellId> out = phi_fn_(t, z);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        cache_.emplace(std::make_pair(t, z), out);
    }
    return out;
}

void DiscreteSystem::warm_cache() const {
    for (double t : time_grid_)
        for (CellId z = 0; z < n_states_; ++z) phi(t, z);
}

std::vector<double> default_time_grid(double t_max, int n_points) {
    std::vector<double> grid{0.0};
    // Log-spaced in (0, t_max], spanning three decades below t_max.
    double lo = std::log(t_max) - 3.0 * std::log(10.0);
    double hi = std::log(t_max);
    for (int i = 0; i < n_points; ++i) {
        double f = n_points == 1 ? 1.0 : static_cast<double>(i) / (n_points - 1);
        grid.push_back(std::exp(lo + f * (hi - lo)));
    }
    grid.back() = t_max;
    return grid;
}

}  // namespace dynab
