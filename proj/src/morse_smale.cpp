#include "dynab/morse_smale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dynab/prng.hpp"

namespace dynab {

namespace {

double dist(const StateSpace& space, const Vec& a, const Vec& b) {
    return space.displacement(a, b).norm();
}

double element_distance(const StateSpace& space, const SingularElement& e, const Vec& x) {
    if (e.kind == SingularElement::Kind::Equilibrium) return dist(space, e.point, x);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& p : e.orbit_points) best = std::min(best, dist(space, p, x));
    return best;
}

int classify_impl(const VectorFieldSpec& field, const StateSpace& space,
                  const FlowConfig& cfg, const Vec& x0,
                  const std::vector<SingularElement>& elements,
                  const ClassifyOptions& opt) {
    Vec x = space.canonicalize(x0);
    double t = 0.0;
    int candidate = kUnresolved;
    double dwell = 0.0;
    auto in_capture = [&](const Vec& p) -> int {
        for (size_t i = 0; i < elements.size(); ++i)
            if (element_distance(space, elements[i], p) <= elements[i].capture_radius)
                return static_cast<int>(i);
        return kUnresolved;
    };
    auto dwell_needed = [&](int i) {
        const SingularElement& e = elements[i];
        return e.kind == SingularElement::Kind::PeriodicOrbit ? 2.0 * e.period
                                                              : 2.0 * opt.dwell_constant;
    };
    int c0 = in_capture(x);
    if (c0 >= 0) { candidate = c0; }
    while (t < opt.t_max) {
        x = flow(field, space, cfg, cfg.step, x);
        t += cfg.step;
        int c = in_capture(x);
        if (c == candidate && c >= 0) {
            dwell += cfg.step;
            if (dwell >= dwell_needed(c)) return elements[c].id;
        } else {
            candidate = c;
            dwell = 0.0;
        }
    }
    return kUnresolved;
}

}  // namespace

void validate_elements(const VectorFieldSpec& field, const StateSpace& space,
                       const FlowConfig& cfg, std::vector<SingularElement>& elements,
                       double tol_eq, double tol_orbit) {
    for (SingularElement& e : elements) {
        if (e.capture_radius <= 0.0) e.capture_radius = 0.05 * space.diameter();
        if (e.kind == SingularElement::Kind::Equilibrium) {
            double speed = field.rhs(e.point).norm();
            if (speed > tol_eq) {
                std::ostringstream os;
                os << "declared equilibrium has |xi| = " << speed;
                throw ConfigError(os.str());
            }
        } else {
            Vec back = flow(field, space, cfg, e.period, e.point);
            if (dist(space, back, e.point) > tol_orbit)
                throw ConfigError("declared periodic orbit does not close up");
            e.orbit_points.clear();
            for (int k = 0; k < 64; ++k)
                e.orbit_points.push_back(
                    flow(field, space, cfg, e.period * k / 64.0, e.point));
        }
    }
}

int classify_omega_limit(const VectorFieldSpec& field, const StateSpace& space,
                         const FlowConfig& cfg, const Vec& x,
                         const std::vector<SingularElement>& elements,
                         const ClassifyOptions& opt) {
    if (elements.empty()) throw ConfigError("no singular elements declared");
    return classify_impl(field, space, cfg, x, elements, opt);
}

int classify_alpha_limit(const VectorFieldSpec& field, const StateSpace& space,
                         const FlowConfig& cfg, const Vec& x,
                         const std::vector<SingularElement>& elements,
                         const ClassifyOptions& opt) {
    if (elements.empty()) throw ConfigError("no singular elements declared");
    return classify_impl(field.reversed(), space, cfg, x, elements, opt);
}

ConnectionOrder build_partial_order(const VectorFieldSpec& field, const StateSpace& space,
                                    const FlowConfig& cfg,
                                    const std::vector<SingularElement>& elements,
                                    int n_samples, std::uint64_t seed,
                                    const OrderOptions& opt) {
    std::vector<Vec> samples = quasi_uniform(space, n_samples, seed);
    std::vector<int> omega(samples.size()), alpha(samples.size());
    std::exception_ptr err;

#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < static_cast<long>(samples.size()); ++k) {
        try {
            omega[k] = classify_omega_limit(field, space, cfg, samples[k], elements,
                                            opt.classify);
            alpha[k] = classify_alpha_limit(field, space, cfg, samples[k], elements,
                                            opt.classify);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    ConnectionOrder order;
    long unresolved = 0;
    std::map<std::pair<int, int>, std::vector<Vec>> reps;
    for (size_t k = 0; k < samples.size(); ++k) {
        if (omega[k] == kUnresolved || alpha[k] == kUnresolved) { ++unresolved; continue; }
        auto key = std::make_pair(alpha[k], omega[k]);
        auto& v = reps[key];
        if (static_cast<int>(v.size()) < opt.max_representatives) v.push_back(samples[k]);
    }
    order.unresolved_fraction = static_cast<double>(unresolved) / samples.size();
    if (order.unresolved_fraction > opt.unresolved_threshold) {
        std::ostringstream os;
        os << "unresolved fraction " << order.unresolved_fraction << " exceeds threshold "
           << opt.unresolved_threshold;
        throw TooManyUnresolved(os.str());
    }
    // Reflexive pairs: points on an element stay there.
    for (const SingularElement& e : elements) {
        auto key = std::make_pair(e.id, e.id);
        if (reps[key].empty()) reps[key].push_back(e.point);
    }
    for (auto& [key, v] : reps) {
        if (key.first != key.second) {
            auto rev = std::make_pair(key.second, key.first);
            if (reps.count(rev) && !reps[rev].empty() && key.first < key.second) {
                std::ostringstream os;
                os << "both (" << key.first << "," << key.second << ") and its reverse "
                   << "are witnessed: not a partial order";
                throw OrderViolation(os.str());
            }
        }
        order.pairs.push_back(key);
        order.representatives[key] = v;
    }
    std::sort(order.pairs.begin(), order.pairs.end());
    return order;
}

DiscreteSystem build_ms_system(const ConnectionOrder& order, std::vector<double> time_grid) {
    int n = static_cast<int>(order.pairs.size());
    auto phi = [](double, CellId z) { return std::vector<CellId>{z}; };
    DiscreteSystem D(n, phi, std::move(time_grid));
    D.tag_over_approximation(true);
    return D;
}

OrderedCover cells_as_cover(const ConnectionOrder& order, const VectorFieldSpec& field,
                            const StateSpace& space, const FlowConfig& cfg,
                            const std::vector<SingularElement>& elements,
                            const ClassifyOptions& opt) {
    std::vector<Region> regions;
    for (auto [i, j] : order.pairs) {
        VectorFieldSpec f = field;
        std::vector<SingularElement> els = elements;
        auto pred = [f, space, cfg, els, opt, i = i, j = j](const Vec& x) {
            int a = classify_alpha_limit(f, space, cfg, x, els, opt);
            if (a != i) return false;
            return classify_omega_limit(f, space, cfg, x, els, opt) == j;
        };
        std::ostringstream os;
        os << "W(" << i << "," << j << ")";
        regions.push_back(Region::predicate(pred, os.str()));
    }
    return OrderedCover(space, std::move(regions));
}

}  // namespace dynab
