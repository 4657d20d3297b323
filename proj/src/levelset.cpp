#include "dynab/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dynab/prng.hpp"

namespace dynab {

Vec LevelFunction::gradient_at(const Vec& x) const {
    if (gradient) return gradient(x);
    double h = 1e-6 * (1.0 + x.norm());
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (value(xp) - value(xm)) / (2.0 * h);
    }
    return g;
}

void LevelFamily::validate() const {
    if (functions.empty() || functions.size() != levels.size())
        throw ConfigError("level family needs one level list per function");
    for (const auto& A : levels) {
        if (A.size() < 2) throw ConfigError("each level list needs at least two values");
        for (size_t j = 1; j < A.size(); ++j)
            if (!(A[j - 1] < A[j]))
                throw ConfigError("level values must be strictly increasing");
    }
}

bool LevelFamily::in_slab(const Vec& x, const std::vector<int>& z, double tol) const {
    for (int i = 0; i < count(); ++i) {
        double v = functions[i].value(x);
        double lo = slab_lower(i, z[i]), hi = slab_upper(i, z[i]);
        if (v < lo - tol || v > hi + tol) return false;
    }
    return true;
}

const TimingBox& BoxMap::box(const LevelIndexVector& z) const {
    auto it = boxes.find(z);
    if (it == boxes.end()) throw ConfigError("index vector outside the level grid");
    return it->second;
}

namespace {

std::string ivec_str(const LevelIndexVector& z) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
    os << ")";
    return os.str();
}

std::optional<Vec> project_to_level(const StateSpace& space, const LevelFunction& V,
                                    double a, Vec x) {
    for (int it = 0; it < 100; ++it) {
        double err = V.value(x) - a;
        if (std::abs(err) <= 1e-10 * (1.0 + std::abs(a)))
            return space.contains(x) ? std::optional<Vec>(space.canonicalize(x))
                                     : std::nullopt;
        Vec g = V.gradient_at(x);
        double g2 = g.squaredNorm();
        if (g2 < 1e-16) return std::nullopt;
        x -= (err / g2) * g;
    }
    return std::nullopt;
}

}  // namespace

DescentReport check_descent(const VectorFieldSpec& field, const StateSpace& space,
                            const FlowConfig& cfg, const LevelFamily& family,
                            int n_samples, std::uint64_t seed, double tol,
                            double eps_reg) {
    (void)cfg;
    family.validate();
    DescentReport rep;
    std::vector<Vec> xs = quasi_uniform(space, n_samples, seed);
    for (int i = 0; i < family.count(); ++i) {
        for (const Vec& x : xs) {
            double d = family.functions[i].gradient_at(x).dot(field.rhs(x));
            if (d > rep.worst) {
                rep.worst = d;
                rep.worst_point = x;
            }
            if (d > tol) rep.pass = false;
        }
        for (double a : family.levels[i]) {
            if (!std::isfinite(a)) continue;
            int found = 0;
            for (const Vec& x : quasi_uniform(space, 256, Prng::derive(seed, i * 131 + 7))) {
                auto p = project_to_level(space, family.functions[i], a, x);
                if (!p) continue;
                ++found;
                double gn = family.functions[i].gradient_at(*p).norm();
                rep.min_gradient_norm = std::min(rep.min_gradient_norm, gn);
                if (gn < eps_reg) rep.regular_values = false;
            }
            (void)found;  // a level set may miss the space; that is allowed
        }
    }
    return rep;
}

std::vector<Vec> level_set_points(const StateSpace& space, const LevelFunction& V, double a,
                                  int n_points, std::uint64_t seed) {
    std::vector<Vec> out;
    int budget = std::max(64 * n_points, 4096);
    std::vector<Vec> candidates = quasi_uniform(space, budget, seed);
    for (const Vec& x : candidates) {
        if (static_cast<int>(out.size()) >= n_points) break;
        if (auto p = project_to_level(space, V, a, x)) out.push_back(*p);
    }
    if (out.empty())
        throw LevelSetEmpty("no point of the level set " + V.name + " = " +
                            std::to_string(a) + " found in the state space");
    return out;
}

std::pair<double, double> compute_timing_interval(const VectorFieldSpec& field,
                                                  const StateSpace& space,
                                                  const FlowConfig& cfg,
                                                  const LevelFunction& V, double a_upper,
                                                  double a_lower, int n_trajectories,
                                                  std::uint64_t seed) {
    if (!(a_lower < a_upper)) throw ConfigError("timing interval needs a_lower < a_upper");
    if (!std::isfinite(a_lower)) return {kInf, kInf};  // floor slab is invariant
    std::vector<Vec> starts;
    if (std::isfinite(a_upper)) {
        starts = level_set_points(space, V, a_upper, n_trajectories, seed);
    } else {
        // No upper face: start anywhere in the slab.
        for (const Vec& x : quasi_uniform(space, 16 * n_trajectories, seed)) {
            if (static_cast<int>(starts.size()) >= n_trajectories) break;
            if (V.value(x) >= a_lower) starts.push_back(x);
        }
        if (starts.empty()) throw LevelSetEmpty("slab has no points in the state space");
    }
    double lo = kInf, hi = -kInf;
    bool any_cross = false, any_stuck = false;
    for (const Vec& x : starts) {
        auto t = first_crossing_time(field, space, cfg, x,
                                     [&](const Vec& p) { return V.value(p); }, a_lower,
                                     cfg.t_max);
        if (t) {
            any_cross = true;
            lo = std::min(lo, *t);
            hi = std::max(hi, *t);
        } else {
            any_stuck = true;
        }
    }
    if (!any_cross) return {kInf, kInf};
    if (any_stuck) hi = kInf;
    return {lo, hi};
}

BoxMap build_box_map(const VectorFieldSpec& field, const StateSpace& space,
                     const FlowConfig& cfg, const LevelFamily& family,
                     const BoxMapOptions& opt, std::uint64_t seed) {
    family.validate();
    int l = family.count();
    BoxMap bm;
    bm.family = &family;

    std::vector<LevelIndexVector> all;
    LevelIndexVector z(l, family.min_index());
    for (;;) {
        all.push_back(z);
        int i = l - 1;
        while (i >= 0 && ++z[i] > family.max_index(i)) z[i--] = family.min_index();
        if (i < 0) break;
    }

    std::vector<Vec> probe = quasi_uniform(space, opt.emptiness_samples,
                                           Prng::derive(seed, 0x5F));
    std::vector<TimingBox> results(all.size());
    std::exception_ptr err;

#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < static_cast<long>(all.size()); ++k) {
        try {
            const LevelIndexVector& zz = all[k];
            TimingBox box;
            box.intervals.assign(l, {kInf, kInf});
            bool empty = true;
            for (const Vec& x : probe)
                if (family.in_slab(x, zz)) { empty = false; break; }
            box.empty_cell = empty;
            if (!empty) {
                for (int i = 0; i < l; ++i) {
                    double a_hi = family.slab_upper(i, zz[i]);
                    double a_lo = family.slab_lower(i, zz[i]);
                    if (!std::isfinite(a_lo)) { box.intervals[i] = {kInf, kInf}; continue; }
                    // Starts on the upper face of coordinate i, restricted to
                    // the other coordinates' slabs.
                    std::vector<Vec> starts;
                    if (std::isfinite(a_hi)) {
                        std::uint64_t s =
                            Prng::derive(seed, static_cast<std::uint64_t>(k) * 31 + i);
                        for (const Vec& x :
                             quasi_uniform(space, 64 * opt.n_trajectories, s)) {
                            if (static_cast<int>(starts.size()) >= opt.n_trajectories)
                                break;
                            auto p = project_to_level(space, family.functions[i], a_hi, x);
                            if (!p) continue;
                            bool ok = true;
                            for (int j = 0; j < l && ok; ++j) {
                                if (j == i) continue;
                                double v = family.functions[j].value(*p);
                                ok = v >= family.slab_lower(j, zz[j]) - opt.slab_tol &&
                                     v <= family.slab_upper(j, zz[j]) + opt.slab_tol;
                            }
                            if (ok) starts.push_back(*p);
                        }
                    }
                    if (starts.empty()) { box.intervals[i] = {kInf, kInf}; continue; }
                    double lo = kInf, hi = -kInf;
                    bool any_cross = false, any_stuck = false;
                    for (const Vec& x : starts) {
                        auto t = first_crossing_time(
                            field, space, cfg, x,
                            [&](const Vec& p) { return family.functions[i].value(p); },
                            a_lo, cfg.t_max);
                        if (t) { any_cross = true; lo = std::min(lo, *t); hi = std::max(hi, *t); }
                        else any_stuck = true;
                    }
                    if (!any_cross) box.intervals[i] = {kInf, kInf};
                    else box.intervals[i] = {lo, any_stuck ? kInf : hi};
                }
            }
            results[k] = std::move(box);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    for (size_t k = 0; k < all.size(); ++k) {
        bm.boxes[all[k]] = results[k];
        if (!results[k].empty_cell) {
            bm.flat_id[all[k]] = static_cast<CellId>(bm.cells.size());
            bm.cells.push_back(all[k]);
        }
    }
    return bm;
}

std::vector<double> apply_L(const std::vector<TimingBox>& boxes) {
    if (boxes.empty()) throw ConfigError("apply_L needs at least one box");
    size_t l = boxes.front().intervals.size();
    std::vector<double> widths(l, 0.0);
    for (size_t i = 0; i < l; ++i) {
        double lo = 0.0, hi = 0.0;
        for (const TimingBox& b : boxes) {
            lo += b.intervals[i].first;
            hi += b.intervals[i].second;
        }
        widths[i] = (std::isinf(hi) || std::isinf(lo)) ? kInf : hi - lo;
    }
    return widths;
}

PhiResult compute_phi_ex4(const BoxMap& boxmap, double t, const LevelIndexVector& z,
                          PhiMode mode) {
    const LevelFamily& fam = *boxmap.family;
    int l = fam.count();

    auto valid = [&](const LevelIndexVector& zz) {
        for (int i = 0; i < l; ++i)
            if (zz[i] < fam.min_index() || zz[i] > fam.max_index(i)) return false;
        return !boxmap.box(zz).empty_cell;
    };
    if (!valid(z)) throw ConfigError("compute_phi_ex4: invalid cell " + ivec_str(z));

    if (mode == PhiMode::Verbatim) {
        // Ascend the sigma-chain z, z+1, ..; keep the longest chain whose
        // summed interval widths fit under (t,..,t).
        std::vector<TimingBox> chain{boxmap.box(z)};
        LevelIndexVector best = z;
        bool none = false;
        {
            std::vector<double> w = apply_L(chain);
            none = std::any_of(w.begin(), w.end(), [&](double v) { return v > t; });
        }
        LevelIndexVector cur = z;
        for (;;) {
            LevelIndexVector next = cur;
            for (int i = 0; i < l; ++i) next[i] += 1;
            if (!valid(next)) break;
            chain.push_back(boxmap.box(next));
            std::vector<double> w = apply_L(chain);
            if (std::any_of(w.begin(), w.end(), [&](double v) { return v > t; })) break;
            cur = next;
            if (!none) best = next;
        }
        if (none) return {z, true};
        return {best, false};
    }

    // Bounds mode: descend while the accumulated minimal transit of the
    // slabs left behind still fits within t.
    LevelIndexVector cur = z;
    std::vector<double> acc(l, 0.0);
    for (;;) {
        LevelIndexVector next = cur;
        bool ok = true;
        const TimingBox& b = boxmap.box(cur);
        for (int i = 0; i < l; ++i) {
            next[i] -= 1;
            double a = acc[i] + b.intervals[i].first;
            if (!(a <= t)) ok = false;
        }
        if (!ok || !valid(next)) break;
        for (int i = 0; i < l; ++i) acc[i] += b.intervals[i].first;
        cur = next;
    }
    return {cur, false};
}

OrderedCover cells_as_cover(const BoxMap& boxmap, const StateSpace& space) {
    const LevelFamily* fam = boxmap.family;
    std::vector<Region> regions;
    for (const LevelIndexVector& z : boxmap.cells) {
        auto pred = [fam, z](const Vec& x) { return fam->in_slab(x, z); };
        regions.push_back(Region::slab(pred, "slab" + ivec_str(z)));
    }
    return OrderedCover(space, std::move(regions));
}

DiscreteSystem build_ex4_system(const BoxMap& boxmap, std::vector<double> time_grid,
                                PhiMode mode) {
    auto phi = [bm = boxmap, mode](double t, CellId z) {
        PhiResult r = compute_phi_ex4(bm, t, bm.cells[z], mode);
        return std::vector<CellId>{bm.flat_id.at(r.cell)};
    };
    return DiscreteSystem(static_cast<int>(boxmap.cells.size()), phi, std::move(time_grid));
}

ApproximationReport completeness_suite(const VectorFieldSpec& field, const StateSpace& space,
                                       const FlowConfig& cfg, const LevelFamily& family,
                                       const BoxMap& boxmap, int n_points,
                                       const std::vector<double>& time_grid,
                                       std::uint64_t seed, PhiMode mode) {
    OrderedCover cover = cells_as_cover(boxmap, space);
    DiscreteSystem D = build_ex4_system(boxmap, time_grid, mode);
    ContinuousSystem C{field, space, cfg};
    return check_complete(C, D, cover, n_points, time_grid, seed);
}

}  // namespace dynab
