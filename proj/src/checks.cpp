#include "dynab/checks.hpp"

#include <algorithm>
#include <cmath>

#include "dynab/prng.hpp"

namespace dynab {

namespace {

bool contains_id(const std::vector<CellId>& v, CellId z) {
    return std::binary_search(v.begin(), v.end(), z);
}

std::vector<Vec> uniform_points(const StateSpace& space, long n, std::uint64_t seed) {
    Prng rng(seed);
    std::vector<Vec> out;
    out.reserve(n);
    for (long k = 0; k < n; ++k) {
        Vec p(space.dim());
        for (int i = 0; i < space.dim(); ++i)
            p[i] = rng.uniform(space.lower(i), space.upper(i));
        out.push_back(p);
    }
    return out;
}

ApproximationReport over_check_impl(const ContinuousSystem& C, const DiscreteSystem& D,
                                    const OrderedCover& A, int n_points,
                                    const std::vector<double>& time_grid,
                                    std::uint64_t seed, bool parallel) {
    std::vector<double> grid = time_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<Vec> points = quasi_uniform(C.space, n_points, Prng::derive(seed, 0xA1));
    D.warm_cache();
    for (double t : grid)
        for (CellId z = 0; z < A.size(); ++z) D.phi(t, z);

    std::vector<std::vector<Violation>> per_sample(points.size());
    std::exception_ptr err;

#pragma omp parallel for schedule(static) if (parallel)
    for (long k = 0; k < static_cast<long>(points.size()); ++k) {
        try {
            const Vec& x = points[k];
            CellId z0 = A.abstract_point(x);
            Vec cur = x;
            double t_cur = 0.0;
            for (double t : grid) {
                cur = flow(C.field, C.space, C.cfg, t - t_cur, cur);
                t_cur = t;
                CellId z1 = A.abstract_point(cur);
                std::vector<CellId> pred = D.phi(t, z0);
                if (!contains_id(pred, z1))
                    per_sample[k].push_back(Violation{t, z0, z1, pred, x});
            }
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    ApproximationReport rep;
    rep.kind = ApproximationReport::Kind::Over;
    rep.checked = static_cast<long>(points.size()) * static_cast<long>(grid.size());
    for (auto& v : per_sample)
        rep.violations.insert(rep.violations.end(), v.begin(), v.end());
    rep.verdict = rep.violations.empty();
    return rep;
}

ApproximationReport under_check_impl(const ContinuousSystem& C, const DiscreteSystem& D,
                                     const OrderedCover& A, int n_points,
                                     const std::vector<double>& time_grid,
                                     std::uint64_t seed, bool parallel) {
    std::vector<double> grid = time_grid;
    std::sort(grid.begin(), grid.end());
    D.warm_cache();
    for (double t : grid)
        for (CellId z = 0; z < A.size(); ++z) D.phi(t, z);

    std::vector<std::vector<Violation>> per_cell(A.size());
    std::exception_ptr err;

#pragma omp parallel for schedule(static) if (parallel)
    for (CellId z = 0; z < A.size(); ++z) {
        try {
            std::vector<Vec> starts =
                A.sample_cell(z, n_points, Prng::derive(seed, 0xB2));
            // One trajectory per start, advanced through the sorted grid.
            std::vector<Vec> cur = starts;
            std::vector<double> t_cur(starts.size(), 0.0);
            for (double t : grid) {
                std::vector<bool> observed(A.size(), false);
                for (size_t k = 0; k < cur.size(); ++k) {
                    cur[k] = flow(C.field, C.space, C.cfg, t - t_cur[k], cur[k]);
                    t_cur[k] = t;
                    if (auto zz = A.try_abstract_point(cur[k])) observed[*zz] = true;
                }
                for (CellId zp : D.phi(t, z))
                    if (!observed[zp])
                        per_cell[z].push_back(Violation{t, z, zp, D.phi(t, z), Vec()});
            }
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    ApproximationReport rep;
    rep.kind = ApproximationReport::Kind::Under;
    rep.checked = static_cast<long>(A.size()) * static_cast<long>(grid.size());
    for (auto& v : per_cell)
        rep.violations.insert(rep.violations.end(), v.begin(), v.end());
    rep.verdict = rep.violations.empty();
    return rep;
}

ConservativenessEstimate volume_impl(const ContinuousSystem& C, const DiscreteSystem& D,
                                     const OrderedCover& A,
                                     const std::vector<double>& time_grid,
                                     const ConservativenessOptions& opt,
                                     std::uint64_t seed, bool parallel) {
    std::vector<Vec> mc = uniform_points(C.space, opt.mc_samples, Prng::derive(seed, 0xC3));
    std::vector<CellId> mc_cell(mc.size(), -1);
    std::exception_ptr err;
#pragma omp parallel for schedule(static) if (parallel)
    for (long k = 0; k < static_cast<long>(mc.size()); ++k) {
        if (auto z = A.try_abstract_point(mc[k])) mc_cell[k] = *z;
    }

    double vol = C.space.volume();
    ConservativenessEstimate est;
    est.mc_samples = opt.mc_samples;
    double worst_p = 0.0;

    for (double t : time_grid) {
        std::vector<double> per_cell(A.size(), 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (CellId z = 0; z < A.size(); ++z) {
            try {
                std::vector<CellId> image = sampled_image_cells(
                    C, A, z, t, opt.preimage_samples, Prng::derive(seed, 0xD4), opt.bloat);
                std::vector<CellId> pred = D.phi(t, z);
                std::vector<bool> excess(A.size(), false);
                for (CellId zp : pred)
                    if (!contains_id(image, zp)) excess[zp] = true;
                long hits = 0;
                for (size_t k = 0; k < mc.size(); ++k)
                    if (mc_cell[k] >= 0 && excess[mc_cell[k]]) ++hits;
                per_cell[z] = static_cast<double>(hits) / mc.size() * vol;
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        double worst = 0.0;
        for (double v : per_cell) worst = std::max(worst, v);
        est.per_time[t] = worst;
        if (worst >= est.value) {
            est.value = worst;
            worst_p = worst / vol;
        }
    }
    est.std_error =
        vol * std::sqrt(std::max(worst_p * (1.0 - worst_p), 1.0 / est.mc_samples) /
                        est.mc_samples);
    return est;
}

}  // namespace

ApproximationReport check_over_approximation(const ContinuousSystem& C,
                                             const DiscreteSystem& D,
                                             const OrderedCover& A, int n_points,
                                             const std::vector<double>& time_grid,
                                             std::uint64_t seed) {
    return over_check_impl(C, D, A, n_points, time_grid, seed, true);
}

ApproximationReport check_over_approximation_serial(const ContinuousSystem& C,
                                                    const DiscreteSystem& D,
                                                    const OrderedCover& A, int n_points,
                                                    const std::vector<double>& time_grid,
                                                    std::uint64_t seed) {
    return over_check_impl(C, D, A, n_points, time_grid, seed, false);
}

ApproximationReport check_under_approximation(const ContinuousSystem& C,
                                              const DiscreteSystem& D,
                                              const OrderedCover& A, int n_points,
                                              const std::vector<double>& time_grid,
                                              std::uint64_t seed) {
    return under_check_impl(C, D, A, n_points, time_grid, seed, true);
}

ApproximationReport check_under_approximation_serial(const ContinuousSystem& C,
                                                     const DiscreteSystem& D,
                                                     const OrderedCover& A, int n_points,
                                                     const std::vector<double>& time_grid,
                                                     std::uint64_t seed) {
    return under_check_impl(C, D, A, n_points, time_grid, seed, false);
}

ApproximationReport check_complete(const ContinuousSystem& C, const DiscreteSystem& D,
                                   const OrderedCover& A, int n_points,
                                   const std::vector<double>& time_grid,
                                   std::uint64_t seed) {
    ApproximationReport over = check_over_approximation(C, D, A, n_points, time_grid, seed);
    ApproximationReport under = check_under_approximation(C, D, A, n_points, time_grid, seed);
    ApproximationReport rep;
    rep.kind = ApproximationReport::Kind::Complete;
    rep.checked = over.checked + under.checked;
    rep.violations = over.violations;
    rep.violations.insert(rep.violations.end(), under.violations.begin(),
                          under.violations.end());
    rep.verdict = over.verdict && under.verdict;
    return rep;
}

ConservativenessEstimate conservativeness_volume(const ContinuousSystem& C,
                                                 const DiscreteSystem& D,
                                                 const OrderedCover& A,
                                                 const std::vector<double>& time_grid,
                                                 const ConservativenessOptions& opt,
                                                 std::uint64_t seed) {
    return volume_impl(C, D, A, time_grid, opt, seed, true);
}

ConservativenessEstimate conservativeness_volume_serial(const ContinuousSystem& C,
                                                        const DiscreteSystem& D,
                                                        const OrderedCover& A,
                                                        const std::vector<double>& time_grid,
                                                        const ConservativenessOptions& opt,
                                                        std::uint64_t seed) {
    return volume_impl(C, D, A, time_grid, opt, seed, false);
}

std::vector<CellId> discrete_reach(const DiscreteSystem& D, const std::vector<CellId>& init,
                                   double t) {
    std::vector<CellId> out;
    for (CellId z : init) {
        std::vector<CellId> img = D.phi(t, z);
        out.insert(out.end(), img.begin(), img.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SafetyVerdict verify_safety(const DiscreteSystem& D, const OrderedCover& A,
                            const Region& init_region, const Region& unsafe_region,
                            double horizon, const std::vector<double>& time_grid,
                            std::uint64_t seed, int cell_samples) {
    if (!D.over_approximation_tag())
        throw NotOverApproximation(
            "safety queries require an over-approximation tag on the discrete system");

    auto cells_touching = [&](const Region& r, std::uint64_t tag) {
        std::vector<bool> hit(A.size(), false);
        for (CellId z = 0; z < A.size(); ++z)
            for (const Vec& p : A.sample_cell(z, cell_samples, Prng::derive(seed, tag)))
                if (r.contains(A.space(), p)) { hit[z] = true; break; }
        // Also abstract samples of the region itself, so regions smaller
        // than the cell sample spacing still register.
        try {
            for (const Vec& p : r.sample(A.space(), cell_samples, Prng::derive(seed, tag ^ 1)))
                if (auto z = A.try_abstract_point(p)) hit[*z] = true;
        } catch (const EmptyRegion&) {
        }
        std::vector<CellId> out;
        for (CellId z = 0; z < A.size(); ++z)
            if (hit[z]) out.push_back(z);
        return out;
    };

    std::vector<CellId> init = cells_touching(init_region, 0xE5);
    std::vector<CellId> unsafe = cells_touching(unsafe_region, 0xF6);

    std::vector<double> grid = time_grid;
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    for (double t : grid) {
        if (t > horizon) break;
        std::vector<CellId> reach = discrete_reach(D, init, t);
        std::vector<CellId> bad;
        std::set_intersection(reach.begin(), reach.end(), unsafe.begin(), unsafe.end(),
                              std::back_inserter(bad));
        if (!bad.empty()) return SafetyVerdict{false, t, bad};
    }
    return SafetyVerdict{true, 0.0, {}};
}

std::vector<CellId> sampled_image_cells(const ContinuousSystem& C, const OrderedCover& A,
                                        CellId z, double t, int n_samples,
                                        std::uint64_t seed, double bloat) {
    std::vector<Vec> starts = A.sample_cell(z, n_samples, seed);
    std::vector<bool> hit(A.size(), false);
    Prng rng(Prng::derive(seed, 0x1B));
    for (const Vec& x : starts) {
        Vec y = flow(C.field, C.space, C.cfg, t, x);
        hit[A.abstract_point(y)] = true;
        if (bloat > 0.0) {
            for (int i = 0; i < C.space.dim(); ++i) {
                for (double s : {-bloat, bloat}) {
                    Vec yb = y;
                    yb[i] += s;
                    if (auto zz = A.try_abstract_point(yb)) hit[*zz] = true;
                }
            }
            for (int k = 0; k < 4; ++k) {
                Vec d(C.space.dim());
                for (int i = 0; i < C.space.dim(); ++i) d[i] = rng.gaussian();
                if (d.norm() > 0) d *= bloat / d.norm();
                if (auto zz = A.try_abstract_point(y + d)) hit[*zz] = true;
            }
        }
    }
    std::vector<CellId> out;
    for (CellId zz = 0; zz < A.size(); ++zz)
        if (hit[zz]) out.push_back(zz);
    return out;
}

}  // namespace dynab
