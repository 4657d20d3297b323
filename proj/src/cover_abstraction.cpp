#include "dynab/cover_abstraction.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "dynab/prng.hpp"

namespace dynab {

double LinearFamily::max_norm() const {
    double m = 0.0;
    for (const Mat& L : matrices) m = std::max(m, L.operatorNorm());
    return m;
}

namespace {

Vec draw_alpha(Prng& rng, int l, AlphaNorm norm) {
    Vec a(l);
    if (norm == AlphaNorm::Sphere) {
        double s2 = 0.0;
        for (int i = 0; i < l; ++i) {
            a[i] = std::abs(rng.gaussian());
            s2 += a[i] * a[i];
        }
        if (s2 == 0.0) { a.setZero(); a[0] = 1.0; return a; }
        return a / std::sqrt(s2);
    }
    // Simplex: normalized exponentials.
    double s = 0.0;
    for (int i = 0; i < l; ++i) {
        double u = rng.uniform();
        a[i] = -std::log(u > 0 ? u : 0x1.0p-53);
        s += a[i];
    }
    return a / s;
}

}  // namespace

std::vector<Vec> pol_sample(const std::vector<Vec>& vectors, int n, std::uint64_t seed,
                            AlphaNorm norm) {
    int l = static_cast<int>(vectors.size());
    std::vector<Vec> out;
    out.reserve(n + l);
    for (int i = 0; i < l; ++i) out.push_back(vectors[i]);  // vertices alpha = e_i
    Prng rng(seed);
    for (int k = 0; k < n; ++k) {
        Vec a = draw_alpha(rng, l, norm);
        Vec p = Vec::Zero(vectors.front().size());
        for (int i = 0; i < l; ++i) p += a[i] * vectors[i];
        out.push_back(p);
    }
    return out;
}

Vec nnls(const Mat& M, const Vec& b) {
    // Lawson-Hanson active set; problem sizes here are tiny.
    int l = static_cast<int>(M.cols());
    std::vector<bool> passive(l, false);
    Vec x = Vec::Zero(l);
    for (int outer = 0; outer < 4 * l + 8; ++outer) {
        Vec w = M.transpose() * (b - M * x);
        int best = -1;
        double best_w = 1e-12;
        for (int i = 0; i < l; ++i)
            if (!passive[i] && w[i] > best_w) { best_w = w[i]; best = i; }
        if (best < 0) break;
        passive[best] = true;
        for (int inner = 0; inner < 4 * l + 8; ++inner) {
            std::vector<int> idx;
            for (int i = 0; i < l; ++i)
                if (passive[i]) idx.push_back(i);
            Mat Mp(M.rows(), idx.size());
            for (size_t j = 0; j < idx.size(); ++j) Mp.col(j) = M.col(idx[j]);
            Vec zp = Mp.colPivHouseholderQr().solve(b);
            bool feasible = true;
            for (size_t j = 0; j < idx.size(); ++j)
                if (zp[j] <= 0) feasible = false;
            if (feasible) {
                x.setZero();
                for (size_t j = 0; j < idx.size(); ++j) x[idx[j]] = zp[j];
                break;
            }
            double alpha = 1.0;
            for (size_t j = 0; j < idx.size(); ++j)
                if (zp[j] <= 0)
                    alpha = std::min(alpha, x[idx[j]] / (x[idx[j]] - zp[j]));
            for (size_t j = 0; j < idx.size(); ++j) {
                x[idx[j]] += alpha * (zp[j] - x[idx[j]]);
                if (x[idx[j]] <= 1e-14) { x[idx[j]] = 0.0; passive[idx[j]] = false; }
            }
        }
    }
    return x;
}

InclusionReport check_inclusion(const VectorFieldSpec& spec, const StateSpace& space,
                                const LinearFamily& fam, int n_points, double tol,
                                std::uint64_t seed) {
    InclusionReport rep;
    rep.included = true;
    int l = fam.count();
    for (const Vec& x : quasi_uniform(space, n_points, seed)) {
        Vec xi = spec.rhs(x);
        Mat M(x.size(), l);
        for (int i = 0; i < l; ++i) M.col(i) = fam.matrices[i] * x;
        Vec a = nnls(M, xi);
        if (a.norm() == 0.0) { a.setZero(); a[0] = 1.0; }
        a /= a.norm();
        // Projected-gradient polish on the nonnegative unit sphere.
        double eta = 0.5 / std::max(1.0, (M.transpose() * M).operatorNorm());
        for (int it = 0; it < 200; ++it) {
            Vec g = M.transpose() * (M * a - xi);
            Vec an = a - eta * g;
            for (int i = 0; i < l; ++i) an[i] = std::max(an[i], 0.0);
            double n2 = an.norm();
            if (n2 == 0.0) break;
            a = an / n2;
        }
        double res = (xi - M * a).norm();
        if (res > rep.worst_residual) {
            rep.worst_residual = res;
            rep.worst_point = x;
        }
        if (res > tol * (1.0 + xi.norm())) rep.included = false;
    }
    return rep;
}

double default_bloat(double step, const LinearFamily& fam, double t) {
    return 2.0 * step * step * fam.max_norm() * t;
}

std::vector<CellId> compute_phi_ex1(const OrderedCover& cover, const LinearFamily& fam,
                                    double t, CellId z, const CoverAbstractionOptions& opt,
                                    double step, std::uint64_t seed) {
    if (t < 0) throw ConfigError("compute_phi_ex1 requires t >= 0");
    int l = fam.count();
    int dim = fam.dim();
    double bloat = opt.bloat >= 0 ? opt.bloat : default_bloat(step, fam, t);

    std::vector<Mat> expo;
    expo.reserve(l);
    for (const Mat& L : fam.matrices) expo.push_back(Mat((t * L).exp()));

    std::vector<Vec> starts = cover.sample_cell(z, opt.vertex_samples, seed);
    if (cover.region(z).kind() == Region::Kind::HyperRect)
        for (Vec& c : cover.region(z).rect_corners()) starts.push_back(c);

    std::vector<bool> hit(cover.size(), false);
    // Images that leave the space are skipped: the enclosure only speaks
    // about behavior inside the covered domain.
    auto mark = [&](const Vec& p) {
        if (auto z0 = cover.try_abstract_point(p)) hit[*z0] = true;
        if (bloat > 0.0) {
            for (int i = 0; i < dim; ++i)
                for (double s : {-bloat, bloat}) {
                    Vec pb = p;
                    pb[i] += s;
                    if (auto zz = cover.try_abstract_point(pb)) hit[*zz] = true;
                }
        }
    };

    Prng rng(Prng::derive(seed, 0x2E));
    for (const Vec& x : starts) {
        std::vector<Vec> verts(l);
        for (int i = 0; i < l; ++i) verts[i] = expo[i] * x;
        for (int i = 0; i < l; ++i) mark(verts[i]);
        for (int k = 0; k < opt.alpha_samples; ++k) {
            Vec a = draw_alpha(rng, l, opt.alpha_norm);
            Vec p = Vec::Zero(dim);
            for (int i = 0; i < l; ++i) p += a[i] * verts[i];
            mark(p);
        }
    }

    std::vector<CellId> out;
    for (CellId zz = 0; zz < cover.size(); ++zz)
        if (hit[zz]) out.push_back(zz);
    return out;
}

DiscreteSystem build_ex1_system(const OrderedCover& cover, const LinearFamily& fam,
                                const CoverAbstractionOptions& opt, double step,
                                std::vector<double> time_grid, std::uint64_t seed,
                                bool inclusion_verified) {
    auto phi = [cover, fam, opt, step, seed](double t, CellId z) {
        return compute_phi_ex1(cover, fam, t, z, opt, step,
                               Prng::derive(seed, static_cast<std::uint64_t>(z)));
    };
    DiscreteSystem D(cover.size(), phi, std::move(time_grid));
    D.tag_over_approximation(inclusion_verified);
    return D;
}

}  // namespace dynab
