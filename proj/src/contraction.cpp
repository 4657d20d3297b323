#include "dynab/contraction.hpp"

#include <algorithm>
#include <cmath>

#include "dynab/prng.hpp"

namespace dynab {

FinslerLyapunovSpec FinslerLyapunovSpec::quadratic_form(const Mat& P) {
    FinslerLyapunovSpec s;
    s.quadratic = true;
    s.P = P;
    s.p = 2;
    s.V = [P](const Vec&, const Vec& w) { return w.dot(P * w); };
    return s;
}

FinslerLyapunovSpec FinslerLyapunovSpec::euclidean(int dim) {
    return quadratic_form(Mat::Identity(dim, dim));
}

FinslerReport check_finsler_conditions(const FinslerLyapunovSpec& spec,
                                       const StateSpace& space, int n_samples,
                                       std::uint64_t seed, double tol) {
    FinslerReport rep;
    Prng rng(seed);
    int dim = space.dim();
    std::vector<Vec> xs = quasi_uniform(space, n_samples, Prng::derive(seed, 0x3C));
    for (const Vec& x : xs) {
        Vec w(dim), v(dim);
        for (int i = 0; i < dim; ++i) { w[i] = rng.gaussian(); v[i] = rng.gaussian(); }
        if (w.norm() == 0) w[0] = 1.0;
        if (v.norm() == 0) v[0] = 1.0;

        double Vw = spec.V(x, w);
        if (!(Vw > 0)) rep.positivity = false;

        for (double lam : {0.5, 2.0, 10.0}) {
            double lhs = spec.V(x, lam * w);
            double rhs = std::pow(lam, spec.p) * Vw;
            double err = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
            rep.worst_homogeneity = std::max(rep.worst_homogeneity, err);
            if (err > tol) rep.homogeneity = false;
        }

        double inv_p = 1.0 / spec.p;
        double gap = std::pow(spec.V(x, v + w), inv_p) - std::pow(spec.V(x, v), inv_p) -
                     std::pow(Vw, inv_p);
        rep.worst_triangle = std::max(rep.worst_triangle, gap);
        if (gap > tol) rep.triangle = false;
    }
    return rep;
}

ContractionCertificate check_contraction_inequality(
    const VectorFieldSpec& field, const StateSpace& space, const FlowConfig& cfg,
    const FinslerLyapunovSpec& spec, const std::function<double(double)>& alpha,
    int n_samples, std::uint64_t seed, double tol,
    std::function<double(double, double)> user_envelope) {
    if (alpha(0.0) > tol)
        throw ConfigError("alpha must vanish at 0");
    {
        // Nondecreasing on a coarse grid.
        double prev = alpha(0.0);
        for (int i = 1; i <= 32; ++i) {
            double cur = alpha(i * 0.25);
            if (cur < prev - tol) throw ConfigError("alpha must be nondecreasing");
            prev = cur;
        }
    }

    ContractionCertificate cert;
    cert.alpha = alpha;
    cert.verdict = true;
    Prng rng(Prng::derive(seed, 0x4D));
    int dim = space.dim();
    double h = 1e-4;

    for (const Vec& x : quasi_uniform(space, n_samples, seed)) {
        Vec w(dim);
        for (int i = 0; i < dim; ++i) w[i] = rng.gaussian();
        if (w.norm() == 0) w[0] = 1.0;
        w /= w.norm();

        auto [xp, wp] = variational_flow(field, space, cfg, h, x, w);
        auto [xm, wm] = variational_flow(field, space, cfg, -h, x, w);
        double dVdt = (spec.V(xp, wp) - spec.V(xm, wm)) / (2.0 * h);
        double slack = dVdt + alpha(spec.V(x, w));
        cert.worst_slack = std::max(cert.worst_slack, slack);
        if (slack > tol * (1.0 + std::abs(spec.V(x, w)))) cert.verdict = false;
        ++cert.checked_points;
    }

    if (user_envelope) {
        cert.envelope = std::move(user_envelope);
    } else {
        // Detect a linear alpha(s) = c s on a sample grid.
        double c = alpha(1.0);
        bool linear = true;
        for (double s : {0.25, 0.5, 2.0, 4.0})
            if (std::abs(alpha(s) - c * s) > 1e-9 * (1.0 + std::abs(c * s))) linear = false;
        if (linear && c > 0) {
            double rate = c / spec.p;
            cert.envelope = [rate](double t, double r) { return std::exp(-rate * t) * r; };
        } else {
            cert.envelope = [](double, double r) { return r; };
        }
    }
    return cert;
}

DiskCover build_disk_cover(const StateSpace& space, const MetricSpec& metric, double radius,
                           int coverage_samples, std::uint64_t seed) {
    if (!(radius > 0)) throw ConfigError("disk cover needs radius > 0");
    int dim = space.dim();
    // Axis spacing h such that any point is within x-distance h*sqrt(dim)/2
    // of a center, hence within metric distance sqrt(lambda_max) * that.
    double h = 2.0 * radius / (std::sqrt(static_cast<double>(dim)) *
                               std::sqrt(metric.lambda_max()));

    std::vector<int> counts(dim);
    for (int i = 0; i < dim; ++i)
        counts[i] = std::max(1, static_cast<int>(std::ceil(space.period(i) / h)));

    DiskCover dc{OrderedCover(space, {}), {}, {}, metric};
    std::vector<Region> regions;
    std::vector<int> idx(dim, 0);
    for (;;) {
        Vec c(dim);
        for (int i = 0; i < dim; ++i)
            c[i] = space.lower(i) + (idx[i] + 0.5) * space.period(i) / counts[i];
        dc.centers.push_back(c);
        dc.radii.push_back(radius);
        regions.push_back(Region::metric_ball(c, radius, metric));
        int i = dim - 1;  // lexicographic order by grid index
        while (i >= 0 && ++idx[i] >= counts[i]) idx[i--] = 0;
        if (i < 0) break;
    }
    dc.cover = build_ordered_cover(space, std::move(regions), coverage_samples, seed);
    return dc;
}

std::vector<CellId> compute_phi_ex2(const DiskCover& disks, const VectorFieldSpec& field,
                                    const StateSpace& space, const FlowConfig& cfg,
                                    const ContractionCertificate& cert, double t, CellId z) {
    if (!cert.verdict)
        throw NotContractive("contraction certificate did not pass; Phi refused");
    Vec y = flow(field, space, cfg, t, disks.centers[z]);
    double R = cert.envelope(t, disks.radii[z]);
    std::vector<CellId> out;
    for (CellId zz = 0; zz < disks.cover.size(); ++zz) {
        double d = disks.metric.distance(space, disks.centers[zz], y);
        if (d < disks.radii[zz] + R) out.push_back(zz);
    }
    return out;
}

DiscreteSystem build_ex2_system(const DiskCover& disks, const VectorFieldSpec& field,
                                const StateSpace& space, const FlowConfig& cfg,
                                const ContractionCertificate& cert,
                                std::vector<double> time_grid) {
    if (!cert.verdict)
        throw NotContractive("contraction certificate did not pass");
    auto phi = [disks, field, space, cfg, cert](double t, CellId z) {
        return compute_phi_ex2(disks, field, space, cfg, cert, t, z);
    };
    DiscreteSystem D(disks.cover.size(), phi, std::move(time_grid));
    D.tag_over_approximation(true);
    return D;
}

}  // namespace dynab
