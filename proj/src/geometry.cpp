#include "dynab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dynab/prng.hpp"

namespace dynab {

namespace {

std::string point_str(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

}  // namespace

StateSpace::StateSpace(Kind kind, std::vector<std::pair<double, double>> bounds)
    : kind_(kind), bounds_(std::move(bounds)) {
    if (bounds_.empty()) throw ConfigError("state space needs at least one dimension");
    for (auto& [lo, hi] : bounds_)
        if (!(lo < hi)) throw ConfigError("state space bounds need lower < upper");
}

Vec StateSpace::canonicalize(const Vec& x) const {
    if (kind_ == Kind::Box) return x;
    Vec y = x;
    for (int i = 0; i < dim(); ++i) {
        double p = period(i);
        double v = std::fmod(y[i] - lower(i), p);
        if (v < 0) v += p;
        y[i] = lower(i) + v;
    }
    return y;
}

bool StateSpace::contains(const Vec& x, double tol) const {
    if (kind_ == Kind::Torus) return true;
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lower(i) - tol || x[i] > upper(i) + tol) return false;
    return true;
}

Vec StateSpace::displacement(const Vec& a, const Vec& b) const {
    Vec d = a - b;
    if (kind_ == Kind::Torus) {
        for (int i = 0; i < dim(); ++i) {
            double p = period(i);
            d[i] = std::remainder(d[i], p);
        }
    }
    return d;
}

double StateSpace::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= period(i);
    return v;
}

double StateSpace::diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
        double e = period(i);
        if (kind_ == Kind::Torus) e *= 0.5;
        s += e * e;
    }
    return std::sqrt(s);
}

MetricSpec MetricSpec::quadratic(const Mat& P) {
    MetricSpec m;
    m.kind_ = Kind::QuadraticForm;
    m.P_ = P;
    Eigen::SelfAdjointEigenSolver<Mat> es(P);
    m.lambda_min_ = es.eigenvalues().minCoeff();
    m.lambda_max_ = es.eigenvalues().maxCoeff();
    if (m.lambda_min_ <= 0) throw ConfigError("metric form must be positive definite");
    return m;
}

double MetricSpec::distance(const StateSpace& space, const Vec& a, const Vec& b) const {
    Vec d = space.displacement(a, b);
    if (kind_ == Kind::Euclidean) {
        if (space.kind() == StateSpace::Kind::Box) return d.norm();
        return d.norm();  // shortest-representative displacement already taken
    }
    if (space.kind() == StateSpace::Kind::Box) return std::sqrt(d.dot(P_ * d));
    // Quadratic form on a torus: the per-axis shortest representative need
    // not minimize the form, so scan neighbor shifts.
    int dim = space.dim();
    std::vector<int> shift(dim, -1);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        Vec e = d;
        for (int i = 0; i < dim; ++i) e[i] += shift[i] * space.period(i);
        best = std::min(best, e.dot(P_ * e));
        int i = 0;
        while (i < dim && ++shift[i] > 1) shift[i++] = -1;
        if (i == dim) break;
    }
    return std::sqrt(best);
}

Region Region::hyper_rect(std::vector<std::pair<double, double>> bounds) {
    Region r;
    r.kind_ = Kind::HyperRect;
    r.rect_ = std::move(bounds);
    return r;
}

Region Region::metric_ball(Vec center, double radius, MetricSpec metric) {
    Region r;
    r.kind_ = Kind::MetricBall;
    r.center_ = std::move(center);
    r.radius_ = radius;
    r.metric_ = std::move(metric);
    return r;
}

Region Region::slab(std::function<bool(const Vec&)> contains, std::string label) {
    Region r;
    r.kind_ = Kind::Slab;
    r.pred_ = std::move(contains);
    r.label_ = std::move(label);
    return r;
}

Region Region::predicate(std::function<bool(const Vec&)> contains, std::string label) {
    Region r;
    r.kind_ = Kind::Predicate;
    r.pred_ = std::move(contains);
    r.label_ = std::move(label);
    return r;
}

bool Region::contains(const StateSpace& space, const Vec& x_in) const {
    Vec x = space.canonicalize(x_in);
    switch (kind_) {
        case Kind::HyperRect:
            for (size_t i = 0; i < rect_.size(); ++i)
                if (x[static_cast<int>(i)] < rect_[i].first ||
                    x[static_cast<int>(i)] > rect_[i].second)
                    return false;
            return true;
        case Kind::MetricBall:
            return metric_.distance(space, center_, x) < radius_;
        case Kind::Slab:
        case Kind::Predicate:
            return pred_(x);
    }
    return false;
}

std::vector<Vec> Region::sample(const StateSpace& space, int n, std::uint64_t seed) const {
    Prng rng(seed);
    std::vector<Vec> out;
    out.reserve(n);
    int dim = space.dim();
    if (kind_ == Kind::HyperRect) {
        for (int k = 0; k < n; ++k) {
            Vec p(dim);
            for (int i = 0; i < dim; ++i)
                p[i] = rng.uniform(rect_[i].first, rect_[i].second);
            out.push_back(space.canonicalize(p));
        }
        return out;
    }
    // Rejection from a bounding box.
    std::vector<std::pair<double, double>> box;
    for (int i = 0; i < dim; ++i) box.emplace_back(space.lower(i), space.upper(i));
    if (kind_ == Kind::MetricBall) {
        double extent = radius_ / std::sqrt(metric_.lambda_min());
        for (int i = 0; i < dim; ++i) {
            double lo = center_[i] - extent, hi = center_[i] + extent;
            if (space.kind() == StateSpace::Kind::Box) {
                lo = std::max(lo, space.lower(i));
                hi = std::min(hi, space.upper(i));
            }
            box[i] = {lo, hi};
        }
    }
    long budget = static_cast<long>(kSampleBudget) * std::max(1, n);
    while (static_cast<int>(out.size()) < n && budget-- > 0) {
        Vec p(dim);
        for (int i = 0; i < dim; ++i) p[i] = rng.uniform(box[i].first, box[i].second);
        p = space.canonicalize(p);
        if (contains(space, p)) out.push_back(p);
    }
    if (static_cast<int>(out.size()) < n)
        throw EmptyRegion("rejection sampling exhausted its budget for region " + label_);
    return out;
}

std::vector<Vec> Region::rect_corners() const {
    std::vector<Vec> corners;
    int dim = static_cast<int>(rect_.size());
    for (int mask = 0; mask < (1 << dim); ++mask) {
        Vec c(dim);
        for (int i = 0; i < dim; ++i)
            c[i] = (mask >> i) & 1 ? rect_[i].second : rect_[i].first;
        corners.push_back(c);
    }
    return corners;
}

CellId OrderedCover::abstract_point(const Vec& x) const {
    auto z = try_abstract_point(x);
    if (!z) throw NotCovered("point " + point_str(x) + " lies in no region of the cover");
    return *z;
}

std::optional<CellId> OrderedCover::try_abstract_point(const Vec& x_in) const {
    Vec x = space_.canonicalize(x_in);
    for (CellId z = 0; z < size(); ++z)
        if (regions_[z].contains(space_, x)) return z;
    return std::nullopt;
}

std::vector<Vec> OrderedCover::sample_cell(CellId z, int n, std::uint64_t seed) const {
    return regions_[z].sample(space_, n, Prng::derive(seed, static_cast<std::uint64_t>(z)));
}

std::pair<bool, OrderedCover::PartitionWitness> OrderedCover::is_partition(
    int samples, std::uint64_t seed) const {
    for (const Vec& x : quasi_uniform(space_, samples, seed)) {
        CellId first = -1;
        for (CellId z = 0; z < size(); ++z) {
            if (!regions_[z].contains(space_, x)) continue;
            if (first < 0) { first = z; continue; }
            return {false, PartitionWitness{x, first, z}};
        }
    }
    return {true, PartitionWitness{}};
}

OrderedCover build_ordered_cover(const StateSpace& space, std::vector<Region> regions,
                                 int coverage_samples, std::uint64_t seed) {
    if (regions.empty()) throw ConfigError("cover needs at least one region");
    if (coverage_samples < 1) throw ConfigError("coverage_samples must be >= 1");
    OrderedCover cover(space, std::move(regions));
    for (const Vec& x : quasi_uniform(space, coverage_samples, seed)) {
        if (!cover.try_abstract_point(x))
            throw CoverageGap("sampled point " + point_str(x) + " lies in no region");
    }
    return cover;
}

std::vector<Vec> quasi_uniform(const StateSpace& space, int n, std::uint64_t seed) {
    int dim = space.dim();
    std::vector<Vec> out;
    out.reserve(n);
    // Generalized golden-ratio (R_d) Kronecker sequence.
    double g = 2.0;
    for (int it = 0; it < 32; ++it) g = std::pow(1.0 + g, 1.0 / (dim + 1));
    std::vector<double> alpha(dim);
    for (int i = 0; i < dim; ++i) alpha[i] = std::pow(1.0 / g, i + 1);
    Prng rng(Prng::derive(seed, 0x71d5));
    std::vector<double> offset(dim);
    for (int i = 0; i < dim; ++i) offset[i] = rng.uniform();
    int n_lattice = n / 2;
    for (int k = 0; k < n_lattice; ++k) {
        Vec p(dim);
        for (int i = 0; i < dim; ++i) {
            double u = std::fmod(offset[i] + alpha[i] * (k + 1), 1.0);
            p[i] = space.lower(i) + u * space.period(i);
        }
        out.push_back(p);
    }
    for (int k = n_lattice; k < n; ++k) {
        Vec p(dim);
        for (int i = 0; i < dim; ++i)
            p[i] = rng.uniform(space.lower(i), space.upper(i));
        out.push_back(p);
    }
    return out;
}

std::vector<Region> grid_partition(const StateSpace& space, const std::vector<int>& counts) {
    int dim = space.dim();
    if (static_cast<int>(counts.size()) != dim)
        throw ConfigError("grid_partition counts must match dimension");
    std::vector<Region> regions;
    std::vector<int> idx(dim, 0);
    for (;;) {
        std::vector<std::pair<double, double>> bounds;
        for (int i = 0; i < dim; ++i) {
            double h = space.period(i) / counts[i];
            bounds.emplace_back(space.lower(i) + idx[i] * h,
                                space.lower(i) + (idx[i] + 1) * h);
        }
        regions.push_back(Region::hyper_rect(std::move(bounds)));
        int i = 0;
        while (i < dim && ++idx[i] >= counts[i]) idx[i++] = 0;
        if (i == dim) break;
    }
    return regions;
}

}  // namespace dynab
