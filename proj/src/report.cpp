#include "dynab/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dynab/prng.hpp"

namespace dynab {

std::string csv_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::uint64_t config_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::ofstream open_csv(const std::string& path, std::uint64_t hash) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open output file " + path);
    f << "# config-hash: " << hash << "\n";
    return f;
}

const char* region_kind_name(Region::Kind k) {
    switch (k) {
        case Region::Kind::HyperRect: return "hyper_rect";
        case Region::Kind::MetricBall: return "metric_ball";
        case Region::Kind::Slab: return "slab";
        case Region::Kind::Predicate: return "predicate";
    }
    return "?";
}

}  // namespace

void write_cells_csv(const std::string& path, const OrderedCover& cover,
                     std::uint64_t hash) {
    auto f = open_csv(path, hash);
    f << "cell,kind,parameters\n";
    for (CellId z = 0; z < cover.size(); ++z) {
        const Region& r = cover.region(z);
        f << z << "," << region_kind_name(r.kind()) << ",";
        if (r.kind() == Region::Kind::HyperRect) {
            bool first = true;
            for (auto [lo, hi] : r.rect_bounds()) {
                f << (first ? "" : " ") << csv_double(lo) << ".." << csv_double(hi);
                first = false;
            }
        } else if (r.kind() == Region::Kind::MetricBall) {
            f << "center";
            for (int i = 0; i < r.center().size(); ++i) f << " " << csv_double(r.center()[i]);
            f << " radius " << csv_double(r.radius());
        } else {
            f << r.label();
        }
        f << "\n";
    }
}

void write_phi_csv(const std::string& path, const DiscreteSystem& D, std::uint64_t hash) {
    auto f = open_csv(path, hash);
    f << "time,source,targets\n";
    for (double t : D.time_grid()) {
        for (CellId z = 0; z < D.n_states(); ++z) {
            f << csv_double(t) << "," << z << ",";
            bool first = true;
            for (CellId zz : D.phi(t, z)) {
                f << (first ? "" : ";") << zz;
                first = false;
            }
            f << "\n";
        }
    }
}

void write_boxmap_csv(const std::string& path, const BoxMap& bm, std::uint64_t hash) {
    auto f = open_csv(path, hash);
    int l = bm.family->count();
    f << "cell";
    for (int i = 0; i < l; ++i) f << ",z" << i;
    for (int i = 0; i < l; ++i) f << ",b_lo" << i << ",b_hi" << i;
    f << ",empty\n";
    for (const auto& [z, box] : bm.boxes) {
        auto it = bm.flat_id.find(z);
        f << (it == bm.flat_id.end() ? -1 : it->second);
        for (int i = 0; i < l; ++i) f << "," << z[i];
        for (int i = 0; i < l; ++i)
            f << "," << csv_double(box.intervals[i].first) << ","
              << csv_double(box.intervals[i].second);
        f << "," << (box.empty_cell ? 1 : 0) << "\n";
    }
}

void write_order_csv(const std::string& path, const ConnectionOrder& order,
                     std::uint64_t hash) {
    auto f = open_csv(path, hash);
    f << "source,sink,representatives\n";
    for (auto [i, j] : order.pairs) {
        auto it = order.representatives.find({i, j});
        f << i << "," << j << ","
          << (it == order.representatives.end() ? 0 : it->second.size()) << "\n";
    }
}

void write_violations_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, ApproximationReport>>& reports,
    std::uint64_t hash) {
    auto f = open_csv(path, hash);
    f << "check,time,source,observed,predicted\n";
    for (const auto& [name, rep] : reports) {
        for (const Violation& v : rep.violations) {
            f << name << "," << csv_double(v.t) << "," << v.source << "," << v.observed
              << ",";
            bool first = true;
            for (CellId z : v.predicted) {
                f << (first ? "" : ";") << z;
                first = false;
            }
            f << "\n";
        }
    }
}

void write_conservativeness_csv(const std::string& path, const ConservativenessEstimate& est,
                                std::uint64_t hash) {
    auto f = open_csv(path, hash);
    f << "time,worst_cell_volume\n";
    for (const auto& [t, v] : est.per_time)
        f << csv_double(t) << "," << csv_double(v) << "\n";
    f << "sup," << csv_double(est.value) << "\n";
    f << "std_error," << csv_double(est.std_error) << "\n";
    f << "mc_samples," << est.mc_samples << "\n";
}

void write_trajectories_csv(const std::string& path, const ContinuousSystem& C,
                            int n_trajectories, const std::vector<double>& times,
                            std::uint64_t seed, std::uint64_t hash) {
    auto f = open_csv(path, hash);
    f << "trajectory,time";
    for (int i = 0; i < C.space.dim(); ++i) f << ",x" << i;
    f << "\n";
    std::vector<Vec> starts = quasi_uniform(C.space, n_trajectories, seed);
    for (size_t k = 0; k < starts.size(); ++k) {
        Vec cur = starts[k];
        double t_cur = 0.0;
        for (double t : times) {
            cur = flow(C.field, C.space, C.cfg, t - t_cur, cur);
            t_cur = t;
            f << k << "," << csv_double(t);
            for (int i = 0; i < C.space.dim(); ++i) f << "," << csv_double(cur[i]);
            f << "\n";
        }
    }
}

void write_cells_svg(const std::string& path, const OrderedCover& cover,
                     const DiscreteSystem& D, double t, std::uint64_t hash) {
    const StateSpace& space = cover.space();
    if (space.dim() > 2)
        throw UnsupportedDimension("cell plots support dimension <= 2");
    double x0 = space.lower(0), x1 = space.upper(0);
    double y0 = space.dim() == 2 ? space.lower(1) : -0.5;
    double y1 = space.dim() == 2 ? space.upper(1) : 0.5;
    double w = 640.0, h = 640.0 * (y1 - y0) / (x1 - x0);
    auto sx = [&](double x) { return (x - x0) / (x1 - x0) * w; };
    auto sy = [&](double y) { return h - (y - y0) / (y1 - y0) * h; };

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open output file " + path);
    f.precision(6);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
    f << "<!-- config-hash: " << hash << " -->\n";

    std::vector<Vec> centers(cover.size());
    for (CellId z = 0; z < cover.size(); ++z) {
        const Region& r = cover.region(z);
        if (r.kind() == Region::Kind::HyperRect) {
            const auto& b = r.rect_bounds();
            double rx = sx(b[0].first), rw = sx(b[0].second) - rx;
            double ry = space.dim() == 2 ? sy(b[1].second) : sy(y1);
            double rh = space.dim() == 2 ? sy(b[1].first) - ry : h;
            f << "<rect x=\"" << rx << "\" y=\"" << ry << "\" width=\"" << rw
              << "\" height=\"" << rh
              << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
            Vec c(space.dim());
            c[0] = 0.5 * (b[0].first + b[0].second);
            if (space.dim() == 2) c[1] = 0.5 * (b[1].first + b[1].second);
            centers[z] = c;
        } else if (r.kind() == Region::Kind::MetricBall) {
            double cx = sx(r.center()[0]);
            double cy = space.dim() == 2 ? sy(r.center()[1]) : sy(0.0);
            double rr = r.radius() / (x1 - x0) * w;
            f << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << rr
              << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
            centers[z] = r.center();
        } else {
            // Predicate/slab cells: mark a sampled representative.
            Vec p = cover.sample_cell(z, 1, 17).front();
            f << "<circle cx=\"" << sx(p[0]) << "\" cy=\""
              << (space.dim() == 2 ? sy(p[1]) : sy(0.0))
              << "\" r=\"3\" fill=\"black\"/>\n";
            centers[z] = p;
        }
    }
    for (CellId z = 0; z < cover.size(); ++z) {
        for (CellId zz : D.phi(t, z)) {
            if (centers[z].size() == 0 || centers[zz].size() == 0) continue;
            double ax = sx(centers[z][0]);
            double ay = space.dim() == 2 ? sy(centers[z][1]) : sy(0.0);
            double bx = sx(centers[zz][0]);
            double by = space.dim() == 2 ? sy(centers[zz][1]) : sy(0.0);
            f << "<line x1=\"" << ax << "\" y1=\"" << ay << "\" x2=\"" << bx << "\" y2=\""
              << by << "\" stroke=\"steelblue\" stroke-width=\"0.8\"/>\n";
        }
    }
    f << "</svg>\n";
}

}  // namespace dynab
