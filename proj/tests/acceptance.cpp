// End-to-end acceptance run: one line per criterion, non-zero exit when any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "dynab/checks.hpp"
#include "dynab/contraction.hpp"
#include "dynab/cover_abstraction.hpp"
#include "dynab/levelset.hpp"
#include "dynab/morse_smale.hpp"
#include "dynab/prng.hpp"

using namespace dynab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int n, const std::string& what, bool ok, const std::string& detail = "") {
    std::printf("criterion %d (%s): %s%s%s\n", n, what.c_str(), ok ? "pass" : "FAIL",
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

Vec pt(std::initializer_list<double> v) {
    Vec x(static_cast<int>(v.size()));
    int i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

StateSpace square() { return StateSpace(StateSpace::Kind::Box, {{-1, 1}, {-1, 1}}); }

// --- 1: trajectory integration against closed-form solutions ---------------

void criterion_integrator() {
    StateSpace line(StateSpace::Kind::Box, {{-2, 2}});
    auto f1 = VectorFieldSpec::radial_contraction(1);
    FlowConfig fine{1e-3, 10};
    bool ok = true;
    std::ostringstream os;

    double e1 = std::abs(flow(f1, line, fine, 1.0, pt({1}))[0] - std::exp(-1.0));
    ok = ok && e1 < 1e-6;

    Vec rot = flow(VectorFieldSpec::rotation(), square(), fine, M_PI / 2, pt({1, 0}));
    double e2 = (rot - pt({0, -1})).norm();
    ok = ok && e2 < 1e-6;

    double exact = std::exp(-1.0);
    double eh = std::abs(flow(f1, line, FlowConfig{0.1, 10}, 1.0, pt({1}))[0] - exact);
    double eh2 = std::abs(flow(f1, line, FlowConfig{0.05, 10}, 1.0, pt({1}))[0] - exact);
    double ratio = eh / eh2;
    ok = ok && ratio >= 8.0;

    os << "errors " << e1 << ", " << e2 << "; halving ratio " << ratio;
    report(1, "integrator accuracy and order", ok, os.str());
}

// --- 2: abstraction map properties on 1e4 points ----------------------------

void criterion_abstraction_map() {
    StateSpace sp = square();
    auto cover = build_ordered_cover(sp, grid_partition(sp, {2, 2}), 4096, 7);
    long bad_member = 0, bad_min = 0;
    for (const Vec& x : quasi_uniform(sp, 10000, 31)) {
        CellId z = cover.abstract_point(x);
        if (!cover.region(z).contains(sp, x)) ++bad_member;
        for (CellId w = 0; w < z; ++w)
            if (cover.region(w).contains(sp, x)) { ++bad_min; break; }
    }

    StateSpace torus(StateSpace::Kind::Torus, {{0, 1}});
    auto tcover = build_ordered_cover(torus, grid_partition(torus, {4}), 2048, 7);
    long bad_periodic = 0;
    for (const Vec& x : quasi_uniform(torus, 2000, 33)) {
        CellId z = tcover.abstract_point(x);
        if (tcover.abstract_point(pt({x[0] + 5.0})) != z ||
            tcover.abstract_point(pt({x[0] - 3.0})) != z)
            ++bad_periodic;
    }

    std::ostringstream os;
    os << bad_member << " membership, " << bad_min << " min-index, " << bad_periodic
       << " periodicity failures on 12000 points";
    report(2, "abstraction map: membership, min index, periodicity",
           bad_member + bad_min + bad_periodic == 0, os.str());
}

// --- 3: linear-family cover abstraction over-approximates ------------------

void criterion_cover_abstraction() {
    try {
        StateSpace sp = square();
        auto cover = build_ordered_cover(sp, grid_partition(sp, {2, 2}), 4096, 7);
        LinearFamily fam{{-Mat::Identity(2, 2)}};
        auto incl = check_inclusion(VectorFieldSpec::radial_contraction(2), sp, fam, 256,
                                    1e-6, 5);
        std::vector<double> grid = default_time_grid(5.0, 32);
        DiscreteSystem D = build_ex1_system(cover, fam, {}, 1e-3, grid, 7, incl.included);
        ContinuousSystem C{VectorFieldSpec::radial_contraction(2), sp, FlowConfig{1e-3, 5}};
        auto rep = check_over_approximation(C, D, cover, 320, grid, 7);
        std::ostringstream os;
        os << rep.violations.size() << " violations / " << rep.checked << " checks";
        report(3, "linear-family abstraction is an over-approximation",
               incl.included && D.over_approximation_tag() && rep.verdict &&
                   rep.checked >= 10000,
               os.str());
    } catch (const Error& e) {
        report(3, "linear-family abstraction is an over-approximation", false, e.what());
    }
}

// --- 4: contraction certificate and envelope --------------------------------

void criterion_contraction() {
    try {
        StateSpace sp = square();
        auto f = VectorFieldSpec::radial_contraction(2);
        FlowConfig cfg{1e-3, 10};
        auto spec = FinslerLyapunovSpec::euclidean(2);
        auto cert = check_contraction_inequality(f, sp, cfg, spec,
                                                 [](double s) { return 2.0 * s; }, 200, 5,
                                                 1e-4);
        bool ok = cert.verdict && std::abs(cert.worst_slack) <= 1e-4;

        // envelope e^{-t} r bounds 1e3 sampled trajectory pairs
        auto xs = quasi_uniform(sp, 2000, 9);
        long pairs = 0, bad = 0;
        for (size_t i = 0; i + 1 < xs.size(); i += 2) {
            double r0 = (xs[i] - xs[i + 1]).norm();
            for (double t : {0.5, 1.5}) {
                double rt =
                    (flow(f, sp, cfg, t, xs[i]) - flow(f, sp, cfg, t, xs[i + 1])).norm();
                ++pairs;
                if (rt > cert.envelope(t, r0) + 1e-4) ++bad;
            }
        }
        ok = ok && pairs >= 1000 && bad == 0;

        auto rot = check_contraction_inequality(VectorFieldSpec::rotation(), sp, cfg, spec,
                                                [](double s) { return 0.5 * s; }, 200, 5,
                                                1e-4);
        bool refused = false;
        if (!rot.verdict) {
            auto disks = build_disk_cover(sp, MetricSpec::euclidean(), 0.5, 2048, 3);
            try {
                compute_phi_ex2(disks, VectorFieldSpec::rotation(), sp, cfg, rot, 1.0, 0);
            } catch (const NotContractive&) {
                refused = true;
            }
        }
        ok = ok && refused;

        std::ostringstream os;
        os << "slack " << cert.worst_slack << "; " << bad << "/" << pairs
           << " envelope breaches; rotation refused: " << (refused ? "yes" : "no");
        report(4, "contraction inequality, envelope, non-contractive refusal", ok, os.str());
    } catch (const Error& e) {
        report(4, "contraction inequality, envelope, non-contractive refusal", false,
               e.what());
    }
}

// --- 5: connection order on the circle gradient flow ------------------------

void criterion_connection_order() {
    try {
        auto f = VectorFieldSpec::gradient_circle();
        StateSpace sp(StateSpace::Kind::Torus, {{0, 2 * M_PI}});
        FlowConfig cfg{2e-3, 50};
        SingularElement bottom, top;
        bottom.id = 0;
        bottom.point = pt({0});
        top.id = 1;
        top.point = pt({M_PI});
        top.stability = SingularElement::Stability::Repelling;
        std::vector<SingularElement> els = {bottom, top};
        validate_elements(f, sp, cfg, els);
        auto order = build_partial_order(f, sp, cfg, els, 200, 5);

        std::vector<std::pair<int, int>> expected = {{0, 0}, {1, 0}, {1, 1}};
        bool ok = order.pairs == expected && order.unresolved_fraction <= 0.01;

        DiscreteSystem D = build_ms_system(order, {0.0, 1.0, 10.0});
        for (double t : {-10.0, -1.0, 0.0, 1.0, 10.0})
            for (CellId z = 0; z < D.n_states(); ++z)
                ok = ok && D.phi(t, z) == std::vector<CellId>{z};

        std::ostringstream os;
        os << order.pairs.size() << " cells, unresolved fraction "
           << order.unresolved_fraction;
        report(5, "connection cells, order, and invariance", ok, os.str());
    } catch (const Error& e) {
        report(5, "connection cells, order, and invariance", false, e.what());
    }
}

// --- 6: timing boxes and completeness of the band system --------------------

void criterion_timing_boxes() {
    try {
        const double tau = 0.5 * std::log(4.0);
        auto f = VectorFieldSpec::radial_contraction(1);
        StateSpace sp(StateSpace::Kind::Box, {{-1.2, 1.2}});
        FlowConfig cfg{1e-3, 20};
        LevelFamily fam;
        LevelFunction V;
        V.value = [](const Vec& x) { return x.squaredNorm(); };
        V.gradient = [](const Vec& x) { return Vec(2 * x); };
        V.name = "V";
        fam.functions = {V};
        fam.levels = {{1.44 / 256, 1.44 / 64, 1.44 / 16, 1.44 / 4, 1.44}};

        BoxMap bm = build_box_map(f, sp, cfg, fam, {}, 5);
        bool ok = bm.cells.size() == 5;
        double worst = 0.0;
        for (int z = 1; z <= 4; ++z) {
            auto [lo, hi] = bm.box({z}).intervals[0];
            worst = std::max({worst, std::abs(lo - tau), std::abs(hi - tau)});
        }
        ok = ok && worst <= 1e-4;

        const double d = 1e-6;
        std::vector<double> grid = {0.0, tau + d, 2 * tau + d, 3 * tau + d};
        auto rep = completeness_suite(f, sp, cfg, fam, bm, 250, grid, 7, PhiMode::Bounds);
        ok = ok && rep.verdict && rep.checked >= 1000;

        // anisotropic contraction: transit bracketed between the extreme rates
        Mat A(2, 2);
        A << -1, 0, 0, -2;
        StateSpace sq(StateSpace::Kind::Box, {{-1.3, 1.3}, {-1.3, 1.3}});
        auto [lo, hi] = compute_timing_interval(VectorFieldSpec::linear(A), sq, cfg, V, 1.0,
                                                0.25, 64, 5);
        ok = ok && lo >= std::log(4.0) / 4 - 1e-3 && hi <= std::log(4.0) / 2 + 1e-3 &&
             lo < hi;

        std::ostringstream os;
        os << "worst box error " << worst << "; completeness "
           << (rep.verdict ? "pass" : "fail") << " over " << rep.checked
           << " checks; bracket [" << lo << ", " << hi << "]";
        report(6, "timing boxes and band-system completeness", ok, os.str());
    } catch (const Error& e) {
        report(6, "timing boxes and band-system completeness", false, e.what());
    }
}

// --- 7: conservativeness volume ---------------------------------------------

void criterion_conservativeness() {
    try {
        StateSpace sp = square();
        auto cover = build_ordered_cover(sp, grid_partition(sp, {2, 2}), 4096, 7);
        ContinuousSystem C{VectorFieldSpec::radial_contraction(2), sp, FlowConfig{1e-3, 5}};
        std::vector<double> grid = {0.0, 0.5, 1.0, 2.0};
        ConservativenessOptions opt;
        opt.mc_samples = 10000;
        opt.preimage_samples = 400;

        DiscreteSystem exact(cover.size(),
                             [](double, CellId z) { return std::vector<CellId>{z}; }, grid);
        auto e0 = conservativeness_volume(C, exact, cover, grid, opt, 7);
        bool ok = e0.value <= 3.0 * e0.std_error;

        std::vector<CellId> all = {0, 1, 2, 3};
        DiscreteSystem inflated(cover.size(), [all](double, CellId) { return all; }, grid);
        auto e1 = conservativeness_volume(C, inflated, cover, grid, opt, 7);
        // the excess over the invariant quadrant is exactly vol(M) - 1 = 3
        ok = ok && std::abs(e1.value - 3.0) <= 0.3;

        std::ostringstream os;
        os << "exact system " << e0.value << " (std err " << e0.std_error
           << "), inflated system " << e1.value << " vs 3.0";
        report(7, "conservativeness volume estimates", ok, os.str());
    } catch (const Error& e) {
        report(7, "conservativeness volume estimates", false, e.what());
    }
}

// --- 8: safety verdicts and monotonicity ------------------------------------

void criterion_safety() {
    try {
        StateSpace sp = square();
        auto cover = build_ordered_cover(sp, grid_partition(sp, {3, 3}), 4096, 7);
        std::vector<double> grid = default_time_grid(2.0, 8);
        Region init = Region::metric_ball(pt({0.6, 0.6}), 0.15);
        Region unsafe = Region::metric_ball(pt({-0.6, -0.6}), 0.15);

        auto make = [&](std::set<std::pair<CellId, CellId>> extra) {
            DiscreteSystem D(cover.size(),
                             [extra](double, CellId z) {
                                 std::vector<CellId> out{z};
                                 for (auto [a, b] : extra)
                                     if (a == z) out.push_back(b);
                                 std::sort(out.begin(), out.end());
                                 out.erase(std::unique(out.begin(), out.end()), out.end());
                                 return out;
                             },
                             grid);
            D.tag_over_approximation(true);
            return D;
        };

        SafetyVerdict tight = verify_safety(make({}), cover, init, unsafe, 2.0, grid, 7);
        bool ok = tight.safe;

        auto everything = make([&] {
            std::set<std::pair<CellId, CellId>> e;
            for (CellId a = 0; a < cover.size(); ++a)
                for (CellId b = 0; b < cover.size(); ++b) e.insert({a, b});
            return e;
        }());
        SafetyVerdict loose = verify_safety(everything, cover, init, unsafe, 2.0, grid, 7);
        ok = ok && !loose.safe && !loose.witness_cells.empty();

        // monotonicity: enlarging phi can never turn PossiblyUnsafe into Safe
        Prng rng(99);
        long breaches = 0;
        for (int trial = 0; trial < 20; ++trial) {
            std::set<std::pair<CellId, CellId>> small, big;
            int n = cover.size();
            for (int k = 0; k < 4; ++k) {
                auto edge = std::make_pair(CellId(rng.next_u64() % n),
                                           CellId(rng.next_u64() % n));
                small.insert(edge);
                big.insert(edge);
            }
            for (int k = 0; k < 4; ++k)
                big.insert({CellId(rng.next_u64() % n), CellId(rng.next_u64() % n)});
            bool s1 = verify_safety(make(small), cover, init, unsafe, 2.0, grid, 7).safe;
            bool s2 = verify_safety(make(big), cover, init, unsafe, 2.0, grid, 7).safe;
            if (!s1 && s2) ++breaches;
        }
        ok = ok && breaches == 0;

        std::ostringstream os;
        os << "tight " << (tight.safe ? "Safe" : "PossiblyUnsafe") << ", inflated "
           << (loose.safe ? "Safe" : "PossiblyUnsafe") << ", " << breaches
           << " monotonicity breaches in 20 trials";
        report(8, "safety verdicts and monotonicity under inflation", ok, os.str());
    } catch (const Error& e) {
        report(8, "safety verdicts and monotonicity under inflation", false, e.what());
    }
}

// --- 9: seeded CLI runs are byte-reproducible --------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void criterion_reproducibility() {
    fs::path base = fs::temp_directory_path() / "dynab_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    bool ok = true;
    std::ostringstream os;
    int compared = 0;
    for (const char* name : {"radial_grid.json", "radial_disks.json",
                             "circle_connections.json", "radial_bands.json"}) {
        fs::path cfg = fs::path(DYNAB_CONFIG_DIR) / name;
        fs::path a = base / (std::string(name) + ".a");
        fs::path b = base / (std::string(name) + ".b");
        for (const fs::path& out : {a, b}) {
            std::string cmd = std::string(DYNAB_CLI_PATH) + " -q --seed 11 --out " +
                              out.string() + " check " + cfg.string() + " > " +
                              (base / "log.txt").string() + " 2>&1";
            int status = std::system(cmd.c_str());
            int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            if (code != 0) {
                ok = false;
                os << name << " exited " << code << "; ";
            }
        }
        if (!fs::exists(a) || !fs::exists(b)) continue;
        for (const auto& entry : fs::directory_iterator(a)) {
            fs::path other = b / entry.path().filename();
            ++compared;
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
                ok = false;
                os << name << "/" << entry.path().filename().string() << " differs; ";
            }
        }
    }
    ok = ok && compared > 0;
    os << compared << " artifact files compared";
    report(9, "seeded CLI runs are byte-identical", ok, os.str());
}

}  // namespace

int main() {
    criterion_integrator();
    criterion_abstraction_map();
    criterion_cover_abstraction();
    criterion_contraction();
    criterion_connection_order();
    criterion_timing_boxes();
    criterion_safety();
    criterion_conservativeness();
    criterion_reproducibility();
    if (g_failures) {
        std::printf("%d criteria FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
