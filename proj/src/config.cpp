#include "dynab/config.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "dynab/contraction.hpp"
#include "dynab/cover_abstraction.hpp"
#include "dynab/expr.hpp"
#include "dynab/levelset.hpp"
#include "dynab/morse_smale.hpp"
#include "dynab/prng.hpp"
#include "dynab/report.hpp"

namespace dynab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void expect_keys(const json& j, const std::string& path,
                 const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path + ": unknown key '" + it.key() + "'");
}

const json& require(const json& j, const std::string& path, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + ": missing key '" + key + "'");
    return *it;
}

Mat parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a matrix");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw ConfigError(path + ": ragged matrix rows");
        for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
    }
    return M;
}

Vec parse_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a vector");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    return v;
}

StateSpace parse_space(const json& j) {
    expect_keys(j, "space", {"kind", "bounds"});
    std::string kind = require(j, "space", "kind").get<std::string>();
    StateSpace::Kind k;
    if (kind == "box") k = StateSpace::Kind::Box;
    else if (kind == "torus") k = StateSpace::Kind::Torus;
    else throw ConfigError("space.kind: expected 'box' or 'torus'");
    std::vector<std::pair<double, double>> bounds;
    for (const json& b : require(j, "space", "bounds")) {
        if (!b.is_array() || b.size() != 2)
            throw ConfigError("space.bounds: each entry must be [lower, upper]");
        bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
    }
    return StateSpace(k, bounds);
}

VectorFieldSpec parse_system(const json& j, int dim) {
    expect_keys(j, "system", {"builtin", "dim", "expressions", "jacobian"});
    if (j.contains("builtin"))
        return VectorFieldSpec::by_name(j["builtin"].get<std::string>(), dim);
    const json& exprs = require(j, "system", "expressions");
    if (static_cast<int>(exprs.size()) != dim)
        throw ConfigError("system.expressions: needs one component per dimension");
    auto vars = state_var_names(dim);
    auto comps = std::make_shared<std::vector<Expr>>();
    for (const json& e : exprs) comps->push_back(Expr::parse(e.get<std::string>(), vars));
    VectorFieldSpec s;
    s.dim = dim;
    s.name = "expression";
    s.rhs = [comps](const Vec& x) { return eval_field(*comps, x); };
    if (j.contains("jacobian")) {
        auto jac = std::make_shared<std::vector<std::vector<Expr>>>();
        for (const json& row : j["jacobian"]) {
            std::vector<Expr> r;
            for (const json& e : row) r.push_back(Expr::parse(e.get<std::string>(), vars));
            jac->push_back(std::move(r));
        }
        s.jacobian = [jac, dim](const Vec& x) {
            Eigen::VectorXd vals(dim + std::min(dim, 3));
            vals.head(dim) = x;
            for (int i = 0; i < dim && i < 3; ++i) vals[dim + i] = x[i];
            Mat J(dim, dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) J(r, c) = (*jac)[r][c].eval(vals);
            return J;
        };
    }
    return s;
}

Region parse_region(const json& j, const std::string& path) {
    expect_keys(j, path, {"kind", "bounds", "center", "radius"});
    std::string kind = require(j, path, "kind").get<std::string>();
    if (kind == "hyper_rect") {
        std::vector<std::pair<double, double>> bounds;
        for (const json& b : require(j, path, "bounds"))
            bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
        return Region::hyper_rect(std::move(bounds));
    }
    if (kind == "ball") {
        return Region::metric_ball(parse_vector(require(j, path, "center"), path),
                                   require(j, path, "radius").get<double>());
    }
    throw ConfigError(path + ".kind: expected 'hyper_rect' or 'ball'");
}

struct Numerics {
    FlowConfig cfg;
    std::vector<double> time_grid;
    std::uint64_t seed = 1;
    int coverage_samples = 4096;
};

Numerics parse_numerics(const json& root) {
    Numerics n;
    if (!root.contains("numerics")) {
        n.time_grid = default_time_grid(n.cfg.t_max);
        return n;
    }
    const json& j = root["numerics"];
    expect_keys(j, "numerics",
                {"step", "t_max", "time_grid", "seed", "coverage_samples"});
    if (j.contains("step")) n.cfg.step = j["step"].get<double>();
    if (j.contains("t_max")) n.cfg.t_max = j["t_max"].get<double>();
    if (!(n.cfg.step > 0) || !(n.cfg.step <= n.cfg.t_max))
        throw ConfigError("numerics: require 0 < step <= t_max");
    if (j.contains("seed")) n.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("coverage_samples"))
        n.coverage_samples = j["coverage_samples"].get<int>();
    if (j.contains("time_grid")) {
        const json& g = j["time_grid"];
        expect_keys(g, "numerics.time_grid", {"kind", "points", "times"});
        std::string kind = require(g, "numerics.time_grid", "kind").get<std::string>();
        if (kind == "log") {
            int pts = g.contains("points") ? g["points"].get<int>() : 32;
            n.time_grid = default_time_grid(n.cfg.t_max, pts);
        } else if (kind == "explicit") {
            for (const json& t : require(g, "numerics.time_grid", "times"))
                n.time_grid.push_back(t.get<double>());
        } else {
            throw ConfigError("numerics.time_grid.kind: expected 'log' or 'explicit'");
        }
    } else {
        n.time_grid = default_time_grid(n.cfg.t_max);
    }
    return n;
}

// Everything a run builds, kept together so lifetimes line up.
struct RunContext {
    json root;
    std::uint64_t hash = 0;
    StateSpace space{StateSpace::Kind::Box, {{0, 1}}};
    VectorFieldSpec field;
    Numerics num;
    std::string construction;
    fs::path out_dir;
    bool quiet = false;

    std::optional<OrderedCover> cover;
    std::optional<DiscreteSystem> D;
    std::shared_ptr<LevelFamily> family;
    std::optional<BoxMap> boxmap;
    std::optional<ConnectionOrder> order;
    std::optional<DiskCover> disks;
};

void validate_schema(const json& root) {
    expect_keys(root, "(root)",
                {"system", "space", "construction", "checks", "numerics", "output"});
    StateSpace space = parse_space(require(root, "(root)", "space"));
    parse_system(require(root, "(root)", "system"), space.dim());
    parse_numerics(root);

    const json& c = require(root, "(root)", "construction");
    std::string type = require(c, "construction", "type").get<std::string>();
    if (type == "example1") {
        expect_keys(c, "construction",
                    {"type", "grid", "matrices", "alpha_norm", "vertex_samples",
                     "alpha_samples", "bloat", "inclusion"});
        require(c, "construction", "grid");
        for (const json& m : require(c, "construction", "matrices"))
            parse_matrix(m, "construction.matrices");
    } else if (type == "example2") {
        expect_keys(c, "construction",
                    {"type", "radius", "metric_form", "finsler_form", "alpha",
                     "envelope", "samples"});
        require(c, "construction", "radius");
        require(c, "construction", "alpha");
    } else if (type == "example3") {
        expect_keys(c, "construction",
                    {"type", "elements", "n_samples", "t_max", "unresolved_threshold",
                     "dwell_constant"});
        for (const json& e : require(c, "construction", "elements")) {
            expect_keys(e, "construction.elements",
                        {"kind", "point", "period", "stability", "capture_radius"});
            require(e, "construction.elements", "kind");
            require(e, "construction.elements", "point");
        }
    } else if (type == "example4") {
        expect_keys(c, "construction",
                    {"type", "functions", "levels", "include_floor_cells", "phi_mode",
                     "n_trajectories"});
        for (const json& fj : require(c, "construction", "functions")) {
            expect_keys(fj, "construction.functions", {"value", "gradient"});
            require(fj, "construction.functions", "value");
        }
        for (const json& A : require(c, "construction", "levels")) {
            double prev = -kInf;
            for (const json& a : A) {
                double v = a.is_string() ? kInf : a.get<double>();
                if (!(prev < v))
                    throw ConfigError(
                        "construction.levels: values must be strictly increasing");
                prev = v;
            }
        }
    } else {
        throw ConfigError("construction.type: expected example1..example4");
    }

    if (root.contains("checks")) {
        const json& ch = root["checks"];
        expect_keys(ch, "checks",
                    {"over", "under", "complete", "conservativeness", "safety"});
        for (const char* k : {"over", "under", "complete"})
            if (ch.contains(k))
                expect_keys(ch[k], std::string("checks.") + k, {"n_points"});
        if (ch.contains("conservativeness"))
            expect_keys(ch["conservativeness"], "checks.conservativeness",
                        {"mc_samples", "preimage_samples", "bloat"});
        if (ch.contains("safety")) {
            const json& s = ch["safety"];
            expect_keys(s, "checks.safety", {"init", "unsafe", "horizon", "cell_samples"});
            parse_region(require(s, "checks.safety", "init"), "checks.safety.init");
            parse_region(require(s, "checks.safety", "unsafe"), "checks.safety.unsafe");
        }
    }
}

RunContext load_context(const std::string& path, const CliOverrides& ov) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    std::string text = buf.str();

    RunContext ctx;
    try {
        ctx.root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    validate_schema(ctx.root);

    ctx.hash = config_hash(text);
    ctx.space = parse_space(ctx.root["space"]);
    ctx.field = parse_system(ctx.root["system"], ctx.space.dim());
    ctx.num = parse_numerics(ctx.root);
    if (ov.seed) ctx.num.seed = *ov.seed;
    ctx.construction = ctx.root["construction"]["type"].get<std::string>();
    ctx.quiet = ov.quiet;

    std::string out = "dynab_out";
    if (const char* env = std::getenv("DYNAB_OUT")) out = env;
    if (ctx.root.contains("output")) out = ctx.root["output"].get<std::string>();
    if (ov.out_dir) out = *ov.out_dir;
    ctx.out_dir = out;

#ifdef _OPENMP
    if (ov.jobs > 0) omp_set_num_threads(ov.jobs);
#endif
    return ctx;
}

double parse_level(const json& a) {
    if (a.is_string()) {
        std::string s = a.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ConfigError("level literal must be a number, 'inf' or '-inf'");
    }
    return a.get<double>();
}

void build_construction(RunContext& ctx) {
    const json& c = ctx.root["construction"];
    ContinuousSystem C{ctx.field, ctx.space, ctx.num.cfg};

    if (ctx.construction == "example1") {
        std::vector<int> grid;
        for (const json& g : c["grid"]) grid.push_back(g.get<int>());
        ctx.cover = build_ordered_cover(ctx.space, grid_partition(ctx.space, grid),
                                        ctx.num.coverage_samples, ctx.num.seed);
        LinearFamily fam;
        for (const json& m : c["matrices"])
            fam.matrices.push_back(parse_matrix(m, "construction.matrices"));
        CoverAbstractionOptions opt;
        if (c.contains("vertex_samples")) opt.vertex_samples = c["vertex_samples"].get<int>();
        if (c.contains("alpha_samples")) opt.alpha_samples = c["alpha_samples"].get<int>();
        if (c.contains("bloat")) opt.bloat = c["bloat"].get<double>();
        if (c.contains("alpha_norm"))
            opt.alpha_norm = c["alpha_norm"].get<std::string>() == "simplex"
                                 ? AlphaNorm::Simplex
                                 : AlphaNorm::Sphere;
        int incl_points = 256;
        double incl_tol = 1e-6;
        if (c.contains("inclusion")) {
            expect_keys(c["inclusion"], "construction.inclusion", {"n_points", "tol"});
            if (c["inclusion"].contains("n_points"))
                incl_points = c["inclusion"]["n_points"].get<int>();
            if (c["inclusion"].contains("tol"))
                incl_tol = c["inclusion"]["tol"].get<double>();
        }
        InclusionReport incl = check_inclusion(ctx.field, ctx.space, fam, incl_points,
                                               incl_tol, Prng::derive(ctx.num.seed, 0x11));
        ctx.D = build_ex1_system(*ctx.cover, fam, opt, ctx.num.cfg.step, ctx.num.time_grid,
                                 ctx.num.seed, incl.included);
        return;
    }

    if (ctx.construction == "example2") {
        MetricSpec metric = MetricSpec::euclidean();
        if (c.contains("metric_form"))
            metric = MetricSpec::quadratic(parse_matrix(c["metric_form"], "metric_form"));
        FinslerLyapunovSpec V =
            c.contains("finsler_form")
                ? FinslerLyapunovSpec::quadratic_form(
                      parse_matrix(c["finsler_form"], "finsler_form"))
                : FinslerLyapunovSpec::euclidean(ctx.space.dim());
        Expr alpha = Expr::parse(c["alpha"].get<std::string>(), {"s"});
        std::function<double(double, double)> envelope;
        if (c.contains("envelope")) {
            Expr env = Expr::parse(c["envelope"].get<std::string>(), {"t", "r"});
            envelope = [env](double t, double r) { return env.eval2(t, r); };
        }
        int samples = c.contains("samples") ? c["samples"].get<int>() : 512;
        ContractionCertificate cert = check_contraction_inequality(
            ctx.field, ctx.space, ctx.num.cfg, V,
            [alpha](double s) { return alpha.eval1(s); }, samples,
            Prng::derive(ctx.num.seed, 0x22), 1e-6, envelope);
        if (!cert.verdict)
            throw NotContractive("contraction inequality refuted on samples");
        ctx.disks = build_disk_cover(ctx.space, metric, c["radius"].get<double>(),
                                     ctx.num.coverage_samples,
                                     Prng::derive(ctx.num.seed, 0x33));
        ctx.cover = ctx.disks->cover;
        ctx.D = build_ex2_system(*ctx.disks, ctx.field, ctx.space, ctx.num.cfg, cert,
                                 ctx.num.time_grid);
        return;
    }

    if (ctx.construction == "example3") {
        std::vector<SingularElement> elements;
        int id = 0;
        for (const json& e : c["elements"]) {
            SingularElement el;
            el.id = id++;
            std::string kind = e["kind"].get<std::string>();
            el.kind = kind == "periodic_orbit" ? SingularElement::Kind::PeriodicOrbit
                                               : SingularElement::Kind::Equilibrium;
            el.point = parse_vector(e["point"], "elements.point");
            if (e.contains("period")) el.period = e["period"].get<double>();
            if (e.contains("capture_radius"))
                el.capture_radius = e["capture_radius"].get<double>();
            if (e.contains("stability")) {
                std::string s = e["stability"].get<std::string>();
                el.stability = s == "repelling" ? SingularElement::Stability::Repelling
                             : s == "saddle"    ? SingularElement::Stability::Saddle
                                                : SingularElement::Stability::Attracting;
            }
            elements.push_back(std::move(el));
        }
        validate_elements(ctx.field, ctx.space, ctx.num.cfg, elements);
        OrderOptions opt;
        if (c.contains("t_max")) opt.classify.t_max = c["t_max"].get<double>();
        if (c.contains("dwell_constant"))
            opt.classify.dwell_constant = c["dwell_constant"].get<double>();
        if (c.contains("unresolved_threshold"))
            opt.unresolved_threshold = c["unresolved_threshold"].get<double>();
        int n_samples = c.contains("n_samples") ? c["n_samples"].get<int>() : 512;
        ctx.order = build_partial_order(ctx.field, ctx.space, ctx.num.cfg, elements,
                                        n_samples, ctx.num.seed, opt);
        ctx.cover = cells_as_cover(*ctx.order, ctx.field, ctx.space, ctx.num.cfg, elements,
                                   opt.classify);
        ctx.D = build_ms_system(*ctx.order, ctx.num.time_grid);
        return;
    }

    // example4
    ctx.family = std::make_shared<LevelFamily>();
    auto vars = state_var_names(ctx.space.dim());
    int dim = ctx.space.dim();
    for (const json& fj : c["functions"]) {
        LevelFunction lf;
        Expr v = Expr::parse(fj["value"].get<std::string>(), vars);
        lf.name = fj["value"].get<std::string>();
        lf.value = [v, dim](const Vec& x) {
            Eigen::VectorXd vals(dim + std::min(dim, 3));
            vals.head(dim) = x;
            for (int i = 0; i < dim && i < 3; ++i) vals[dim + i] = x[i];
            return v.eval(vals);
        };
        if (fj.contains("gradient")) {
            auto comps = std::make_shared<std::vector<Expr>>();
            for (const json& g : fj["gradient"])
                comps->push_back(Expr::parse(g.get<std::string>(), vars));
            lf.gradient = [comps](const Vec& x) { return eval_field(*comps, x); };
        }
        ctx.family->functions.push_back(std::move(lf));
    }
    for (const json& A : c["levels"]) {
        std::vector<double> lv;
        for (const json& a : A) lv.push_back(parse_level(a));
        ctx.family->levels.push_back(std::move(lv));
    }
    if (c.contains("include_floor_cells"))
        ctx.family->include_floor_cells = c["include_floor_cells"].get<bool>();
    BoxMapOptions opt;
    if (c.contains("n_trajectories")) opt.n_trajectories = c["n_trajectories"].get<int>();
    DescentReport descent = check_descent(ctx.field, ctx.space, ctx.num.cfg, *ctx.family,
                                          1024, Prng::derive(ctx.num.seed, 0x44));
    if (!descent.pass)
        throw ConfigError("descent condition refuted: dV(xi) up to " +
                          std::to_string(descent.worst));
    ctx.boxmap = build_box_map(ctx.field, ctx.space, ctx.num.cfg, *ctx.family, opt,
                               ctx.num.seed);
    PhiMode mode = PhiMode::Verbatim;
    if (c.contains("phi_mode") && c["phi_mode"].get<std::string>() == "bounds")
        mode = PhiMode::Bounds;
    ctx.cover = cells_as_cover(*ctx.boxmap, ctx.space);
    ctx.D = build_ex4_system(*ctx.boxmap, ctx.num.time_grid, mode);
    if (mode == PhiMode::Bounds) ctx.D->tag_over_approximation(true);
}

void write_artifacts(RunContext& ctx) {
    fs::create_directories(ctx.out_dir);
    write_cells_csv((ctx.out_dir / "cells.csv").string(), *ctx.cover, ctx.hash);
    write_phi_csv((ctx.out_dir / "phi.csv").string(), *ctx.D, ctx.hash);
    if (ctx.boxmap)
        write_boxmap_csv((ctx.out_dir / "boxmap.csv").string(), *ctx.boxmap, ctx.hash);
    if (ctx.order)
        write_order_csv((ctx.out_dir / "order.csv").string(), *ctx.order, ctx.hash);
}

int map_exception_to_exit(std::ostream& out) {
    try {
        throw;
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NotOverApproximation& e) {
        out << "precondition: " << e.what() << "\n";
        return 5;
    } catch (const UnsupportedDimension& e) {
        out << "unsupported: " << e.what() << "\n";
        return 6;
    } catch (const Error& e) {
        out << "failure: " << e.what() << "\n";
        return 3;
    }
}

struct PhaseTimer {
    std::ostream& out;
    bool quiet;
    std::string name;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    ~PhaseTimer() {
        if (quiet) return;
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        out << "[phase] " << name << ": " << ms << " ms\n";
    }
};

}  // namespace

int cmd_validate(const std::string& config_path, std::ostream& out) {
    try {
        std::ifstream f(config_path);
        if (!f) throw ConfigError("cannot open config file " + config_path);
        std::stringstream buf;
        buf << f.rdbuf();
        json root;
        try {
            root = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        validate_schema(root);
        out << "config ok\n";
        return 0;
    } catch (const Error&) {
        return map_exception_to_exit(out);
    }
}

int cmd_abstract(const std::string& config_path, const CliOverrides& ov, std::ostream& out) {
    try {
        RunContext ctx = load_context(config_path, ov);
        {
            PhaseTimer t{out, ctx.quiet, "construction"};
            build_construction(ctx);
        }
        {
            PhaseTimer t{out, ctx.quiet, "artifacts"};
            write_artifacts(ctx);
        }
        if (!ctx.quiet) {
            out << "construction: " << ctx.construction << "\n";
            out << "|Z| = " << ctx.D->n_states() << "\n";
            out << "config-hash: " << ctx.hash << "\n";
            out << "over-approximation tag: "
                << (ctx.D->over_approximation_tag() ? "yes" : "no") << "\n";
        }
        return 0;
    } catch (const Error&) {
        return map_exception_to_exit(out);
    }
}

int cmd_check(const std::string& config_path, const CliOverrides& ov, std::ostream& out) {
    try {
        RunContext ctx = load_context(config_path, ov);
        build_construction(ctx);
        write_artifacts(ctx);
        ContinuousSystem C{ctx.field, ctx.space, ctx.num.cfg};

        const json ch = ctx.root.contains("checks") ? ctx.root["checks"] : json::object();
        std::vector<std::pair<std::string, ApproximationReport>> reports;
        bool any_violation = false;

        auto run = [&](const char* name, auto&& fn) {
            PhaseTimer t{out, ctx.quiet, name};
            int n = 512;
            if (ch.contains(name) && ch[name].contains("n_points"))
                n = ch[name]["n_points"].get<int>();
            ApproximationReport rep = fn(n);
            reports.emplace_back(name, rep);
            any_violation = any_violation || !rep.verdict;
            if (!ctx.quiet)
                out << name << ": " << (rep.verdict ? "pass" : "FAIL") << " ("
                    << rep.violations.size() << " violations / " << rep.checked
                    << " checks)"
                    << (std::string(name) == "under" && rep.verdict
                            ? " [not refuted at this sample size]"
                            : "")
                    << "\n";
        };

        if (ch.contains("over"))
            run("over", [&](int n) {
                ApproximationReport r = check_over_approximation(
                    C, *ctx.D, *ctx.cover, n, ctx.num.time_grid, ctx.num.seed);
                if (r.verdict) ctx.D->tag_over_approximation(true);
                return r;
            });
        if (ch.contains("under"))
            run("under", [&](int n) {
                return check_under_approximation(C, *ctx.D, *ctx.cover, n,
                                                 ctx.num.time_grid, ctx.num.seed);
            });
        if (ch.contains("complete"))
            run("complete", [&](int n) {
                return check_complete(C, *ctx.D, *ctx.cover, n, ctx.num.time_grid,
                                      ctx.num.seed);
            });

        write_violations_csv((ctx.out_dir / "violations.csv").string(), reports, ctx.hash);

        if (ch.contains("conservativeness")) {
            PhaseTimer t{out, ctx.quiet, "conservativeness"};
            ConservativenessOptions opt;
            const json& cj = ch["conservativeness"];
            if (cj.contains("mc_samples")) opt.mc_samples = cj["mc_samples"].get<long>();
            if (cj.contains("preimage_samples"))
                opt.preimage_samples = cj["preimage_samples"].get<int>();
            if (cj.contains("bloat")) opt.bloat = cj["bloat"].get<double>();
            ConservativenessEstimate est = conservativeness_volume(
                C, *ctx.D, *ctx.cover, ctx.num.time_grid, opt, ctx.num.seed);
            write_conservativeness_csv((ctx.out_dir / "conservativeness.csv").string(), est,
                                       ctx.hash);
            if (!ctx.quiet)
                out << "conservativeness: " << est.value << " (std error " << est.std_error
                    << ")\n";
        }
        return any_violation ? 3 : 0;
    } catch (const Error&) {
        return map_exception_to_exit(out);
    }
}

int cmd_verify_safety(const std::string& config_path, const CliOverrides& ov,
                      std::ostream& out) {
    try {
        RunContext ctx = load_context(config_path, ov);
        build_construction(ctx);
        const json& ch = require(ctx.root, "(root)", "checks");
        const json& s = require(ch, "checks", "safety");
        Region init = parse_region(s["init"], "checks.safety.init");
        Region unsafe = parse_region(s["unsafe"], "checks.safety.unsafe");
        double horizon = require(s, "checks.safety", "horizon").get<double>();
        int cell_samples = s.contains("cell_samples") ? s["cell_samples"].get<int>() : 256;

        SafetyVerdict v = verify_safety(*ctx.D, *ctx.cover, init, unsafe, horizon,
                                        ctx.num.time_grid, ctx.num.seed, cell_samples);
        if (v.safe) {
            out << "Safe\n";
            return 0;
        }
        out << "PossiblyUnsafe at t = " << v.first_time << ", cells:";
        for (CellId z : v.witness_cells) out << " " << z;
        out << "\n";
        return 4;
    } catch (const Error&) {
        return map_exception_to_exit(out);
    }
}

int cmd_plot_data(const std::string& config_path, const CliOverrides& ov,
                  std::ostream& out) {
    try {
        RunContext ctx = load_context(config_path, ov);
        if (ctx.space.dim() > 2)
            throw UnsupportedDimension("plots support dimension <= 2 only");
        build_construction(ctx);
        fs::create_directories(ctx.out_dir);
        ContinuousSystem C{ctx.field, ctx.space, ctx.num.cfg};
        write_trajectories_csv((ctx.out_dir / "trajectories.csv").string(), C, 16,
                               ctx.num.time_grid, ctx.num.seed, ctx.hash);
        if (ctx.space.dim() == 2) {
            double t = ctx.num.time_grid.size() > 1 ? ctx.num.time_grid[1] : 0.0;
            write_cells_svg((ctx.out_dir / "cells_2d.svg").string(), *ctx.cover, *ctx.D, t,
                            ctx.hash);
        }
        if (!ctx.quiet) out << "plot data written to " << ctx.out_dir.string() << "\n";
        return 0;
    } catch (const Error&) {
        return map_exception_to_exit(out);
    }
}

}  // namespace dynab
