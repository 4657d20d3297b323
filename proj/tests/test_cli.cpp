#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "dynab_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string config(const std::string& name) {
    return (fs::path(DYNAB_CONFIG_DIR) / name).string();
}

int run(const std::string& args, std::string* output = nullptr) {
    fs::path log = work_dir() / "last_output.txt";
    std::string cmd =
        std::string(DYNAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    if (output) {
        std::ifstream f(log);
        std::stringstream buf;
        buf << f.rdbuf();
        *output = buf.str();
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

std::string write_config(const std::string& name, const std::string& text) {
    fs::path p = work_dir() / name;
    std::ofstream f(p);
    f << text;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("validate accepts the shipped configs") {
    for (const char* name : {"radial_grid.json", "radial_disks.json",
                             "circle_connections.json", "radial_bands.json"}) {
        std::string out;
        CHECK(run("validate " + config(name), &out) == 0);
        CHECK(out.find("config ok") != std::string::npos);
    }
}

TEST_CASE("validate rejects a missing file with exit 2") {
    CHECK(run("validate " + (work_dir() / "does_not_exist.json").string()) == 2);
}

TEST_CASE("validate rejects unknown keys and bad JSON with exit 2") {
    std::string bad = write_config("bad_key.json", R"({
        "system": {"builtin": "radial_contraction"},
        "space": {"kind": "box", "bounds": [[-1, 1]]},
        "construction": {"type": "example1", "grid": [2], "matrices": [[[-1]]]},
        "surprise": true
    })");
    std::string out;
    CHECK(run("validate " + bad, &out) == 2);
    CHECK(out.find("surprise") != std::string::npos);

    std::string broken = write_config("broken.json", "{ not json");
    CHECK(run("validate " + broken) == 2);
}

TEST_CASE("abstract writes the cell and phi tables") {
    fs::path out = work_dir() / "abs1";
    std::string text;
    CHECK(run("-q --out " + out.string() + " abstract " + config("radial_grid.json"),
              &text) == 0);
    CHECK(fs::exists(out / "cells.csv"));
    CHECK(fs::exists(out / "phi.csv"));
}

TEST_CASE("check passes on the grid config and writes reports") {
    fs::path out = work_dir() / "chk1";
    std::string text;
    CHECK(run("--out " + out.string() + " check " + config("radial_grid.json"), &text) == 0);
    CHECK(text.find("over: pass") != std::string::npos);
    CHECK(fs::exists(out / "violations.csv"));
    CHECK(fs::exists(out / "conservativeness.csv"));
}

TEST_CASE("a family that does not enclose the field fails the check with exit 3") {
    std::string bad = write_config("wrong_family.json", R"({
        "system": {"builtin": "radial_contraction"},
        "space": {"kind": "box", "bounds": [[-1, 1], [-1, 1]]},
        "construction": {"type": "example1", "grid": [3, 3],
                         "matrices": [[[0, 1], [-1, 0]]]},
        "numerics": {"step": 0.002, "t_max": 2.0,
                     "time_grid": {"kind": "log", "points": 6}, "seed": 1,
                     "coverage_samples": 2048},
        "checks": {"over": {"n_points": 64}}
    })");
    fs::path out = work_dir() / "chk_bad";
    std::string text;
    CHECK(run("--out " + out.string() + " check " + bad, &text) == 3);
    CHECK(text.find("over: FAIL") != std::string::npos);
}

TEST_CASE("verify reports Safe on separated regions") {
    std::string text;
    CHECK(run("verify " + config("radial_grid.json"), &text) == 0);
    CHECK(text.find("Safe") != std::string::npos);
}

TEST_CASE("verify reports PossiblyUnsafe with exit 4 when regions meet") {
    std::string cfg = write_config("unsafe.json", R"({
        "system": {"builtin": "radial_contraction"},
        "space": {"kind": "box", "bounds": [[-1, 1], [-1, 1]]},
        "construction": {"type": "example1", "grid": [3, 3],
                         "matrices": [[[-1, 0], [0, -1]]]},
        "numerics": {"step": 0.002, "t_max": 2.0,
                     "time_grid": {"kind": "log", "points": 6}, "seed": 1,
                     "coverage_samples": 2048},
        "checks": {"safety": {
            "init": {"kind": "ball", "center": [0.6, 0.6], "radius": 0.15},
            "unsafe": {"kind": "ball", "center": [0.6, 0.6], "radius": 0.15},
            "horizon": 2.0}}
    })");
    std::string text;
    CHECK(run("verify " + cfg, &text) == 4);
    CHECK(text.find("PossiblyUnsafe") != std::string::npos);
}

TEST_CASE("verify needs an over-approximation, exit 5 otherwise") {
    std::string cfg = write_config("untagged.json", R"({
        "system": {"builtin": "radial_contraction"},
        "space": {"kind": "box", "bounds": [[-1.2, 1.2]]},
        "construction": {"type": "example4",
                         "functions": [{"value": "x*x", "gradient": ["2*x"]}],
                         "levels": [[0.005625, 0.0225, 0.09, 0.36, 1.44]],
                         "phi_mode": "verbatim", "n_trajectories": 16},
        "numerics": {"step": 0.001, "t_max": 20.0,
                     "time_grid": {"kind": "explicit", "times": [0.0, 1.0]}, "seed": 1},
        "checks": {"safety": {
            "init": {"kind": "ball", "center": [1.0], "radius": 0.05},
            "unsafe": {"kind": "ball", "center": [0.0], "radius": 0.01},
            "horizon": 1.0}}
    })");
    std::string text;
    CHECK(run("verify " + cfg, &text) == 5);
}

TEST_CASE("plot writes trajectories and the 2d cell picture") {
    fs::path out = work_dir() / "plot1";
    CHECK(run("-q --out " + out.string() + " plot " + config("radial_grid.json")) == 0);
    CHECK(fs::exists(out / "trajectories.csv"));
    CHECK(fs::exists(out / "cells_2d.svg"));
}

TEST_CASE("plot refuses dimension 3 with exit 6") {
    std::string cfg = write_config("three_d.json", R"({
        "system": {"builtin": "radial_contraction"},
        "space": {"kind": "box", "bounds": [[-1, 1], [-1, 1], [-1, 1]]},
        "construction": {"type": "example1", "grid": [2, 2, 2],
                         "matrices": [[[-1, 0, 0], [0, -1, 0], [0, 0, -1]]]},
        "numerics": {"step": 0.002, "t_max": 1.0,
                     "time_grid": {"kind": "log", "points": 4}, "seed": 1,
                     "coverage_samples": 4096}
    })");
    CHECK(run("--out " + (work_dir() / "plot3").string() + " plot " + cfg) == 6);
}

TEST_CASE("seeded runs produce byte-identical artifacts") {
    fs::path a = work_dir() / "det_a";
    fs::path b = work_dir() / "det_b";
    REQUIRE(run("-q --seed 7 --out " + a.string() + " check " +
                config("radial_grid.json")) == 0);
    REQUIRE(run("-q --seed 7 --out " + b.string() + " check " +
                config("radial_grid.json")) == 0);
    for (const char* f : {"cells.csv", "phi.csv", "violations.csv",
                          "conservativeness.csv"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK(!slurp(a / f).empty());
    }
}
