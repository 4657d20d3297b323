#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dynab/checks.hpp"
#include "dynab/cover_abstraction.hpp"

using namespace dynab;

namespace {

Vec pt(std::initializer_list<double> v) {
    Vec x(static_cast<int>(v.size()));
    int i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

StateSpace square() { return StateSpace(StateSpace::Kind::Box, {{-1, 1}, {-1, 1}}); }

OrderedCover quadrants() {
    StateSpace sp = square();
    return build_ordered_cover(sp, grid_partition(sp, {2, 2}), 2048, 7);
}

}  // namespace

TEST_CASE("pol_sample prepends the vertices and stays in the cone") {
    std::vector<Vec> vs = {pt({1, 0}), pt({0, 1})};
    auto combos = pol_sample(vs, 50, 3);
    REQUIRE(combos.size() == 52);
    CHECK(combos[0] == vs[0]);
    CHECK(combos[1] == vs[1]);
    for (const Vec& p : combos) {
        CHECK(p[0] >= 0.0);
        CHECK(p[1] >= 0.0);
        // orthonormal vertices: |sum a_i v_i| = |a| = 1 on the sphere
        CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("simplex coefficients sum to one") {
    std::vector<Vec> vs = {pt({1, 0}), pt({0, 1})};
    for (const Vec& p : pol_sample(vs, 50, 3, AlphaNorm::Simplex)) {
        CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p[0] >= 0.0);
    }
}

TEST_CASE("pol_sample is deterministic in the seed") {
    std::vector<Vec> vs = {pt({1, 0.5}), pt({-0.2, 1})};
    auto a = pol_sample(vs, 20, 11);
    auto b = pol_sample(vs, 20, 11);
    auto c = pol_sample(vs, 20, 12);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    CHECK(a.back() != c.back());
}

TEST_CASE("nnls solves the unconstrained case when feasible") {
    Mat M = Mat::Identity(2, 2);
    Vec x = nnls(M, pt({1, 2}));
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("nnls clips active negative coordinates") {
    Mat M = Mat::Identity(2, 2);
    Vec x = nnls(M, pt({-1, 2}));
    CHECK(x[0] == 0.0);
    CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("nnls on a tall system") {
    Mat M(3, 2);
    M << 1, 0, 0, 1, 1, 1;
    Vec b = pt({1, 1, 2});  // exactly M * (1,1)
    Vec x = nnls(M, b);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
    CHECK((b - M * x).norm() < 1e-10);
}

TEST_CASE("max_norm over the family") {
    Mat A = 3 * Mat::Identity(2, 2);
    Mat B(2, 2);
    B << 0, 1, -1, 0;
    LinearFamily fam{{A, B}};
    CHECK(fam.max_norm() == doctest::Approx(3.0));
    CHECK(fam.count() == 2);
    CHECK(fam.dim() == 2);
}

TEST_CASE("inclusion holds for the radial field against { -I }") {
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    auto rep = check_inclusion(VectorFieldSpec::radial_contraction(2), square(), fam, 200,
                               1e-8, 5);
    CHECK(rep.included);
    CHECK(rep.worst_residual < 1e-8);
}

TEST_CASE("inclusion holds with a redundant matrix in the family") {
    Mat R(2, 2);
    R << 0, 1, -1, 0;
    LinearFamily fam{{-Mat::Identity(2, 2), R}};
    auto rep = check_inclusion(VectorFieldSpec::radial_contraction(2), square(), fam, 200,
                               1e-6, 5);
    CHECK(rep.included);
}

TEST_CASE("inclusion fails for rotation against { -I }") {
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    auto rep = check_inclusion(VectorFieldSpec::rotation(), square(), fam, 200, 1e-6, 5);
    CHECK(!rep.included);
    CHECK(rep.worst_residual > 0.1);
    CHECK(rep.worst_point.size() == 2);
}

TEST_CASE("default bloat grows with t and the family norm") {
    LinearFamily fam{{-2 * Mat::Identity(2, 2)}};
    CHECK(default_bloat(1e-3, fam, 1.0) == doctest::Approx(4e-6));
    CHECK(default_bloat(1e-3, fam, 2.0) > default_bloat(1e-3, fam, 1.0));
}

TEST_CASE("phi at t = 0 contains the source cell") {
    auto cover = quadrants();
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    CoverAbstractionOptions opt;
    for (CellId z = 0; z < cover.size(); ++z) {
        auto img = compute_phi_ex1(cover, fam, 0.0, z, opt, 1e-3, 9);
        CHECK(std::find(img.begin(), img.end(), z) != img.end());
    }
}

TEST_CASE("negative time is rejected") {
    auto cover = quadrants();
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    CHECK_THROWS_AS(compute_phi_ex1(cover, fam, -1.0, 0, {}, 1e-3, 9), ConfigError);
}

TEST_CASE("radial field keeps quadrants almost invariant") {
    auto cover = quadrants();
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    CoverAbstractionOptions opt;
    opt.bloat = 0.0;  // no cushion: contraction is exactly quadrant-invariant
    for (CellId z = 0; z < cover.size(); ++z) {
        auto img = compute_phi_ex1(cover, fam, 1.0, z, opt, 1e-3, 9);
        CHECK(std::find(img.begin(), img.end(), z) != img.end());
        // boundary corners of the cell land on quadrant boundaries; the
        // min-index rule may pull those onto lower-indexed cells, never higher
        for (CellId zz : img) CHECK(zz <= z);
    }
}

TEST_CASE("the quadrant system over-approximates the radial flow") {
    StateSpace sp = square();
    auto cover = quadrants();
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    ContinuousSystem C{VectorFieldSpec::radial_contraction(2), sp, FlowConfig{1e-3, 5.0}};
    auto grid = default_time_grid(5.0, 12);
    DiscreteSystem D = build_ex1_system(cover, fam, {}, 1e-3, grid, 7, true);
    auto rep = check_over_approximation(C, D, cover, 400, grid, 7);
    CHECK(rep.verdict);
    CHECK(rep.violations.empty());
    CHECK(rep.checked >= 400);
}

TEST_CASE("a deliberately broken phi is caught by the over-check") {
    StateSpace sp = square();
    auto cover = quadrants();
    ContinuousSystem C{VectorFieldSpec::radial_contraction(2), sp, FlowConfig{1e-3, 5.0}};
    auto grid = default_time_grid(5.0, 8);
    // claims every cell maps only to cell 0
    DiscreteSystem D(cover.size(), [](double, CellId) { return std::vector<CellId>{0}; },
                     grid);
    auto rep = check_over_approximation(C, D, cover, 400, grid, 7);
    CHECK(!rep.verdict);
    CHECK(!rep.violations.empty());
    CHECK(rep.violations.front().predicted == std::vector<CellId>{0});
}

TEST_CASE("phi image is sorted and unique") {
    auto cover = quadrants();
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    DiscreteSystem D = build_ex1_system(cover, fam, {}, 1e-3, {0.0, 0.5, 1.0}, 7, true);
    for (double t : {0.0, 0.5, 1.0})
        for (CellId z = 0; z < cover.size(); ++z) {
            auto img = D.phi(t, z);
            CHECK(std::is_sorted(img.begin(), img.end()));
            CHECK(std::adjacent_find(img.begin(), img.end()) == img.end());
        }
}

TEST_CASE("over-approximation tag follows inclusion verification") {
    auto cover = quadrants();
    LinearFamily fam{{-Mat::Identity(2, 2)}};
    CHECK(build_ex1_system(cover, fam, {}, 1e-3, {0.0}, 7, true).over_approximation_tag());
    CHECK(!build_ex1_system(cover, fam, {}, 1e-3, {0.0}, 7, false).over_approximation_tag());
}

TEST_CASE("a two-matrix family spreads the image with t") {
    // expansion in x vs expansion in y: the pol mixes them, so the image
    // of the inner cell grows over time
    StateSpace sp = square();
    auto cover = build_ordered_cover(sp, grid_partition(sp, {8, 8}), 4096, 3);
    Mat A(2, 2), B(2, 2);
    A << 0.8, 0, 0, -0.5;
    B << -0.5, 0, 0, 0.8;
    LinearFamily fam{{A, B}};
    CoverAbstractionOptions opt;
    opt.alpha_samples = 128;
    // convex combinations keep the t -> 0 image near the source cell
    opt.alpha_norm = AlphaNorm::Simplex;
    CellId z = cover.abstract_point(pt({-0.1, -0.1}));
    auto small = compute_phi_ex1(cover, fam, 0.01, z, opt, 1e-3, 5);
    auto big = compute_phi_ex1(cover, fam, 1.5, z, opt, 1e-3, 5);
    CHECK(big.size() > small.size());
    // everything still reached at small t stays reachable at large t here
    for (CellId c : small)
        CHECK(std::find(big.begin(), big.end(), c) != big.end());
}
