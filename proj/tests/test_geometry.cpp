#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "ekh/geometry.hpp"

using namespace ekh;

TEST_CASE("perturbed lattice: zero-amplitude limit is the shifted lattice") {
    DisperseParams params;
    params.delta_min = 1e-8;   // radius 1/2 leaves no slack; allow a hair gap
    params.r_min = 0.05;
    auto m = generate_perturbed_lattice(4, 0.0, 0.4999999, 0.4999999, 77, params);
    CHECK(m.grains.size() == 16);
    // all radii equal, centers on a shifted integer lattice
    double ex = m.grains[0].cx - std::floor(m.grains[0].cx + 0.5);
    for (const Grain& g : m.grains) {
        CHECK(g.r == doctest::Approx(0.4999999).epsilon(1e-9));
        double fx = g.cx - std::floor(g.cx + 0.5);
        double wrapdiff = std::abs(fx - ex);
        wrapdiff = std::min(wrapdiff, std::abs(wrapdiff - 1.0));
        CHECK(wrapdiff < 1e-12);
    }
}

TEST_CASE("generators are deterministic given the seed") {
    DisperseParams params;
    auto a = generate_perturbed_lattice(3, 0.25, 1.0 / 3, 2.0 / 3, 123, params);
    auto b = generate_perturbed_lattice(3, 0.25, 1.0 / 3, 2.0 / 3, 123, params);
    REQUIRE(a.grains.size() == b.grains.size());
    for (std::size_t i = 0; i < a.grains.size(); ++i) {
        CHECK(a.grains[i].cx == b.grains[i].cx);
        CHECK(a.grains[i].cy == b.grains[i].cy);
        CHECK(a.grains[i].r == b.grains[i].r);
    }
    auto c = generate_bernoulli(4, 0.5, 99, params);
    auto d = generate_bernoulli(4, 0.5, 99, params);
    for (std::size_t i = 0; i < c.grains.size(); ++i) CHECK(c.grains[i].r == d.grains[i].r);
}

TEST_CASE("bernoulli radii and R3 gap") {
    DisperseParams params;
    auto m1 = generate_bernoulli(4, 1.0, 5, params, 0.05);
    for (const Grain& g : m1.grains) CHECK(g.r == doctest::Approx(0.5 * 0.95));
    auto m0 = generate_bernoulli(4, 0.0, 5, params, 0.05);
    for (const Grain& g : m0.grains) CHECK(g.r == doctest::Approx(0.25 * 0.95));
    // brute-force pairwise distances: no two grains closer than the shrink gap
    for (std::size_t a = 0; a < m0.grains.size(); ++a)
        for (std::size_t b = a + 1; b < m0.grains.size(); ++b) {
            double gap = periodic_distance(m0.grains[a].cx, m0.grains[a].cy, m0.grains[b].cx,
                                           m0.grains[b].cy, m0.L) -
                         m0.grains[a].r - m0.grains[b].r;
            CHECK(gap >= 0.05);
        }
}

TEST_CASE("poisson-voronoi acceptance equals the nearest-neighbor rule") {
    DisperseParams params;
    const double r = 0.3;
    auto m = generate_poisson_voronoi(6, 1.0, r, 321, params, 0.05);
    // oracle: regenerate the raw points exactly like the generator does and
    // keep those with r <= d_nn/2
    // (the generator draws count from one stream and points from per-point streams)
    // Instead of reaching into internals, verify the property on the output:
    // kept grains are mutually consistent with the rule
    for (std::size_t a = 0; a < m.grains.size(); ++a)
        for (std::size_t b = a + 1; b < m.grains.size(); ++b) {
            double d = periodic_distance(m.grains[a].cx, m.grains[a].cy, m.grains[b].cx,
                                         m.grains[b].cy, m.L);
            CHECK(d >= 2.0 * r - 1e-12);   // both kept means d_nn >= 2r for each
        }
    // r larger than any half nearest-neighbor distance rejects everything
    auto m2 = generate_poisson_voronoi(4, 2.0, 10.0, 321, params);
    CHECK(m2.grains.empty());
}

TEST_CASE("poisson-voronoi strict_r5 fill makes R5 pass") {
    DisperseParams params;
    params.strict_r5 = true;
    params.r_0 = 1.0;
    params.delta_min = 0.02;
    params.r_min = 0.02;
    // very low intensity leaves big empty areas before the fill
    auto m = generate_poisson_voronoi(8, 0.05, 0.3, 11, params, 0.05);
    auto report = check_disperse(m, params);
    for (const auto& v : report) CHECK(v.rule != "R5");
}

TEST_CASE("check_disperse reports the named violations") {
    Microstructure m;
    m.L = 4.0;
    m.constraints = DisperseParams{};
    m.grains = {{1.0, 1.0, 0.5}, {2.0, 1.0, 0.5}};   // gap 0 exactly
    DisperseParams p;
    p.delta_min = 0.05;
    p.r_min = 0.1;
    p.r_max = 0.75;
    auto rep = check_disperse(m, p);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].rule == "R3");

    m.grains = {{1.0, 1.0, 0.85}};
    rep = check_disperse(m, p);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].rule == "R4");

    // empty disk-free square of side > 2 r_0 in strict mode
    DisperseParams ps;
    ps.strict_r5 = true;
    ps.r_0 = 0.5;
    m.L = 4.0;
    m.grains = {{0.5, 0.5, 0.3}};
    rep = check_disperse(m, ps);
    bool has_r5 = false;
    for (const auto& v : rep) has_r5 |= (v.rule == "R5");
    CHECK(has_r5);
}

TEST_CASE("voxelize: no grains gives the all-fluid mask") {
    Microstructure m;
    m.L = 1.0;
    m.generator = "bernoulli";
    auto fg = voxelize(m, 32);
    CHECK(fg.grid.fluid_cell_count() == 32 * 32);
    CHECK(fg.boundary.empty());
}

TEST_CASE("voxelize: solid fraction of a centered disk approaches pi r^2") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.25}};
    auto fg = voxelize(m, 256);
    double solid = 1.0 - fg.porosity();
    CHECK(std::abs(solid - M_PI / 16.0) < 0.01 * M_PI / 16.0);
    // first-order convergence of the staircase area
    auto fg2 = voxelize(m, 512);
    double solid2 = 1.0 - fg2.porosity();
    CHECK(std::abs(solid2 - M_PI / 16.0) < std::abs(solid - M_PI / 16.0));
}

TEST_CASE("voxelize: per-grain weights sum to the exact perimeter") {
    Microstructure m;
    m.L = 2.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.3}, {1.5, 1.4, 0.25}};
    auto fg = voxelize(m, 64);
    std::vector<double> sums(2, 0.0);
    for (const auto& f : fg.boundary) sums[f.grain] += f.weight;
    CHECK(sums[0] == doctest::Approx(2 * M_PI * 0.3).epsilon(1e-12));
    CHECK(sums[1] == doctest::Approx(2 * M_PI * 0.25).epsilon(1e-12));
}

TEST_CASE("voxelize rejects too-coarse resolution") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.05;
    m.grains = {{0.5, 0.5, 0.25}};
    CHECK_THROWS_AS(voxelize(m, 32), Error);   // h = 1/32 > delta_min/4
}

TEST_CASE("microstructure file round-trip") {
    DisperseParams params;
    auto m = generate_bernoulli(3, 0.5, 2024, params);
    write_microstructure("/tmp/ekh_micro.txt", m);
    auto m2 = read_microstructure("/tmp/ekh_micro.txt");
    CHECK(m2.L == m.L);
    CHECK(m2.generator == m.generator);
    CHECK(m2.seed == m.seed);
    REQUIRE(m2.grains.size() == m.grains.size());
    for (std::size_t i = 0; i < m.grains.size(); ++i) {
        CHECK(m2.grains[i].cx == m.grains[i].cx);
        CHECK(m2.grains[i].r == m.grains[i].r);
    }
    std::remove("/tmp/ekh_micro.txt");
}
