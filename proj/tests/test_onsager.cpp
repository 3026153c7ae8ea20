#include <doctest.h>

#include <cmath>

#include "ekh/onsager.hpp"
#include "ekh/rng.hpp"

using namespace ekh;

namespace {

ElectrolyteSpec binary_spec() {
    ElectrolyteSpec s;
    s.N = 2;
    s.z = {-1, 1};
    s.n_c = {0.5, 0.5};
    s.pe = {1.0, 1.0};
    s.beta = 1.0;
    s.n_sigma = 1.0;
    return s;
}

struct Realization {
    FluidGrid fg;
    ElectrolyteSpec spec;
    EquilibriumState eq;
    std::vector<CellSolution> cells;
    OnsagerTensor tensor;
};

Realization make_realization(const Microstructure& m, int n, double sigma, double tol = 1e-10) {
    Realization r{voxelize(m, n), binary_spec(), {}, {}, {}};
    SurfaceCharge sc;
    sc.value = sigma;
    r.eq = solve_equilibrium(r.fg, r.spec, sc, tol);
    CellContext ctx(r.fg, r.eq, r.spec);
    for (int fam = 0; fam <= r.spec.N; ++fam)
        for (int k = 1; k <= 2; ++k) r.cells.push_back(solve_cell(ctx, fam, k, tol));
    r.tensor = assemble_tensor(ctx, r.cells);
    return r;
}

} // namespace

TEST_CASE("jacobi eigenvalues of a known symmetric matrix") {
    SmallMat m = SmallMat::zero(3);
    // eigenvalues 1, 2, 4 via a rotated diagonal
    m.at(0, 0) = 2.5;
    m.at(0, 1) = 1.5;
    m.at(1, 0) = 1.5;
    m.at(1, 1) = 2.5;
    m.at(2, 2) = 2.0;
    auto ev = jacobi_eigenvalues(m);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ev[2] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("check_onsager on the identity matrix") {
    OnsagerTensor t;
    t.B = SmallMat::zero(6);
    for (int i = 0; i < 6; ++i) t.B.at(i, i) = 1.0;
    auto c = check_onsager(t);
    CHECK(c.asym == 0.0);
    CHECK(c.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.pass);
}

TEST_CASE("uncharged single disk: K is isotropic and equals pure Stokes permeability") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.25}};
    auto r = make_realization(m, 64, 0.0, 1e-11);
    const Mat2& K = r.tensor.K;
    CHECK(std::abs(K[0][1]) <= 1e-6 * K[0][0]);
    CHECK(std::abs(K[1][0]) <= 1e-6 * K[0][0]);
    CHECK(K[0][0] == doctest::Approx(K[1][1]).epsilon(1e-6));
    CHECK(K[0][0] > 0.0);

    // standalone Stokes permeability oracle
    const Grid2D& g = r.fg.grid;
    MacVectorField f(g);
    for (int i = 0; i < g.nfx(); ++i)
        if (g.fx[i] == FaceKind::Open) f.x[i] = 1.0;
    MacVectorField v;
    ScalarField p;
    solve_stokes(g, f, 1e-11, 3000, v, p);
    double kxx = 0.0;
    {
        std::vector<double> terms;
        for (int i = 0; i < g.nfx(); ++i)
            if (g.fx[i] == FaceKind::Open) terms.push_back(v.x[i]);
        kxx = csum(terms) * g.h * g.h / (g.Lx * g.Ly);
    }
    CHECK(K[0][0] == doctest::Approx(kxx).epsilon(1e-8));
}

TEST_CASE("charged single disk: symmetry, positive definiteness, block relations") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.25}};
    auto r = make_realization(m, 64, 0.2, 1e-11);
    auto chk = check_onsager(r.tensor);
    CHECK(chk.asym <= 1e-6);
    CHECK(chk.lambda_min > 0.0);
    CHECK(chk.pass);
    // K block alone is SPD-symmetric
    CHECK(std::abs(r.tensor.K[0][1] - r.tensor.K[1][0]) <= 1e-8 * r.tensor.K[0][0]);
    CHECK(r.tensor.K[0][0] > 0.0);
    CHECK(r.tensor.K[0][0] * r.tensor.K[1][1] >
          r.tensor.K[0][1] * r.tensor.K[1][0]);
    // block reciprocity
    const auto& t = r.tensor;
    double scale = 0.0;
    for (int i = 0; i < t.B.n; ++i)
        for (int j = 0; j < t.B.n; ++j) scale = std::max(scale, std::abs(t.B.at(i, j)));
    for (int i = 0; i < t.N; ++i)
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k)
                CHECK(t.Lm[i][l][k] ==
                      doctest::Approx(t.Jm[i][k][l] / binary_spec().z[i]).epsilon(1e-6).scale(
                          scale));
    for (int i = 0; i < t.N; ++i)
        for (int j = 0; j < t.N; ++j)
            for (int l = 0; l < 2; ++l)
                for (int k = 0; k < 2; ++k)
                    CHECK(t.D[i][j][l][k] / binary_spec().z[j] ==
                          doctest::Approx(t.D[j][i][k][l] / binary_spec().z[i])
                              .epsilon(1e-6)
                              .scale(scale));
}

TEST_CASE("energy identity: combination dissipation equals q^T B q") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.22}};
    auto r = make_realization(m, 64, 0.15, 1e-11);
    CellContext ctx(r.fg, r.eq, r.spec);
    CounterRng rng(99, 0);
    for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> coef(6);
        for (auto& c : coef) c = rng.next_uniform(-1, 1);
        double diss = combination_dissipation(ctx, r.cells, coef);
        // q = (eta0, z_j eta_j) in the block layout
        std::vector<double> q(6);
        q[0] = coef[0];
        q[1] = coef[1];
        for (int j = 0; j < 2; ++j) {
            q[2 * (j + 1)] = r.spec.z[j] * coef[2 * (j + 1)];
            q[2 * (j + 1) + 1] = r.spec.z[j] * coef[2 * (j + 1) + 1];
        }
        double qbq = 0.0;
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) qbq += q[a] * r.tensor.B.at(a, b) * q[b];
        CHECK(diss == doctest::Approx(qbq).epsilon(1e-9).scale(std::abs(diss) + 1e-12));
        CHECK(diss >= 0.0);
    }
}

TEST_CASE("RVE consistency: tiling the pattern leaves the tensor unchanged") {
    Microstructure m1;
    m1.L = 1.0;
    m1.constraints.delta_min = 0.2;
    m1.grains = {{0.5, 0.5, 0.25}};
    auto r1 = make_realization(m1, 64, 0.2, 1e-11);
    Microstructure m2;
    m2.L = 2.0;
    m2.constraints.delta_min = 0.2;
    m2.grains = {{0.5, 0.5, 0.25}, {1.5, 0.5, 0.25}, {0.5, 1.5, 0.25}, {1.5, 1.5, 0.25}};
    auto r2 = make_realization(m2, 128, 0.2, 1e-11);
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
            CHECK(r1.tensor.B.at(a, b) ==
                  doctest::Approx(r2.tensor.B.at(a, b)).epsilon(1e-6).scale(
                      std::abs(r1.tensor.B.at(0, 0))));
}

TEST_CASE("ensemble average: stderr formula and permutation invariance") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.25}};
    auto r = make_realization(m, 64, 0.1, 1e-10);
    OnsagerTensor a = r.tensor, b = r.tensor, c = r.tensor;
    a.seed = 1;
    b.seed = 2;
    c.seed = 3;
    // identical copies: stderr exactly zero
    auto e = ensemble_average({a, b, c});
    for (int i = 0; i < e.mean.n; ++i)
        for (int j = 0; j < e.mean.n; ++j) {
            CHECK(e.stderr_.at(i, j) == 0.0);
            CHECK(e.mean.at(i, j) == a.B.at(i, j));
        }
    // permutation invariance of the mean with distinct members
    b.B.at(0, 0) *= 1.1;
    c.B.at(0, 0) *= 0.9;
    auto e1 = ensemble_average({a, b, c});
    auto e2 = ensemble_average({c, a, b});
    CHECK(e1.mean.at(0, 0) == doctest::Approx(e2.mean.at(0, 0)).epsilon(1e-15));
    // mixed configurations are rejected
    OnsagerTensor alien = a;
    alien.grid_n = 32;
    CHECK_THROWS_AS(ensemble_average({a, alien}), Error);
}

TEST_CASE("tensor json round trip preserves every entry bit-exactly") {
    Microstructure m;
    m.L = 1.0;
    m.constraints.delta_min = 0.2;
    m.grains = {{0.5, 0.5, 0.2}};
    auto r = make_realization(m, 64, 0.1, 1e-10);
    r.tensor.config_hash = "deadbeef";
    r.tensor.seed = 77;
    std::string js = tensor_to_json(r.tensor);
    auto t2 = tensor_from_json(js);
    CHECK(t2.config_hash == r.tensor.config_hash);
    CHECK(t2.seed == r.tensor.seed);
    CHECK(t2.porosity == r.tensor.porosity);
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) CHECK(t2.B.at(a, b) == r.tensor.B.at(a, b));
    CHECK(tensor_to_json(t2) == js);
}
