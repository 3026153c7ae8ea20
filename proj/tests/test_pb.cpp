#include <doctest.h>

#include <cmath>

#include "ekh/pb.hpp"
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

// torus, solid for x in [0, L/2): a plane channel of width L/2
FluidGrid slab_grid(int n, double L) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n / 2; ++i) mask[static_cast<std::size_t>(j) * n + i] = 0;
    return fluid_grid_from_mask(n, L, mask);
}

FluidGrid disk_fluid_grid(int n, double L, double r, double delta_min = 0.2) {
    Microstructure m;
    m.L = L;
    m.constraints.delta_min = delta_min;
    m.grains = {{L / 2, L / 2, r}};
    return voxelize(m, n);
}

// dense 1D oracle for -v'' + v = 0 on [0, W], v'(0) = q, v'(W) = -q
std::vector<double> lift_1d_oracle(double q, double W, int m) {
    std::vector<double> a(m), b(m), c(m), d(m), v(m);
    const double h = W / m;
    for (int i = 0; i < m; ++i) {
        double diag = 2.0 / (h * h) + 1.0;
        if (i == 0 || i == m - 1) diag -= 1.0 / (h * h);
        b[i] = diag;
        a[i] = i > 0 ? -1.0 / (h * h) : 0.0;
        c[i] = i < m - 1 ? -1.0 / (h * h) : 0.0;
        d[i] = 0.0;
    }
    d[0] = -q / h;
    d[m - 1] = -q / h;
    for (int i = 1; i < m; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    v[m - 1] = d[m - 1] / b[m - 1];
    for (int i = m - 2; i >= 0; --i) v[i] = (d[i] - c[i] * v[i + 1]) / b[i];
    return v;
}

} // namespace

TEST_CASE("screened lift: sigma = 0 gives the zero field") {
    auto fg = disk_fluid_grid(64, 1.0, 0.25);
    SurfaceCharge sc;
    sc.value = 0.0;
    auto lift = solve_screened_lift(fg, sc, 1.0);
    for (double v : lift.v.v) CHECK(v == 0.0);
    CHECK(lift.V_m == 0.0);
    CHECK(lift.V_M == 0.0);
}

TEST_CASE("screened lift: 1D slab matches the dense two-point oracle") {
    const int n = 128;
    auto fg = slab_grid(n, 2.0);
    SurfaceCharge sc;
    sc.value = 0.3;
    const double nsig = 1.0;
    auto lift = solve_screened_lift(fg, sc, nsig, 1e-12);
    // same discretization in 1D: channel width 1, 64 cells
    auto oracle = lift_1d_oracle(nsig * sc.value, 1.0, n / 2);
    double emax = 0.0, vmax = 0.0;
    const Grid2D& g = fg.grid;
    for (int k = 0; k < n / 2; ++k) {
        double v2d = lift.v.v[g.cidx(n / 2 + k, 7)];
        emax = std::max(emax, std::abs(v2d - oracle[k]));
        vmax = std::max(vmax, std::abs(oracle[k]));
    }
    CHECK(emax < 1e-6 * vmax);
    // analytic cross-check of the oracle: v = a cosh(x - W/2) / 1, a = -q/sinh(W/2)
    double aa = -nsig * sc.value / std::sinh(0.5);
    const double h1 = 1.0 / (n / 2);
    double emax2 = 0.0;
    for (int k = 0; k < n / 2; ++k) {
        double x = (k + 0.5) * h1;
        emax2 = std::max(emax2, std::abs(oracle[k] - aa * std::cosh(x - 0.5)));
    }
    CHECK(emax2 < 5e-4 * std::abs(aa));
}

TEST_CASE("screened lift bounds sit inside the barrier estimate") {
    auto fg = disk_fluid_grid(64, 1.0, 0.25);
    SurfaceCharge sc;
    sc.value = 0.2;
    const double nsig = 1.0;
    auto lift = solve_screened_lift(fg, sc, nsig);
    double c0 = sc.bound(nsig);
    // k = min(r_min, delta_min / 2) for the single-disk fixture
    double chat = screened_lift_barrier_bound(c0, std::min(0.25, 0.1), 0.25);
    CHECK(std::abs(lift.V_m) <= 2.0 * chat);
    CHECK(std::abs(lift.V_M) <= 2.0 * chat);
}

TEST_CASE("gouy-chapman oracle basics") {
    auto zero = gouy_chapman_oracle(1.0, 0.5, 0.0, 1.0, 1.0, 256);
    for (double v : zero.psi) CHECK(v == 0.0);

    auto gc = gouy_chapman_oracle(1.0, 0.5, 0.5, 1.0, 1.0, 4096);
    auto gc2 = gouy_chapman_oracle(1.0, 0.5, 0.5, 1.0, 1.0, 8192);
    // mesh-doubling self-consistency (Richardson check of the oracle itself)
    double diff = 0.0;
    for (int i = 0; i < 4096; ++i)
        diff = std::max(diff, std::abs(gc.psi[i] - gc2.eval(gc.x[i])));
    CHECK(diff < 1e-8);
    // attracted counter-ions: sign(psi near wall) = -sign(sigma)
    CHECK(gc.psi.front() < 0.0);
    auto gcm = gouy_chapman_oracle(1.0, 0.5, -0.5, 1.0, 1.0, 512);
    CHECK(gcm.psi.front() > 0.0);
}

TEST_CASE("equilibrium: sigma = 0 gives psi = 0 and n_j = n_j^c exactly") {
    auto fg = disk_fluid_grid(64, 1.0, 0.25);
    auto spec = binary_spec();
    SurfaceCharge sc;
    sc.value = 0.0;
    auto eq = solve_equilibrium(fg, spec, sc);
    for (int c = 0; c < fg.grid.ncells(); ++c) {
        CHECK(eq.psi.v[c] == 0.0);
        if (fg.grid.fluid[c]) {
            CHECK(eq.n0[0].v[c] == spec.n_c[0]);
            CHECK(eq.n0[1].v[c] == spec.n_c[1]);
        }
    }
}

TEST_CASE("equilibrium: 1D slab matches the gouy-chapman oracle") {
    const int n = 256;
    auto fg = slab_grid(n, 2.0);
    auto spec = binary_spec();
    SurfaceCharge sc;
    sc.value = 0.5;   // N_sigma sigma = 0.5
    auto eq = solve_equilibrium(fg, spec, sc);
    auto gc = gouy_chapman_oracle(spec.beta, spec.n_c[0], sc.value, spec.n_sigma, 1.0, 1024);
    const Grid2D& g = fg.grid;
    double emax = 0.0, pmax = 0.0;
    for (int k = 0; k < n / 2; ++k) {
        double d = (k + 0.5) * g.h;   // distance from the left wall
        double ref = gc.eval(d);
        emax = std::max(emax, std::abs(eq.psi.v[g.cidx(n / 2 + k, 3)] - ref));
        pmax = std::max(pmax, std::abs(ref));
    }
    CHECK(emax < 2e-3 * pmax);
    // profile is invariant in y
    for (int k = 0; k < n / 2; k += 17)
        CHECK(eq.psi.v[g.cidx(n / 2 + k, 1)] ==
              doctest::Approx(eq.psi.v[g.cidx(n / 2 + k, n - 2)]).epsilon(1e-12));
}

TEST_CASE("equilibrium: a-priori bounds, balance, cutoff, consistency") {
    auto fg = disk_fluid_grid(128, 1.5, 0.4, 0.1);
    auto spec = binary_spec();
    SurfaceCharge sc;
    sc.value = 0.2;
    auto eq = solve_equilibrium(fg, spec, sc);
    const Grid2D& g = fg.grid;
    // computed field obeys the bound-constant window
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) {
            CHECK(eq.psi.v[c] >= eq.bounds.psi_min);
            CHECK(eq.psi.v[c] <= eq.bounds.psi_max);
        }
    // cut-off inactive
    double pmax = 0.0;
    for (int c = 0; c < g.ncells(); ++c) pmax = std::max(pmax, std::abs(eq.psi.v[c]));
    CHECK(pmax < eq.n_cut);
    // total-charge balance (discrete compatibility)
    CHECK(std::abs(charge_balance_residual(fg, spec, sc, eq)) < 1e-8);
    // pointwise consistency of concentrations
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) {
            for (int j = 0; j < spec.N; ++j) {
                double expect = spec.n_c[j] * std::exp(-spec.z[j] * eq.psi.v[c]);
                CHECK(eq.n0[j].v[c] == doctest::Approx(expect).epsilon(1e-14));
                CHECK(eq.n0[j].v[c] > 0.0);
            }
        }
    // energy trace non-increasing across accepted steps
    for (std::size_t i = 1; i < eq.energy_trace.size(); ++i)
        CHECK(eq.energy_trace[i] <= eq.energy_trace[i - 1] + 1e-14);
    // sign rule: psi < 0 near positive sigma (counter-ions attracted)
    CHECK(eq.psi.v[fg.boundary.front().cell] < 0.0);
}

TEST_CASE("equilibrium residual is the gradient of the discrete energy") {
    auto fg = disk_fluid_grid(32, 1.0, 0.2, 0.125);
    auto spec = binary_spec();
    SurfaceCharge sc;
    sc.value = 0.3;
    ScalarField src = boundary_charge_source(fg, sc, spec.n_sigma);
    const Grid2D& g = fg.grid;
    const double ncut = 4.0;
    ScalarField psi(g);
    CounterRng rng(77, 1);
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) psi.v[c] = rng.next_uniform(-0.5, 0.5);
    ScalarField r = pb_residual(fg, spec, src, psi, ncut);
    for (int dir = 0; dir < 10; ++dir) {
        ScalarField d(g);
        CounterRng rd(100 + dir, 2);
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) d.v[c] = rd.next_uniform(-1, 1);
        const double epsd = 1e-6;
        ScalarField pp(g), pm(g);
        for (int c = 0; c < g.ncells(); ++c) {
            pp.v[c] = psi.v[c] + epsd * d.v[c];
            pm.v[c] = psi.v[c] - epsd * d.v[c];
        }
        double fd = (pb_energy(fg, spec, src, pp, ncut) - pb_energy(fg, spec, src, pm, ncut)) /
                    (2 * epsd);
        double an = dot_cells(r, d);
        CHECK(fd == doctest::Approx(an).epsilon(1e-6));
    }
}
