#include "ekh/pb.hpp"

#include <algorithm>
#include <cmath>

namespace ekh {

ScalarField boundary_charge_source(const FluidGrid& fg, const SurfaceCharge& sc,
                                   double n_sigma) {
    const Grid2D& g = fg.grid;
    ScalarField src(g);
    const double ih2 = 1.0 / (g.h * g.h);
    for (const BoundaryFace& f : fg.boundary)
        src.v[f.cell] += n_sigma * sc.at(f.grain) * f.weight * ih2;
    return src;
}

namespace {
std::vector<double> open_face_coefs(const Grid2D& g, int comp) {
    std::vector<double> w(comp == 0 ? g.nfx() : g.nfy(), 0.0);
    const auto& kinds = comp == 0 ? g.fx : g.fy;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (kinds[i] == FaceKind::Open) w[i] = 1.0;
    return w;
}
} // namespace

ScreenedLift solve_screened_lift(const FluidGrid& fg, const SurfaceCharge& sc, double n_sigma,
                                 double tol) {
    const Grid2D& g = fg.grid;
    Stencil5 A = make_scalar_diffusion_stencil(g, open_face_coefs(g, 0), open_face_coefs(g, 1),
                                               false);
    for (int c = 0; c < A.size(); ++c)
        if (A.active[c]) A.diag[c] += 1.0;
    A.singular = false;
    ScalarField rhs = boundary_charge_source(fg, sc, n_sigma);
    for (auto& v : rhs.v) v = -v;
    ScreenedLift out;
    auto [v, rep] = solve_spd(A, rhs, tol, 100 * std::max(g.nx, g.ny), false);
    out.v = std::move(v);
    out.report = rep;
    out.V_m = 0.0;
    out.V_M = 0.0;
    bool first = true;
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) {
            if (first) {
                out.V_m = out.V_M = out.v.v[c];
                first = false;
            } else {
                out.V_m = std::min(out.V_m, out.v.v[c]);
                out.V_M = std::max(out.V_M, out.v.v[c]);
            }
        }
    return out;
}

double pb_energy(const FluidGrid& fg, const ElectrolyteSpec& spec, const ScalarField& src,
                 const ScalarField& psi, double ncut) {
    const Grid2D& g = fg.grid;
    ScalarField lpsi = lap(psi);
    double quad = 0.0;
    std::vector<double> terms;
    terms.reserve(g.ncells());
    for (int c = 0; c < g.ncells(); ++c) {
        if (!g.fluid[c]) continue;
        terms.push_back(-0.5 * lpsi.v[c] * psi.v[c] +
                        spec.beta * hardy_cutoff_primitive(spec, psi.v[c], ncut) +
                        src.v[c] * psi.v[c]);
    }
    quad = csum(terms) * g.h * g.h;
    return quad;
}

ScalarField pb_residual(const FluidGrid& fg, const ElectrolyteSpec& spec,
                        const ScalarField& src, const ScalarField& psi, double ncut) {
    const Grid2D& g = fg.grid;
    ScalarField r = lap(psi);
    for (int c = 0; c < g.ncells(); ++c)
        r.v[c] = g.fluid[c]
                     ? -r.v[c] + spec.beta * hardy_cutoff(spec, psi.v[c], ncut) + src.v[c]
                     : 0.0;
    return r;
}

EquilibriumState solve_equilibrium(const FluidGrid& fg, const ElectrolyteSpec& spec,
                                   const SurfaceCharge& sc, double tol, int max_newton) {
    validate_electrolyte(spec);
    const Grid2D& g = fg.grid;
    EquilibriumState eq;
    ScreenedLift lift = solve_screened_lift(fg, sc, spec.n_sigma, tol);
    eq.bounds = bound_constants(spec, lift.V_m, lift.V_M);
    eq.n_cut = 2.0 * (std::abs(eq.bounds.psi_min) + std::abs(eq.bounds.psi_max) + 1.0);
    ScalarField src = boundary_charge_source(fg, sc, spec.n_sigma);
    ScalarField psi(g);

    auto wx = open_face_coefs(g, 0);
    auto wy = open_face_coefs(g, 1);
    ScalarField r = pb_residual(fg, spec, src, psi, eq.n_cut);
    const double scale = norm_cells(r);
    SolveReport rep;
    rep.method = "newton-armijo";
    double energy = pb_energy(fg, spec, src, psi, eq.n_cut);
    eq.energy_trace.push_back(energy);
    if (scale > 0.0) {
        bool done = false;
        for (int it = 1; it <= max_newton && !done; ++it) {
            Stencil5 H = make_scalar_diffusion_stencil(g, wx, wy, false);
            for (int c = 0; c < g.ncells(); ++c)
                if (H.active[c])
                    H.diag[c] +=
                        spec.beta * hardy_cutoff_derivative(spec, psi.v[c], eq.n_cut);
            H.singular = false;
            ScalarField minus_r(g);
            for (int c = 0; c < g.ncells(); ++c) minus_r.v[c] = -r.v[c];
            auto [delta, drep] = solve_spd(H, minus_r, 1e-12, 200 * std::max(g.nx, g.ny), false);
            // Armijo backtracking; grad J . delta = <r, delta> h^2
            double slope = dot_cells(r, delta);
            double alpha = 1.0;
            ScalarField trial(g);
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                for (int c = 0; c < g.ncells(); ++c)
                    trial.v[c] = g.fluid[c] ? psi.v[c] + alpha * delta.v[c] : 0.0;
                double etrial = pb_energy(fg, spec, src, trial, eq.n_cut);
                if (etrial <= energy + 1e-4 * alpha * slope) {
                    psi = trial;
                    energy = etrial;
                    eq.energy_trace.push_back(energy);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted)
                throw Error(ErrorCode::NoConvergence, "pb line search failed to descend");
            r = pb_residual(fg, spec, src, psi, eq.n_cut);
            rep.iterations = it;
            rep.rel_residual = norm_cells(r) / scale;
            if (rep.rel_residual <= tol) done = true;
        }
        if (!done)
            throw Error(ErrorCode::NoConvergence, "pb newton did not reach tolerance");
    } else {
        rep.rel_residual = 0.0;
    }
    rep.converged = true;
    double psimax = 0.0;
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) psimax = std::max(psimax, std::abs(psi.v[c]));
    if (psimax >= eq.n_cut)
        throw Error(ErrorCode::CutoffActive, "cut-off active at the solution");
    eq.psi = std::move(psi);
    eq.n0 = equilibrium_concentrations(eq.psi, spec);
    eq.energy = energy;
    eq.report = rep;
    return eq;
}

std::vector<ScalarField> equilibrium_concentrations(const ScalarField& psi,
                                                    const ElectrolyteSpec& spec) {
    const Grid2D& g = *psi.g;
    std::vector<ScalarField> out;
    out.reserve(spec.N);
    for (int j = 0; j < spec.N; ++j) {
        ScalarField n(g);
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) n.v[c] = spec.n_c[j] * std::exp(-spec.z[j] * psi.v[c]);
        out.push_back(std::move(n));
    }
    return out;
}

double charge_balance_residual(const FluidGrid& fg, const ElectrolyteSpec& spec,
                               const SurfaceCharge& sc, const EquilibriumState& eq) {
    const Grid2D& g = fg.grid;
    std::vector<double> terms;
    terms.reserve(g.ncells());
    for (int c = 0; c < g.ncells(); ++c) {
        if (!g.fluid[c]) continue;
        double q = 0.0;
        for (int j = 0; j < spec.N; ++j) q += spec.z[j] * eq.n0[j].v[c];
        terms.push_back(q);
    }
    double fluid_charge = spec.beta * csum(terms) * g.h * g.h;
    double surface = 0.0, surface_abs = 0.0;
    for (const BoundaryFace& f : fg.boundary) {
        surface += spec.n_sigma * sc.at(f.grain) * f.weight;
        surface_abs += std::abs(spec.n_sigma * sc.at(f.grain)) * f.weight;
    }
    double denom = std::max(surface_abs, 1e-300);
    return (fluid_charge - surface) / denom;
}

double GouyChapman1D::eval(double d) const {
    double half = width / 2.0;
    if (d > half) d = width - d;
    if (x.empty()) return 0.0;
    if (d <= x.front()) {
        // within the first half cell: linear continuation with the wall slope
        double slope = x.size() > 1 ? (psi[1] - psi[0]) / (x[1] - x[0]) : 0.0;
        return psi.front() + (d - x.front()) * slope;
    }
    if (d >= x.back()) return psi.back();
    auto it = std::upper_bound(x.begin(), x.end(), d);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double t = (d - x[i]) / (x[i + 1] - x[i]);
    return psi[i] * (1 - t) + psi[i + 1] * t;
}

GouyChapman1D gouy_chapman_oracle(double beta, double n_c, double sigma, double n_sigma,
                                  double width, int resolution, double tol) {
    GouyChapman1D out;
    out.width = width;
    const int m = resolution;
    const double half = width / 2.0;
    const double h = half / m;
    out.x.resize(m);
    out.psi.assign(m, 0.0);
    for (int i = 0; i < m; ++i) out.x[i] = (i + 0.5) * h;

    auto residual = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (int i = 0; i < m; ++i) {
            double fl = i == 0 ? -n_sigma * sigma : -(p[i] - p[i - 1]) / h;
            double fr = i == m - 1 ? 0.0 : -(p[i + 1] - p[i]) / h;
            r[i] = (fr - fl) / h + 2.0 * beta * n_c * std::sinh(p[i]);
        }
    };
    std::vector<double> r(m), a(m), b(m), c(m), d(m), p = out.psi;
    residual(p, r);
    double r0 = 0.0;
    for (double v : r) r0 = std::max(r0, std::abs(v));
    if (r0 == 0.0) return out;
    for (int it = 0; it < 100; ++it) {
        // tridiagonal Newton system: b diag, a sub, c super
        for (int i = 0; i < m; ++i) {
            double diag = 2.0 / (h * h) + 2.0 * beta * n_c * std::cosh(p[i]);
            if (i == 0 || i == m - 1) diag -= 1.0 / (h * h);
            b[i] = diag;
            a[i] = i > 0 ? -1.0 / (h * h) : 0.0;
            c[i] = i < m - 1 ? -1.0 / (h * h) : 0.0;
            d[i] = -r[i];
        }
        // Thomas
        for (int i = 1; i < m; ++i) {
            double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        std::vector<double> delta(m);
        delta[m - 1] = d[m - 1] / b[m - 1];
        for (int i = m - 2; i >= 0; --i) delta[i] = (d[i] - c[i] * delta[i + 1]) / b[i];
        // residual-norm backtracking
        double alpha = 1.0;
        double rn_old = 0.0;
        for (double v : r) rn_old = std::max(rn_old, std::abs(v));
        std::vector<double> trial(m), rt(m);
        bool ok = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < m; ++i) trial[i] = p[i] + alpha * delta[i];
            residual(trial, rt);
            double rn = 0.0;
            for (double v : rt) rn = std::max(rn, std::abs(v));
            if (rn < rn_old) {
                p = trial;
                r = rt;
                ok = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!ok) {
            // quadratic convergence exhausted at the rounding floor of the
            // flux differences; accept if already far below the data scale
            double rn_now = 0.0;
            for (double v : r) rn_now = std::max(rn_now, std::abs(v));
            if (rn_now <= 1e3 * tol * r0) {
                out.psi = p;
                return out;
            }
            throw Error(ErrorCode::NoConvergence, "gouy-chapman newton stalled");
        }
        double rn = 0.0;
        for (double v : r) rn = std::max(rn, std::abs(v));
        if (rn <= tol * r0) {
            out.psi = p;
            return out;
        }
    }
    throw Error(ErrorCode::NoConvergence, "gouy-chapman newton did not converge");
}

} // namespace ekh
