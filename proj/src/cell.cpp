#include "ekh/cell.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace ekh {

SpeciesWeights harmonic_face_weights(const Grid2D& g, const ScalarField& n) {
    SpeciesWeights w;
    w.wx.assign(g.nfx(), 0.0);
    w.wy.assign(g.nfy(), 0.0);
    const bool torus = g.topo == Topology::Torus;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < (torus ? g.nx : g.nx + 1); ++i) {
            int f = g.fxidx(i, j);
            if (g.fx[f] != FaceKind::Open) continue;
            double nl = n.v[torus ? g.cwrap(i - 1, j) : g.cidx(i - 1, j)];
            double nr = n.v[g.cidx(i % g.nx, j)];
            w.wx[f] = 2.0 * nl * nr / (nl + nr);
        }
    for (int j = 0; j < (torus ? g.ny : g.ny + 1); ++j)
        for (int i = 0; i < g.nx; ++i) {
            int f = g.fyidx(i, j);
            if (g.fy[f] != FaceKind::Open) continue;
            double nb = n.v[torus ? g.cwrap(i, j - 1) : g.cidx(i, j - 1)];
            double nt = n.v[g.cidx(i, j % g.ny)];
            w.wy[f] = 2.0 * nb * nt / (nb + nt);
        }
    return w;
}

ScalarField weighted_div(const Grid2D& g, const SpeciesWeights& w, const MacVectorField& u) {
    ScalarField out(g);
    const double ih = 1.0 / g.h;
    const bool torus = g.topo == Topology::Torus;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int c = g.cidx(i, j);
            if (!g.fluid[c]) continue;
            int fw = g.fxidx(i, j);
            int fe = torus ? g.fxidx((i + 1) % g.nx, j) : g.fxidx(i + 1, j);
            int fs = g.fyidx(i, j);
            int fn = torus ? g.fyidx(i, (j + 1) % g.ny) : g.fyidx(i, j + 1);
            out.v[c] = (w.wx[fe] * u.x[fe] - w.wx[fw] * u.x[fw] + w.wy[fn] * u.y[fn] -
                        w.wy[fs] * u.y[fs]) *
                       ih;
        }
    return out;
}

double face_sum_component(const Grid2D& g, const MacVectorField& u, int l) {
    std::vector<double> terms;
    if (l == 1) {
        terms.reserve(g.nfx());
        for (int f = 0; f < g.nfx(); ++f)
            if (g.fx[f] == FaceKind::Open) terms.push_back(u.x[f]);
    } else {
        terms.reserve(g.nfy());
        for (int f = 0; f < g.nfy(); ++f)
            if (g.fy[f] == FaceKind::Open) terms.push_back(u.y[f]);
    }
    return csum(terms);
}

double weighted_face_sum(const Grid2D& g, const SpeciesWeights& w, const MacVectorField& u,
                         int l) {
    std::vector<double> terms;
    if (l == 1) {
        terms.reserve(g.nfx());
        for (int f = 0; f < g.nfx(); ++f)
            if (g.fx[f] == FaceKind::Open) terms.push_back(w.wx[f] * u.x[f]);
    } else {
        terms.reserve(g.nfy());
        for (int f = 0; f < g.nfy(); ++f)
            if (g.fy[f] == FaceKind::Open) terms.push_back(w.wy[f] * u.y[f]);
    }
    return csum(terms);
}

double weight_sum_component(const Grid2D& g, const SpeciesWeights& w, int l) {
    std::vector<double> terms;
    if (l == 1) {
        for (int f = 0; f < g.nfx(); ++f)
            if (g.fx[f] == FaceKind::Open) terms.push_back(w.wx[f]);
    } else {
        for (int f = 0; f < g.nfy(); ++f)
            if (g.fy[f] == FaceKind::Open) terms.push_back(w.wy[f]);
    }
    return csum(terms);
}

CellContext::CellContext(const FluidGrid& fg_, const EquilibriumState& eq_,
                         const ElectrolyteSpec& spec_)
    : fg(&fg_), eq(&eq_), spec(&spec_), stokes(fg_.grid, 1.0) {
    const Grid2D& g = fg->grid;
    for (int j = 0; j < spec->N; ++j) {
        W.push_back(harmonic_face_weights(g, eq->n0[j]));
        species_op.push_back(make_scalar_diffusion_stencil(g, W[j].wx, W[j].wy, false));
    }
}

double CellResiduals::max_rel() const {
    double m = std::max(momentum, divergence);
    for (double s : species) m = std::max(m, s);
    return m;
}

namespace {

MacVectorField unit_direction_field(const Grid2D& g, int k) {
    MacVectorField e(g);
    if (k == 1) {
        for (int f = 0; f < g.nfx(); ++f)
            if (g.fx[f] == FaceKind::Open) e.x[f] = 1.0;
    } else {
        for (int f = 0; f < g.nfy(); ++f)
            if (g.fy[f] == FaceKind::Open) e.y[f] = 1.0;
    }
    return e;
}

// standard driving terms of family (0 = pressure, i >= 1 = species i)
void standard_drives(const CellContext& ctx, int family, int k, MacVectorField& face_force,
                     std::vector<MacVectorField>& species_drive) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    MacVectorField ek = unit_direction_field(g, k);
    face_force = MacVectorField(g);
    species_drive.assign(spec.N, MacVectorField(g));
    if (family == 0) {
        face_force = ek;
    } else {
        const int j = family - 1;
        for (int f = 0; f < g.nfx(); ++f) face_force.x[f] = spec.z[j] * ctx.W[j].wx[f] * ek.x[f];
        for (int f = 0; f < g.nfy(); ++f) face_force.y[f] = spec.z[j] * ctx.W[j].wy[f] * ek.y[f];
        species_drive[j] = ek;
    }
}

CellResiduals strong_residuals(const CellContext& ctx, const CellSolution& sol,
                               const MacVectorField& face_force,
                               const std::vector<MacVectorField>& species_drive) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    CellResiduals res;
    // momentum: A v + grad pi - (face_force + sum_j z_j W_j grad theta_j)
    MacVectorField force = face_force;
    for (int j = 0; j < spec.N; ++j) {
        MacVectorField gt = grad(sol.theta[j]);
        for (int f = 0; f < g.nfx(); ++f) force.x[f] += spec.z[j] * ctx.W[j].wx[f] * gt.x[f];
        for (int f = 0; f < g.nfy(); ++f) force.y[f] += spec.z[j] * ctx.W[j].wy[f] * gt.y[f];
    }
    // on an all-fluid torus the solver removes the net force per component;
    // the residual refers to that compatible system
    auto project_open_mean = [&](std::vector<double>& vals, const std::vector<FaceKind>& kinds) {
        double s0 = 0.0;
        int nopen = 0;
        for (std::size_t f = 0; f < vals.size(); ++f)
            if (kinds[f] == FaceKind::Open) {
                s0 += vals[f];
                ++nopen;
            }
        if (nopen == 0) return;
        double mean = s0 / nopen;
        for (std::size_t f = 0; f < vals.size(); ++f)
            if (kinds[f] == FaceKind::Open) vals[f] -= mean;
    };
    if (ctx.stokes.ax().singular) project_open_mean(force.x, g.fx);
    if (ctx.stokes.ay().singular) project_open_mean(force.y, g.fy);
    std::vector<double> tx, ty;
    ctx.stokes.ax().apply(sol.v.x, tx);
    ctx.stokes.ay().apply(sol.v.y, ty);
    MacVectorField gp = grad(sol.pi);
    MacVectorField mres(g);
    for (int f = 0; f < g.nfx(); ++f)
        if (g.fx[f] == FaceKind::Open) mres.x[f] = tx[f] + gp.x[f] - force.x[f];
    for (int f = 0; f < g.nfy(); ++f)
        if (g.fy[f] == FaceKind::Open) mres.y[f] = ty[f] + gp.y[f] - force.y[f];
    double denom_m = std::max(norm_faces(face_force), norm_faces(force));
    res.momentum = denom_m > 0 ? norm_faces(mres) / denom_m : norm_faces(mres);

    ScalarField dv = div(sol.v);
    double vn = norm_faces(sol.v);
    res.divergence = vn > 0 ? norm_cells(dv) / (vn / g.h) : norm_cells(dv);

    res.species.resize(spec.N);
    for (int j = 0; j < spec.N; ++j) {
        std::vector<double> at;
        ctx.species_op[j].apply(sol.theta[j].v, at);
        ScalarField conv = weighted_div(g, ctx.W[j], sol.v);
        ScalarField drv = weighted_div(g, ctx.W[j], species_drive[j]);
        const double pz = spec.pe[j] / spec.z[j];
        ScalarField sres(g), rhs_full(g);
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) {
                rhs_full.v[c] = pz * conv.v[c] + drv.v[c];
                sres.v[c] = at[c] - rhs_full.v[c];
            }
        // normalize by the species-flux scale so coupled problems whose
        // right-hand side degenerates to solver noise still count converged
        double wmax = 0.0;
        for (double wv : ctx.W[j].wx) wmax = std::max(wmax, wv);
        for (double wv : ctx.W[j].wy) wmax = std::max(wmax, wv);
        double dn = std::max(norm_cells(rhs_full), wmax * norm_faces(sol.v) / g.h);
        res.species[j] = dn > 0 ? norm_cells(sres) / dn : norm_cells(sres);
    }

    // total species flux through wall faces: the harmonic weights vanish
    // there, so the scheme leaks nothing; reported as computed
    double leak = 0.0;
    for (const BoundaryFace& bf : ctx.fg->boundary)
        for (int j = 0; j < spec.N; ++j) {
            double wf = bf.comp == 0 ? ctx.W[j].wx[bf.fidx] : ctx.W[j].wy[bf.fidx];
            double uf = bf.comp == 0 ? sol.v.x[bf.fidx] : sol.v.y[bf.fidx];
            leak = std::max(leak, std::abs(wf * uf));
        }
    res.boundary_leak = leak;
    return res;
}

} // namespace

CellSolution solve_cell_with_drive(CellContext& ctx, int family, int k,
                                   const MacVectorField& face_force,
                                   const std::vector<MacVectorField>& species_drive,
                                   double tol, int max_picard, const CellSolution* initial) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    CellSolution sol;
    sol.family = family;
    sol.k = k;
    if (initial) {
        sol.v = initial->v;
        sol.pi = initial->pi;
        sol.theta = initial->theta;
    } else {
        sol.v = MacVectorField(g);
        sol.pi = ScalarField(g);
        sol.theta.assign(spec.N, ScalarField(g));
    }
    ctx.stokes.reset_scale();
    const double inner_tol = 0.2 * tol;
    const int stokes_max = 50 * std::max(g.nx, g.ny);
    const int cg_max = 200 * std::max(g.nx, g.ny);
    sol.report.method = "picard";
    for (int sweep = 1; sweep <= max_picard; ++sweep) {
        // Stokes block with frozen theta
        MacVectorField force = face_force;
        for (int j = 0; j < spec.N; ++j) {
            MacVectorField gt = grad(sol.theta[j]);
            for (int f = 0; f < g.nfx(); ++f) force.x[f] += spec.z[j] * ctx.W[j].wx[f] * gt.x[f];
            for (int f = 0; f < g.nfy(); ++f) force.y[f] += spec.z[j] * ctx.W[j].wy[f] * gt.y[f];
        }
        ctx.stokes.solve(force, inner_tol, stokes_max, sol.v, sol.pi);
        // species blocks with frozen velocity
        for (int j = 0; j < spec.N; ++j) {
            ScalarField conv = weighted_div(g, ctx.W[j], sol.v);
            ScalarField drv = weighted_div(g, ctx.W[j], species_drive[j]);
            const double pz = spec.pe[j] / spec.z[j];
            ScalarField rhs(g);
            for (int c = 0; c < g.ncells(); ++c)
                if (g.fluid[c]) rhs.v[c] = pz * conv.v[c] + drv.v[c];
            pcg(ctx.species_op[j], rhs.v, sol.theta[j].v, inner_tol, cg_max, true, false);
        }
        sol.residuals = strong_residuals(ctx, sol, face_force, species_drive);
        sol.report.iterations = sweep;
        sol.report.rel_residual = sol.residuals.max_rel();
        if (sol.report.rel_residual <= tol) {
            sol.report.converged = true;
            break;
        }
    }
    if (!sol.report.converged)
        throw Error(ErrorCode::NoConvergence, "cell picard iteration did not reach tolerance");
    return sol;
}

CellSolution solve_cell(CellContext& ctx, int family, int k, double tol, int max_picard) {
    MacVectorField face_force;
    std::vector<MacVectorField> species_drive;
    standard_drives(ctx, family, k, face_force, species_drive);
    return solve_cell_with_drive(ctx, family, k, face_force, species_drive, tol, max_picard);
}

CellResiduals cell_residuals(const CellContext& ctx, const CellSolution& sol) {
    MacVectorField face_force;
    std::vector<MacVectorField> species_drive;
    standard_drives(ctx, sol.family, sol.k, face_force, species_drive);
    return strong_residuals(ctx, sol, face_force, species_drive);
}

CellSolution solve_cell_direct(const CellContext& ctx, int family, int k) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    const int N = spec.N;
    MacVectorField face_force;
    std::vector<MacVectorField> species_drive;
    standard_drives(ctx, family, k, face_force, species_drive);

    std::vector<int> xid(g.nfx(), -1), yid(g.nfy(), -1), pid(g.ncells(), -1);
    std::vector<std::vector<int>> tid(N, std::vector<int>(g.ncells(), -1));
    int nun = 0;
    for (int f = 0; f < g.nfx(); ++f)
        if (g.fx[f] == FaceKind::Open) xid[f] = nun++;
    for (int f = 0; f < g.nfy(); ++f)
        if (g.fy[f] == FaceKind::Open) yid[f] = nun++;
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) pid[c] = nun++;
    for (int j = 0; j < N; ++j)
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) tid[j][c] = nun++;
    const Stencil5& ax = ctx.stokes.ax();
    const Stencil5& ay = ctx.stokes.ay();
    int nmul = 1 + N + (ax.singular ? 1 : 0) + (ay.singular ? 1 : 0);
    const int ntot = nun + nmul;

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ntot);
    const double ih = 1.0 / g.h;
    const bool torus = g.topo == Topology::Torus;

    auto add_stencil = [&](const Stencil5& A, const std::vector<int>& id) {
        for (int j = 0; j < A.ny; ++j)
            for (int i = 0; i < A.nx; ++i) {
                int c = A.idx(i, j);
                if (!A.active[c]) continue;
                int row = id[c];
                trip.emplace_back(row, id[c], A.diag[c]);
                const int im = A.periodic ? (i + A.nx - 1) % A.nx : i - 1;
                const int ip = A.periodic ? (i + 1) % A.nx : i + 1;
                const int jm = A.periodic ? (j + A.ny - 1) % A.ny : j - 1;
                const int jp = A.periodic ? (j + 1) % A.ny : j + 1;
                if (im >= 0 && A.cw[c] != 0.0) trip.emplace_back(row, id[A.idx(im, j)], A.cw[c]);
                if (ip < A.nx && A.ce[c] != 0.0) trip.emplace_back(row, id[A.idx(ip, j)], A.ce[c]);
                if (jm >= 0 && A.cs[c] != 0.0) trip.emplace_back(row, id[A.idx(i, jm)], A.cs[c]);
                if (jp < A.ny && A.cn[c] != 0.0) trip.emplace_back(row, id[A.idx(i, jp)], A.cn[c]);
            }
    };
    add_stencil(ax, xid);
    add_stencil(ay, yid);
    for (int f = 0; f < g.nfx(); ++f)
        if (xid[f] >= 0) b[xid[f]] = face_force.x[f];
    for (int f = 0; f < g.nfy(); ++f)
        if (yid[f] >= 0) b[yid[f]] = face_force.y[f];
    for (int j = 0; j < N; ++j) add_stencil(ctx.species_op[j], tid[j]);

    std::vector<ScalarField> drv(N, ScalarField(g));
    for (int j = 0; j < N; ++j) drv[j] = weighted_div(g, ctx.W[j], species_drive[j]);

    for (int jj = 0; jj < g.ny; ++jj)
        for (int ii = 0; ii < g.nx; ++ii) {
            int c = g.cidx(ii, jj);
            if (!g.fluid[c]) continue;
            int fw = g.fxidx(ii, jj);
            int fe = torus ? g.fxidx((ii + 1) % g.nx, jj) : g.fxidx(ii + 1, jj);
            int fs = g.fyidx(ii, jj);
            int fn = torus ? g.fyidx(ii, (jj + 1) % g.ny) : g.fyidx(ii, jj + 1);
            struct {
                int fidx, vid, comp;
                double sgn;
            } faces[4] = {{fw, xid[fw], 0, -1.0},
                          {fe, xid[fe], 0, 1.0},
                          {fs, yid[fs], 1, -1.0},
                          {fn, yid[fn], 1, 1.0}};
            for (auto& fc : faces) {
                if (fc.vid < 0) continue;
                // continuity row and grad p column
                trip.emplace_back(pid[c], fc.vid, fc.sgn * ih);
                trip.emplace_back(fc.vid, pid[c], -fc.sgn * ih);
                for (int j = 0; j < N; ++j) {
                    double wf = fc.comp == 0 ? ctx.W[j].wx[fc.fidx] : ctx.W[j].wy[fc.fidx];
                    if (wf == 0.0) continue;
                    // momentum force -z_j W_j grad theta_j
                    trip.emplace_back(fc.vid, tid[j][c], fc.sgn * spec.z[j] * wf * ih);
                    // species convection -(Pe_j/z_j) div(W_j v)
                    trip.emplace_back(tid[j][c], fc.vid,
                                      -(spec.pe[j] / spec.z[j]) * fc.sgn * wf * ih);
                }
            }
            for (int j = 0; j < N; ++j) b[tid[j][c]] = drv[j].v[c];
        }

    int mul = nun;
    for (int c = 0; c < g.ncells(); ++c)
        if (pid[c] >= 0) {
            trip.emplace_back(mul, pid[c], 1.0);
            trip.emplace_back(pid[c], mul, 1.0);
        }
    ++mul;
    for (int j = 0; j < N; ++j) {
        for (int c = 0; c < g.ncells(); ++c)
            if (tid[j][c] >= 0) {
                trip.emplace_back(mul, tid[j][c], 1.0);
                trip.emplace_back(tid[j][c], mul, 1.0);
            }
        ++mul;
    }
    if (ax.singular) {
        for (int f = 0; f < g.nfx(); ++f)
            if (xid[f] >= 0) {
                trip.emplace_back(mul, xid[f], 1.0);
                trip.emplace_back(xid[f], mul, 1.0);
            }
        ++mul;
    }
    if (ay.singular) {
        for (int f = 0; f < g.nfy(); ++f)
            if (yid[f] >= 0) {
                trip.emplace_back(mul, yid[f], 1.0);
                trip.emplace_back(yid[f], mul, 1.0);
            }
        ++mul;
    }

    Eigen::SparseMatrix<double> A(ntot, ntot);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorCode::NoConvergence, "cell direct factorization failed");
    Eigen::VectorXd sol_vec = lu.solve(b);

    CellSolution sol;
    sol.family = family;
    sol.k = k;
    sol.v = MacVectorField(g);
    sol.pi = ScalarField(g);
    sol.theta.assign(N, ScalarField(g));
    for (int f = 0; f < g.nfx(); ++f)
        if (xid[f] >= 0) sol.v.x[f] = sol_vec[xid[f]];
    for (int f = 0; f < g.nfy(); ++f)
        if (yid[f] >= 0) sol.v.y[f] = sol_vec[yid[f]];
    for (int c = 0; c < g.ncells(); ++c)
        if (pid[c] >= 0) sol.pi.v[c] = sol_vec[pid[c]];
    for (int j = 0; j < N; ++j)
        for (int c = 0; c < g.ncells(); ++c)
            if (tid[j][c] >= 0) sol.theta[j].v[c] = sol_vec[tid[j][c]];
    sol.residuals = strong_residuals(ctx, sol, face_force, species_drive);
    sol.report.method = "sparse-lu";
    sol.report.converged = true;
    sol.report.rel_residual = sol.residuals.max_rel();
    return sol;
}

double family_pairing(const CellContext& ctx, const CellSolution& a, const CellSolution& b) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    double first;
    if (a.family == 0) {
        first = face_sum_component(g, b.v, a.k);
    } else {
        const int ja = a.family - 1;
        first = spec.z[ja] * weighted_face_sum(g, ctx.W[ja], b.v, a.k);
    }
    double second = 0.0;
    if (b.family >= 1) {
        const int jb = b.family - 1;
        MacVectorField gt = grad(a.theta[jb]);
        second = (static_cast<double>(spec.z[jb]) * spec.z[jb] / spec.pe[jb]) *
                 weighted_face_sum(g, ctx.W[jb], gt, b.k);
    }
    return first - second;
}

double combination_dissipation(const CellContext& ctx, const std::vector<CellSolution>& cells,
                               const std::vector<double>& coef) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    const int N = spec.N;
    MacVectorField v(g);
    std::vector<ScalarField> theta(N, ScalarField(g));
    for (std::size_t a = 0; a < cells.size(); ++a) {
        const double c = coef[a];
        if (c == 0.0) continue;
        for (int f = 0; f < g.nfx(); ++f) v.x[f] += c * cells[a].v.x[f];
        for (int f = 0; f < g.nfy(); ++f) v.y[f] += c * cells[a].v.y[f];
        for (int j = 0; j < N; ++j)
            for (int cc = 0; cc < g.ncells(); ++cc)
                theta[j].v[cc] += c * cells[a].theta[j].v[cc];
    }
    const double vol = g.Lx * g.Ly;
    double diss = ctx.stokes.grad_norm_sq(v) / vol;
    for (int j = 0; j < N; ++j) {
        // affine offset from the delta_ij e^k drives of the combination
        double ox = 0.0, oy = 0.0;
        for (std::size_t a = 0; a < cells.size(); ++a)
            if (cells[a].family == j + 1) {
                if (cells[a].k == 1)
                    ox += coef[a];
                else
                    oy += coef[a];
            }
        MacVectorField gt = grad(theta[j]);
        std::vector<double> terms;
        terms.reserve(g.nfx() + g.nfy());
        for (int f = 0; f < g.nfx(); ++f)
            if (g.fx[f] == FaceKind::Open) {
                double val = gt.x[f] + ox;
                terms.push_back(ctx.W[j].wx[f] * val * val);
            }
        for (int f = 0; f < g.nfy(); ++f)
            if (g.fy[f] == FaceKind::Open) {
                double val = gt.y[f] + oy;
                terms.push_back(ctx.W[j].wy[f] * val * val);
            }
        diss += (static_cast<double>(spec.z[j]) * spec.z[j] / spec.pe[j]) * csum(terms) * g.h *
                g.h / vol;
    }
    return diss;
}

} // namespace ekh
