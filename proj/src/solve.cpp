#include "ekh/solve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace ekh {

void Stencil5::init(int nx_, int ny_, bool periodic_) {
    nx = nx_;
    ny = ny_;
    periodic = periodic_;
    active.assign(size(), 0);
    diag.assign(size(), 0.0);
    cw.assign(size(), 0.0);
    ce.assign(size(), 0.0);
    cs.assign(size(), 0.0);
    cn.assign(size(), 0.0);
    singular = false;
}

void Stencil5::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(size(), 0.0);
    for (int j = 0; j < ny; ++j) {
        const int jm = periodic ? (j + ny - 1) % ny : j - 1;
        const int jp = periodic ? (j + 1) % ny : j + 1;
        for (int i = 0; i < nx; ++i) {
            const int c = idx(i, j);
            if (!active[c]) continue;
            double acc = diag[c] * x[c];
            const int im = periodic ? (i + nx - 1) % nx : i - 1;
            const int ip = periodic ? (i + 1) % nx : i + 1;
            if (im >= 0 && cw[c] != 0.0) acc += cw[c] * x[idx(im, j)];
            if (ip < nx && ce[c] != 0.0) acc += ce[c] * x[idx(ip, j)];
            if (jm >= 0 && cs[c] != 0.0) acc += cs[c] * x[idx(i, jm)];
            if (jp < ny && cn[c] != 0.0) acc += cn[c] * x[idx(i, jp)];
            y[c] = acc;
        }
    }
}

void Stencil5::ssor_apply(const std::vector<double>& r, std::vector<double>& z,
                          std::vector<double>& u) const {
    u.assign(size(), 0.0);
    // forward: (D+L) u = r, lower neighbors are W and S in lexicographic order
    for (int j = 0; j < ny; ++j) {
        const int jm = periodic ? (j + ny - 1) % ny : j - 1;
        for (int i = 0; i < nx; ++i) {
            const int c = idx(i, j);
            if (!active[c]) continue;
            const int im = periodic ? (i + nx - 1) % nx : i - 1;
            double acc = r[c];
            if (im >= 0 && im < i && cw[c] != 0.0) acc -= cw[c] * u[idx(im, j)];
            if (jm >= 0 && jm < j && cs[c] != 0.0) acc -= cs[c] * u[idx(i, jm)];
            u[c] = acc / diag[c];
        }
    }
    z.assign(size(), 0.0);
    // backward: (D+U) z = D u
    for (int j = ny - 1; j >= 0; --j) {
        const int jp = periodic ? (j + 1) % ny : j + 1;
        for (int i = nx - 1; i >= 0; --i) {
            const int c = idx(i, j);
            if (!active[c]) continue;
            const int ip = periodic ? (i + 1) % nx : i + 1;
            double acc = diag[c] * u[c];
            if (ip < nx && ip > i && ce[c] != 0.0) acc -= ce[c] * z[idx(ip, j)];
            if (jp < ny && jp > j && cn[c] != 0.0) acc -= cn[c] * z[idx(i, jp)];
            z[c] = acc / diag[c];
        }
    }
    // periodic wrap couplings land in the "wrong" triangle; SSOR stays a
    // valid SPD preconditioner because those terms are simply skipped above.
}

int Stencil5::active_count() const {
    int n = 0;
    for (auto a : active) n += a;
    return n;
}

Stencil5 make_scalar_diffusion_stencil(const Grid2D& g, const std::vector<double>& wx,
                                       const std::vector<double>& wy,
                                       bool dirichlet_boundary) {
    Stencil5 A;
    A.init(g.nx, g.ny, g.topo == Topology::Torus);
    const double ih2 = 1.0 / (g.h * g.h);
    bool any_dirichlet = false;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.cidx(i, j);
            if (!g.fluid[c]) continue;
            A.active[c] = 1;
            double d = 0.0;
            // west face
            {
                const int f = g.fxidx(i, j);
                if (g.fx[f] == FaceKind::Open) {
                    A.cw[c] = -wx[f] * ih2;
                    d += wx[f] * ih2;
                } else if (g.fx[f] == FaceKind::Boundary && dirichlet_boundary) {
                    d += 2.0 * wx[f] * ih2;
                    any_dirichlet = true;
                }
            }
            // east face
            {
                const int f = g.topo == Topology::Torus ? g.fxidx((i + 1) % g.nx, j)
                                                        : g.fxidx(i + 1, j);
                if (g.fx[f] == FaceKind::Open) {
                    A.ce[c] = -wx[f] * ih2;
                    d += wx[f] * ih2;
                } else if (g.fx[f] == FaceKind::Boundary && dirichlet_boundary) {
                    d += 2.0 * wx[f] * ih2;
                    any_dirichlet = true;
                }
            }
            // south face
            {
                const int f = g.fyidx(i, j);
                if (g.fy[f] == FaceKind::Open) {
                    A.cs[c] = -wy[f] * ih2;
                    d += wy[f] * ih2;
                } else if (g.fy[f] == FaceKind::Boundary && dirichlet_boundary) {
                    d += 2.0 * wy[f] * ih2;
                    any_dirichlet = true;
                }
            }
            // north face
            {
                const int f = g.topo == Topology::Torus ? g.fyidx(i, (j + 1) % g.ny)
                                                        : g.fyidx(i, j + 1);
                if (g.fy[f] == FaceKind::Open) {
                    A.cn[c] = -wy[f] * ih2;
                    d += wy[f] * ih2;
                } else if (g.fy[f] == FaceKind::Boundary && dirichlet_boundary) {
                    d += 2.0 * wy[f] * ih2;
                    any_dirichlet = true;
                }
            }
            A.diag[c] = d;
        }
    A.singular = !any_dirichlet;
    return A;
}

Stencil5 make_velocity_stencil(const Grid2D& g, int comp, double visc) {
    Stencil5 A;
    const bool torus = g.topo == Topology::Torus;
    const int fnx = comp == 0 ? (torus ? g.nx : g.nx + 1) : g.nx;
    const int fny = comp == 0 ? g.ny : (torus ? g.ny : g.ny + 1);
    A.init(fnx, fny, torus);
    const auto& kinds = comp == 0 ? g.fx : g.fy;
    const double ih2 = visc / (g.h * g.h);
    bool all_interior = true;
    for (int j = 0; j < fny; ++j)
        for (int i = 0; i < fnx; ++i) {
            const int c = A.idx(i, j);
            if (kinds[c] != FaceKind::Open) continue;
            A.active[c] = 1;
            A.diag[c] = 4.0 * ih2;
            const int im = torus ? (i + fnx - 1) % fnx : i - 1;
            const int ip = torus ? (i + 1) % fnx : i + 1;
            const int jm = torus ? (j + fny - 1) % fny : j - 1;
            const int jp = torus ? (j + 1) % fny : j + 1;
            int open_nb = 0;
            if (im >= 0 && kinds[A.idx(im, j)] == FaceKind::Open) {
                A.cw[c] = -ih2;
                ++open_nb;
            }
            if (ip < fnx && kinds[A.idx(ip, j)] == FaceKind::Open) {
                A.ce[c] = -ih2;
                ++open_nb;
            }
            if (jm >= 0 && kinds[A.idx(i, jm)] == FaceKind::Open) {
                A.cs[c] = -ih2;
                ++open_nb;
            }
            if (jp < fny && kinds[A.idx(i, jp)] == FaceKind::Open) {
                A.cn[c] = -ih2;
                ++open_nb;
            }
            if (open_nb < 4) all_interior = false;
        }
    A.singular = torus && all_interior && A.active_count() > 0;
    return A;
}

namespace {

double project_mean(const Stencil5& A, std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    int n = 0;
    for (int i = 0; i < A.size(); ++i)
        if (A.active[i]) {
            double x = v[i];
            double t = s + x;
            if (std::abs(s) >= std::abs(x))
                c += (s - t) + x;
            else
                c += (x - t) + s;
            s = t;
            ++n;
        }
    if (n == 0) return 0.0;
    double mean = (s + c) / n;
    for (int i = 0; i < A.size(); ++i)
        if (A.active[i]) v[i] -= mean;
    return mean;
}

double masked_dot(const Stencil5& A, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0, c = 0.0;
    for (int i = 0; i < A.size(); ++i) {
        if (!A.active[i]) continue;
        double x = a[i] * b[i];
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

} // namespace

SolveReport pcg(const Stencil5& A, const std::vector<double>& b_in, std::vector<double>& x,
                double tol, int max_iter, bool mean_free, bool check_consistency) {
    SolveReport rep;
    rep.method = "pcg-ssor";
    std::vector<double> b = b_in;
    if (mean_free) {
        double nb = std::sqrt(masked_dot(A, b, b));
        std::vector<double> tmp = b;
        double mean = project_mean(A, tmp);
        if (check_consistency && nb > 0.0 &&
            std::abs(mean) * std::sqrt(double(A.active_count())) > 1e-8 * nb)
            throw Error(ErrorCode::InconsistentRhs, "rhs has a kernel component");
        b = tmp;
        project_mean(A, x);
    }
    const double bnorm = std::sqrt(masked_dot(A, b, b));
    if (bnorm == 0.0) {
        x.assign(A.size(), 0.0);
        rep.converged = true;
        return rep;
    }
    std::vector<double> r(A.size()), z(A.size()), p(A.size()), q(A.size()), scratch;
    A.apply(x, q);
    for (int i = 0; i < A.size(); ++i) r[i] = A.active[i] ? b[i] - q[i] : 0.0;
    if (mean_free) project_mean(A, r);
    A.ssor_apply(r, z, scratch);
    double rz = masked_dot(A, r, z);
    p = z;
    double rnorm = std::sqrt(masked_dot(A, r, r));
    rep.rel_residual = rnorm / bnorm;
    if (rep.rel_residual <= tol) {
        rep.converged = true;
        return rep;
    }
    for (int it = 1; it <= max_iter; ++it) {
        A.apply(p, q);
        double pq = masked_dot(A, p, q);
        if (pq <= 0.0) break;
        double alpha = rz / pq;
        for (int i = 0; i < A.size(); ++i)
            if (A.active[i]) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
        if (mean_free && (it % 16) == 0) {
            project_mean(A, x);
            project_mean(A, r);
        }
        rnorm = std::sqrt(masked_dot(A, r, r));
        rep.iterations = it;
        rep.rel_residual = rnorm / bnorm;
        if (rep.rel_residual <= tol) {
            rep.converged = true;
            break;
        }
        A.ssor_apply(r, z, scratch);
        double rz_new = masked_dot(A, r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < A.size(); ++i)
            if (A.active[i]) p[i] = z[i] + beta * p[i];
    }
    if (mean_free) project_mean(A, x);
    return rep;
}

std::pair<ScalarField, SolveReport> solve_spd(const Stencil5& A, const ScalarField& rhs,
                                              double tol, int max_iter, bool mean_free) {
    ScalarField x(*rhs.g);
    SolveReport rep = pcg(A, rhs.v, x.v, tol, max_iter, mean_free);
    if (!rep.converged)
        throw Error(ErrorCode::NoConvergence,
                    "pcg stalled at rel_residual=" + std::to_string(rep.rel_residual) + " after " +
                        std::to_string(rep.iterations) + " iterations");
    return {std::move(x), rep};
}

StokesSolver::StokesSolver(const Grid2D& g, double visc)
    : g_(&g), visc_(visc),
      ax_(make_velocity_stencil(g, 0, visc)),
      ay_(make_velocity_stencil(g, 1, visc)) {}

double StokesSolver::grad_norm_sq(const MacVectorField& v) const {
    std::vector<double> t;
    ax_.apply(v.x, t);
    double s = cdot(v.x, t);
    ay_.apply(v.y, t);
    s += cdot(v.y, t);
    return s * g_->h * g_->h / visc_;
}

SolveReport StokesSolver::solve(const MacVectorField& f_in, double tol, int max_iter,
                                MacVectorField& v, ScalarField& p) {
    const Grid2D& g = *g_;
    SolveReport rep;
    rep.method = "uzawa-schur-cg";
    MacVectorField f = f_in;
    // On an all-fluid torus a net force has no periodic steady response;
    // the compatible problem removes the mean per component.
    if (ax_.singular) {
        std::vector<double> t = f.x;
        project_mean(ax_, t);
        f.x = t;
    }
    if (ay_.singular) {
        std::vector<double> t = f.y;
        project_mean(ay_, t);
        f.y = t;
    }
    const double fnorm = std::sqrt(cdot(f.x, f.x) + cdot(f.y, f.y));
    if (fnorm == 0.0) {
        v = MacVectorField(g);
        p = ScalarField(g);
        rep.converged = true;
        return rep;
    }
    const double inner_tol = std::max(1e-13, 0.01 * tol);
    const int inner_max = std::max(200, 60 * std::max(g.nx, g.ny));
    auto inner_solve = [&](const MacVectorField& rhs, MacVectorField& out) {
        SolveReport r1 = pcg(ax_, rhs.x, out.x, inner_tol, inner_max, ax_.singular);
        SolveReport r2 = pcg(ay_, rhs.y, out.y, inner_tol, inner_max, ay_.singular);
        if (!r1.converged || !r2.converged)
            throw Error(ErrorCode::NoConvergence, "stokes inner velocity solve stalled");
        rep.iterations += r1.iterations + r2.iterations;
    };

    if (p.g != &g) p = ScalarField(g);
    if (v.g != &g) v = MacVectorField(g);
    // v = A^-1 (f - G p) with the caller's p as warm start
    MacVectorField rhs(g);
    MacVectorField gp = grad(p);
    for (int i = 0; i < g.nfx(); ++i) rhs.x[i] = f.x[i] - gp.x[i];
    for (int i = 0; i < g.nfy(); ++i) rhs.y[i] = f.y[i] - gp.y[i];
    inner_solve(rhs, v);

    // Schur system S p = -div(A^-1 f) with S = G^T A^-1 G; its residual at
    // the current p is -div(v(p)).
    ScalarField r = div(v);
    for (int c = 0; c < g.ncells(); ++c) r.v[c] = -r.v[c];
    // project constants (the pressure kernel) out of the Schur residual
    auto project_cells = [&](std::vector<double>& a) {
        double s = 0.0;
        int n = 0;
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) {
                s += a[c];
                ++n;
            }
        if (n == 0) return;
        double mean = s / n;
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) a[c] -= mean;
            else a[c] = 0.0;
    };
    project_cells(r.v);
    double r0 = std::sqrt(cdot(r.v, r.v));
    if (div_scale_ <= 0.0 && r0 > 0.0) div_scale_ = r0;
    if (div_scale_ <= 0.0) {
        project_cells(p.v);
        rep.converged = true;
        return rep;
    }
    const double target = tol * div_scale_;
    if (r0 <= target) {
        project_cells(p.v);
        rep.converged = true;
        rep.rel_residual = r0 / div_scale_;
        return rep;
    }

    ScalarField d = r;   // unpreconditioned CG on the Schur complement
    double rho = cdot(r.v, r.v);
    MacVectorField w(g), gd(g);
    double best = r0;
    int since_best = 0;
    for (int outer = 1; outer <= max_iter; ++outer) {
        gd = grad(d);
        w = MacVectorField(g);
        inner_solve(gd, w);
        ScalarField sd = div(w);
        project_cells(sd.v);
        // S d = -div(A^-1 G d); CG works with q = S d
        double dq = -cdot(d.v, sd.v);
        if (dq <= 0.0) break;
        double alpha = rho / dq;
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) p.v[c] += alpha * d.v[c];
        for (int i = 0; i < g.nfx(); ++i) v.x[i] -= alpha * w.x[i];
        for (int i = 0; i < g.nfy(); ++i) v.y[i] -= alpha * w.y[i];
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) r.v[c] += alpha * sd.v[c];
        project_cells(r.v);
        double rn = std::sqrt(cdot(r.v, r.v));
        rep.rel_residual = rn / div_scale_;
        if (rn <= target) {
            rep.converged = true;
            break;
        }
        // inexact inner solves put a floor under the reachable residual;
        // stop when no progress has been made for a while
        if (rn < 0.9 * best) {
            best = rn;
            since_best = 0;
        } else if (++since_best >= 40)
            break;
        double rho_new = cdot(r.v, r.v);
        double beta = rho_new / rho;
        rho = rho_new;
        for (int c = 0; c < g.ncells(); ++c)
            if (g.fluid[c]) d.v[c] = r.v[c] + beta * d.v[c];
    }
    project_cells(p.v);
    return rep;
}

SolveReport solve_stokes(const Grid2D& g, const MacVectorField& f, double tol, int max_iter,
                         MacVectorField& v, ScalarField& p, double visc) {
    StokesSolver s(g, visc);
    v = MacVectorField(g);
    p = ScalarField(g);
    SolveReport rep = s.solve(f, tol, max_iter, v, p);
    if (!rep.converged)
        throw Error(ErrorCode::NoConvergence, "stokes schur iteration stalled");
    return rep;
}

void solve_stokes_direct(const Grid2D& g, const MacVectorField& f, MacVectorField& v,
                         ScalarField& p, double visc) {
    // Unknown order: open x-faces, open y-faces, fluid cells (pressure),
    // then one multiplier per singular block (pressure mean, velocity means).
    std::vector<int> xid(g.nfx(), -1), yid(g.nfy(), -1), cid(g.ncells(), -1);
    int nun = 0;
    for (int i = 0; i < g.nfx(); ++i)
        if (g.fx[i] == FaceKind::Open) xid[i] = nun++;
    for (int i = 0; i < g.nfy(); ++i)
        if (g.fy[i] == FaceKind::Open) yid[i] = nun++;
    for (int c = 0; c < g.ncells(); ++c)
        if (g.fluid[c]) cid[c] = nun++;
    Stencil5 ax = make_velocity_stencil(g, 0, visc);
    Stencil5 ay = make_velocity_stencil(g, 1, visc);
    int nmul = 1 + (ax.singular ? 1 : 0) + (ay.singular ? 1 : 0);
    const int ntot = nun + nmul;

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ntot);
    const double ih = 1.0 / g.h;
    const bool torus = g.topo == Topology::Torus;

    auto add_velocity_block = [&](const Stencil5& A, const std::vector<int>& id, int comp) {
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
                b[row] = comp == 0 ? f.x[c] : f.y[c];
            }
    };
    add_velocity_block(ax, xid, 0);
    add_velocity_block(ay, yid, 1);

    // grad p in momentum rows and div v in continuity rows
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int c = g.cidx(i, j);
            if (!g.fluid[c]) continue;
            int prow = cid[c];
            int fw = g.fxidx(i, j);
            int fe = torus ? g.fxidx((i + 1) % g.nx, j) : g.fxidx(i + 1, j);
            int fs = g.fyidx(i, j);
            int fn = torus ? g.fyidx(i, (j + 1) % g.ny) : g.fyidx(i, j + 1);
            struct {
                int fid, vid;
                double sgn;
                bool isx;
            } faces[4] = {{fw, xid[fw], -1.0, true},
                          {fe, xid[fe], 1.0, true},
                          {fs, yid[fs], -1.0, false},
                          {fn, yid[fn], 1.0, false}};
            for (auto& fc : faces) {
                if (fc.vid < 0) continue;
                trip.emplace_back(prow, fc.vid, fc.sgn * ih);   // div v row
                // grad p on the momentum row: face between L and R gets
                // (p_R - p_L)/h; cell c is R of its west face, L of its east.
                trip.emplace_back(fc.vid, prow, -fc.sgn * ih);
            }
        }

    int mul = nun;
    for (int c = 0; c < g.ncells(); ++c)
        if (cid[c] >= 0) {
            trip.emplace_back(mul, cid[c], 1.0);
            trip.emplace_back(cid[c], mul, 1.0);
        }
    ++mul;
    if (ax.singular) {
        for (int i = 0; i < g.nfx(); ++i)
            if (xid[i] >= 0) {
                trip.emplace_back(mul, xid[i], 1.0);
                trip.emplace_back(xid[i], mul, 1.0);
            }
        ++mul;
    }
    if (ay.singular) {
        for (int i = 0; i < g.nfy(); ++i)
            if (yid[i] >= 0) {
                trip.emplace_back(mul, yid[i], 1.0);
                trip.emplace_back(yid[i], mul, 1.0);
            }
        ++mul;
    }

    Eigen::SparseMatrix<double> A(ntot, ntot);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorCode::NoConvergence, "sparse LU factorization failed");
    Eigen::VectorXd sol = lu.solve(b);

    v = MacVectorField(g);
    p = ScalarField(g);
    for (int i = 0; i < g.nfx(); ++i)
        if (xid[i] >= 0) v.x[i] = sol[xid[i]];
    for (int i = 0; i < g.nfy(); ++i)
        if (yid[i] >= 0) v.y[i] = sol[yid[i]];
    double pm = 0.0;
    int pn = 0;
    for (int c = 0; c < g.ncells(); ++c)
        if (cid[c] >= 0) {
            p.v[c] = sol[cid[c]];
            pm += p.v[c];
            ++pn;
        }
    if (pn > 0) {
        pm /= pn;
        for (int c = 0; c < g.ncells(); ++c)
            if (cid[c] >= 0) p.v[c] -= pm;
    }
}

} // namespace ekh
