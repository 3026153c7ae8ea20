#pragma once

#include <memory>
#include <vector>

#include "ekh/grid.hpp"

namespace ekh {

// Symmetric 5-point stencil over a logically rectangular site array (cell
// centers or one face family). Couplings are stored per site toward the
// west/east/south/north neighbor; symmetry means ce(i,j) == cw(i+1,j) etc.,
// which every builder guarantees. Inactive sites hold value zero.
struct Stencil5 {
    int nx = 0, ny = 0;
    bool periodic = false;
    std::vector<std::uint8_t> active;
    std::vector<double> diag, cw, ce, cs, cn;
    bool singular = false;   // constants in the kernel (pure Neumann / no walls)

    int size() const { return nx * ny; }
    int idx(int i, int j) const { return j * nx + i; }

    void init(int nx_, int ny_, bool periodic_);
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    // Symmetric Gauss-Seidel preconditioner M = (D+L) D^-1 (D+U): z = M^-1 r.
    void ssor_apply(const std::vector<double>& r, std::vector<double>& z,
                    std::vector<double>& scratch) const;
    int active_count() const;
};

// -div( w grad s ) on fluid cells with per-face coefficients (wx, wy), zero
// flux through wall faces. With dirichlet_boundary, Box boundary faces get the
// half-cell ghost-reflection transmissibility 2 w / h^2 (second order).
Stencil5 make_scalar_diffusion_stencil(const Grid2D& g, const std::vector<double>& wx,
                                       const std::vector<double>& wy,
                                       bool dirichlet_boundary);

// -lap on one velocity component's face grid, no-slip by ghost-zero at wall
// and boundary faces (first-order staircase). comp: 0 = x faces, 1 = y faces.
Stencil5 make_velocity_stencil(const Grid2D& g, int comp, double visc);

// Preconditioned conjugate gradients with compensated inner products.
// mean_free projects rhs and iterates onto zero mean over active sites
// (pure-Neumann kernel); an inconsistent rhs (kernel component above
// 1e-8 relative) raises InconsistentRhs. Initial content of x is the guess.
SolveReport pcg(const Stencil5& A, const std::vector<double>& b, std::vector<double>& x,
                double tol, int max_iter, bool mean_free, bool check_consistency = true);

// Generic SPD solve on fields (the grid-module contract). Throws
// NoConvergence with the report attached to the what() string on failure.
std::pair<ScalarField, SolveReport> solve_spd(const Stencil5& A, const ScalarField& rhs,
                                              double tol, int max_iter, bool mean_free);

// MAC Stokes solver: visc*(-lap v) + grad p = f, div v = 0, v = 0 on no-slip
// faces, p zero-mean. Outer conjugate-gradient (Uzawa) iteration on the
// pressure Schur complement with inner SPD velocity solves. The object keeps
// stencils and the problem scale so repeated solves warm-start from the
// caller's (v, p).
class StokesSolver {
public:
    StokesSolver(const Grid2D& g, double visc);

    SolveReport solve(const MacVectorField& f, double tol, int max_iter, MacVectorField& v,
                      ScalarField& p);

    const Grid2D& grid() const { return *g_; }
    double viscosity() const { return visc_; }
    const Stencil5& ax() const { return ax_; }
    const Stencil5& ay() const { return ay_; }
    // Discrete H1 seminorm squared: v^T A v h^2 / visc (viscosity removed).
    double grad_norm_sq(const MacVectorField& v) const;
    // Residual scale is tied to the forcing of one problem; reset it when the
    // solver is reused for a different right-hand side family.
    void reset_scale() { div_scale_ = -1.0; }

private:
    const Grid2D* g_;
    double visc_;
    Stencil5 ax_, ay_;
    double div_scale_ = -1.0;
};

// One-shot convenience used by tests and the uncharged permeability path.
SolveReport solve_stokes(const Grid2D& g, const MacVectorField& f, double tol, int max_iter,
                         MacVectorField& v, ScalarField& p, double visc = 1.0);

// Direct (sparse LU) Stokes solve; the mandatory oracle path for grids <= 32^2.
void solve_stokes_direct(const Grid2D& g, const MacVectorField& f, MacVectorField& v,
                         ScalarField& p, double visc = 1.0);

} // namespace ekh
