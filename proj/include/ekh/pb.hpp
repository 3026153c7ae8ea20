#pragma once

#include <vector>

#include "ekh/geometry.hpp"
#include "ekh/grid.hpp"
#include "ekh/model.hpp"
#include "ekh/solve.hpp"

namespace ekh {

// Per-cell source realizing the Neumann datum grad(psi).nu = -N_sigma sigma
// (nu the outward normal of the fluid): src(c) = N_sigma sum_f sigma_f w_f / h^2
// over the grain-boundary faces of cell c. The lift equation reads
// (L + I) v = -src and the equilibrium residual L psi + beta n_HN(psi) + src.
ScalarField boundary_charge_source(const FluidGrid& fg, const SurfaceCharge& sc,
                                   double n_sigma);

struct ScreenedLift {
    ScalarField v;
    double V_m = 0.0, V_M = 0.0;
    SolveReport report;
};

// -lap v + v = 0 with the surface-charge Neumann datum, periodic RVE.
ScreenedLift solve_screened_lift(const FluidGrid& fg, const SurfaceCharge& sc, double n_sigma,
                                 double tol = 1e-10);

struct EquilibriumState {
    ScalarField psi;
    std::vector<ScalarField> n0;
    BoundConstants bounds;
    double n_cut = 0.0;       // cut-off level, 2 (|psi_min| + |psi_max| + 1)
    double energy = 0.0;      // discrete functional at the solution
    std::vector<double> energy_trace;   // J after each accepted Newton step
    SolveReport report;
};

// Damped Newton with Armijo backtracking on the discrete cut-off functional
//   J(psi) = 1/2 <L psi, psi> + beta sum Gamma_N(psi) h^2 + sum src psi h^2.
// The cut-off level is chosen from the a-priori bounds so it is never active
// at the solution (checked; CutoffActive otherwise).
EquilibriumState solve_equilibrium(const FluidGrid& fg, const ElectrolyteSpec& spec,
                                   const SurfaceCharge& sc, double tol = 1e-10,
                                   int max_newton = 80);

// n_j = n_j^c exp(-z_j psi) on fluid cells, zero on solid.
std::vector<ScalarField> equilibrium_concentrations(const ScalarField& psi,
                                                    const ElectrolyteSpec& spec);

// Discrete energy and its gradient-scaled residual, exposed for tests.
double pb_energy(const FluidGrid& fg, const ElectrolyteSpec& spec, const ScalarField& src,
                 const ScalarField& psi, double ncut);
ScalarField pb_residual(const FluidGrid& fg, const ElectrolyteSpec& spec,
                        const ScalarField& src, const ScalarField& psi, double ncut);

// beta sum_c sum_j z_j n_j0 h^2  -  N_sigma sum_f sigma w  over the RVE,
// relative to the surface-charge magnitude. Vanishes at the discrete
// solution (compatibility of the pure-Neumann problem).
double charge_balance_residual(const FluidGrid& fg, const ElectrolyteSpec& spec,
                               const SurfaceCharge& sc, const EquilibriumState& eq);

// Dense 1D Gouy-Chapman oracle for the symmetric binary electrolyte in a
// plane channel of the given width: psi'' = 2 beta n_c sinh(psi) on
// [0, width/2] with psi'(0) = n_sigma * sigma and symmetry at the midplane.
// Newton on a fine mesh with tridiagonal solves, independent of the 2D path.
struct GouyChapman1D {
    double width = 0.0;         // full channel width
    std::vector<double> x;      // cell centers on [0, width/2]
    std::vector<double> psi;
    // value at distance d from the wall, folding the symmetric half
    double eval(double d) const;
};

GouyChapman1D gouy_chapman_oracle(double beta, double n_c, double sigma, double n_sigma,
                                  double width, int resolution, double tol = 1e-11);

} // namespace ekh
