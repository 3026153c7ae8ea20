#pragma once

#include <memory>
#include <vector>

#include "ekh/cell.hpp"
#include "ekh/geometry.hpp"
#include "ekh/macro.hpp"
#include "ekh/model.hpp"
#include "ekh/pb.hpp"

namespace ekh {

// Perforated realization of G = [0,1]^2 at scale eps: the RVE grain pattern
// tiled periodically, scaled by eps, grains dropped inside the clearance
// band dist(x, dG) < eps(1 + r). Concentrations are sampled from the RVE
// equilibrium at the wrapped fast coordinate x/eps (nearest fluid cell where
// the staircase masks disagree).
struct PerforatedDomain {
    std::shared_ptr<Grid2D> grid;   // Box topology
    double eps = 0.0;
    int tiles = 0;
    int kept_copies = 0;
    const FluidGrid* rve = nullptr;
    const EquilibriumState* eq = nullptr;
    const ElectrolyteSpec* spec = nullptr;
    std::vector<ScalarField> n_eps;
    std::vector<int> fxmap, fymap;   // m-face -> rve face (same component)
};

PerforatedDomain build_perforated_domain(const Microstructure& micro, const FluidGrid& rve,
                                         const EquilibriumState& eq,
                                         const ElectrolyteSpec& spec, double eps, int m);

struct EpsilonSolution {
    MacVectorField u;
    ScalarField P;                    // global pressure, zero mean
    std::vector<ScalarField> phi;     // ionic potentials, zero on dG
    SolveReport report;
    // discrete energy equality of the variational form, both sides
    double energy_lhs = 0.0;          // eps^2 |grad u|^2 + sum (z^2/Pe) n |grad phi|^2
    double energy_rhs = 0.0;          // E and f* work terms
    double energy_residual = 0.0;
    double u_l2 = 0.0;
    double grad_u_l2 = 0.0;           // unscaled H1 seminorm
    double poincare_ratio = 0.0;      // |u| / (eps |grad u|)
    double apriori_const = 0.0;       // (|u| + eps|grad u|) / (|E| + |f*|)
};

// eps^2-viscous Stokes coupled to the N convection-diffusion equations,
// block Gauss-Seidel to the combined strong-form residual.
EpsilonSolution solve_linearized(const PerforatedDomain& dom, const Forcing& forcing,
                                 double tol = 1e-10, int max_sweeps = 300);

struct Reconstruction {
    MacVectorField u_rec;
    std::vector<MacVectorField> grad_phi_rec;   // grad Phi_j0 + Theta_j combination
};

// Corrector reconstruction: cell solutions sampled at x/eps combined with
// the macroscopic gradients interpolated from the macro solution.
Reconstruction reconstruct(const PerforatedDomain& dom, const MacroSolution& macro,
                           const Forcing& forcing, const std::vector<CellSolution>& cells);

struct ConvergenceMetrics {
    double eps = 0.0;
    double vel_err_rel = 0.0;
    std::vector<double> species_grad_err_rel;
    double energy_residual = 0.0;
    double eps_dissipation = 0.0;
    double homog_dissipation = 0.0;
    double poincare_ratio = 0.0;
    double apriori_const = 0.0;
};

ConvergenceMetrics convergence_metrics(const PerforatedDomain& dom, const EpsilonSolution& sol,
                                       const Reconstruction& rec);

// The homogenized dissipation of the energy equality, evaluated from the
// cell solutions with the given constant macroscopic gradients:
//   E{|grad v_eta|^2} + sum_j (z_j^2/Pe_j) E{ n_j |grad theta_eta + grad Phi_j0|^2 },
// eta combining families with eta0 = -(grad p0 + f*), eta_i = E + grad Phi_i0.
double homogenized_dissipation(const CellContext& ctx, const std::vector<CellSolution>& cells,
                               const double g0[2], const std::vector<std::array<double, 2>>& gi,
                               const double e_field[2]);

} // namespace ekh
