#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ekh/grid.hpp"
#include "ekh/model.hpp"
#include "ekh/onsager.hpp"

namespace ekh {

// Macroscopic homogenized problem on G = [0,1]^2, solved monolithically in
// the Onsager variables W = (p0, mu_1..mu_N), mu_j = -z_j (Phi_j0 + Psi_ext):
//   div( -B (grad W + a) ) + S = 0,  a = (f*, 0, ..., 0),
// with no-flux for the row-0 flux (E{u}.nu = 0) and Dirichlet data for the
// mu rows on the boundary. Symmetry of B makes the system SPD; the pressure
// is fixed by the zero-mean gauge.
struct MacroProblem {
    int m = 64;
    OnsagerTensor tensor;
    std::vector<int> z;
    Forcing forcing;
    // test hooks: per-row cell sources (N+1 rows of m*m values) and a
    // Dirichlet override mu_j(x, y); by default mu_j = -z_j Psi_ext.
    std::vector<std::vector<double>> source;
    std::function<double(int j, double x, double y)> dirichlet;
};

struct MacroSolution {
    std::shared_ptr<Grid2D> grid;
    ScalarField p0;                     // zero mean
    std::vector<ScalarField> mu;        // Onsager potentials
    std::vector<ScalarField> phi0;      // Phi_j0 = -mu_j/z_j - Psi_ext
    MacVectorField u;                   // row-0 face fluxes, zero on the boundary
    std::vector<MacVectorField> jj;     // ionic face fluxes
    SolveReport report;
    double dissipation = 0.0;           // sum_f vol (s+a)^T B (s+a)
    double energy_residual = 0.0;       // summation-by-parts identity defect
};

// 5-point finite-volume solve; cross-direction tensor entries are handled by
// defect correction around the direction-diagonal SPD core. NonSpdTensor if
// the tensor fails its own check.
MacroSolution solve_macro(const MacroProblem& prob, double tol = 1e-10);

// Largest relative mismatch on interior faces between the B-form fluxes
// (-B(grad W + a)) and the Corollary-form fluxes assembled from the K/J/L/D
// blocks with Phi variables. Pure block-scaling algebra; ~1e-12.
double corollary_flux_mismatch(const MacroProblem& prob, const MacroSolution& sol);

// Flux line integrals across the x = 1/2 and y = 1/2 mid-planes, one CSV row
// per flux field and section.
std::string line_integrals_csv(const MacroSolution& sol);

} // namespace ekh
