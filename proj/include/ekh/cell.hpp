#pragma once

#include <vector>

#include "ekh/geometry.hpp"
#include "ekh/grid.hpp"
#include "ekh/model.hpp"
#include "ekh/pb.hpp"
#include "ekh/solve.hpp"

namespace ekh {

// Per-species face weights: harmonic averages of the equilibrium
// concentration at open faces, zero elsewhere. The same weights appear in
// the species operators, the momentum coupling, the driving terms and the
// tensor quadratures; that consistency is what makes the discrete Onsager
// reciprocity exact up to solver error.
struct SpeciesWeights {
    std::vector<double> wx, wy;
};

SpeciesWeights harmonic_face_weights(const Grid2D& g, const ScalarField& n);

// div( w .* u ) on fluid cells; faces with zero weight do not contribute.
ScalarField weighted_div(const Grid2D& g, const SpeciesWeights& w, const MacVectorField& u);

// sum over open faces of component l of u (h^2-unweighted raw sum)
double face_sum_component(const Grid2D& g, const MacVectorField& u, int l);
// sum over open l-faces of w .* u
double weighted_face_sum(const Grid2D& g, const SpeciesWeights& w, const MacVectorField& u,
                         int l);
// sum over open l-faces of the weight itself
double weight_sum_component(const Grid2D& g, const SpeciesWeights& w, int l);

// Shared immutable state for the 2(N+1) cell problems of one realization.
struct CellContext {
    const FluidGrid* fg = nullptr;
    const EquilibriumState* eq = nullptr;
    const ElectrolyteSpec* spec = nullptr;
    std::vector<SpeciesWeights> W;        // per species
    std::vector<Stencil5> species_op;     // -div(n_j grad .), singular (mean-free)
    StokesSolver stokes;

    CellContext(const FluidGrid& fg_, const EquilibriumState& eq_,
                const ElectrolyteSpec& spec_);
};

struct CellResiduals {
    double momentum = 0.0;
    double divergence = 0.0;
    std::vector<double> species;
    double boundary_leak = 0.0;
    double max_rel() const;
};

struct CellSolution {
    int family = 0;   // 0 = pressure-driven, 1..N = species-driven
    int k = 1;        // driving direction, 1 or 2
    MacVectorField v;
    ScalarField pi;
    std::vector<ScalarField> theta;   // zero-mean scalars; corrector = grad theta
    CellResiduals residuals;
    SolveReport report;
};

// Strong-form system, family 0 (macroscopic pressure gradient e^k):
//   -lap v + grad pi = e^k + sum_j z_j n_j grad theta_j,  div v = 0,
//   div( n_j ( v + (z_j/Pe_j) grad theta_j ) ) = 0.
// Family i >= 1 (macroscopic diffusive flux of species i):
//   -lap v + grad pi = z_i n_i e^k + sum_j z_j n_j grad theta_j,  div v = 0,
//   div( n_j ( v + (z_j/Pe_j)(grad theta_j + delta_ij e^k) ) ) = 0.
// Block Gauss-Seidel between the Stokes block and the N species blocks,
// relaxation 1.0, convergence on the combined strong-form residual.
CellSolution solve_cell(CellContext& ctx, int family, int k, double tol = 1e-10,
                        int max_picard = 300);

// Test hook: the same driver with both driving terms replaced by callers'
// fields (zero fields give the zero solution by linearity).
CellSolution solve_cell_with_drive(CellContext& ctx, int family, int k,
                                   const MacVectorField& face_force,
                                   const std::vector<MacVectorField>& species_drive,
                                   double tol, int max_picard,
                                   const CellSolution* initial = nullptr);

// Monolithic sparse-LU solve of the same discrete system; the mandatory
// oracle path for grids <= 32^2.
CellSolution solve_cell_direct(const CellContext& ctx, int family, int k);

// Recomputes the strong-form residual record of a solution.
CellResiduals cell_residuals(const CellContext& ctx, const CellSolution& sol);

// Discrete reciprocity pairing; family_pairing(a, b) == family_pairing(b, a)
// up to solver error (the exchange identity behind the Onsager symmetry).
double family_pairing(const CellContext& ctx, const CellSolution& a, const CellSolution& b);

// Dissipation quadratic form of a linear combination of cell solutions with
// coefficients coef[alpha] over the 2(N+1) family layout
// alpha = family*2 + (k-1):
//   E{|grad v|^2} + sum_j (z_j^2/Pe_j) E{ n_j |grad theta_j + eta_j|^2 },
// where eta_j is the per-species affine offset (the delta_ij e^k terms of
// the combination). Used by the energy-identity checks.
double combination_dissipation(const CellContext& ctx,
                               const std::vector<CellSolution>& cells,
                               const std::vector<double>& coef);

} // namespace ekh
