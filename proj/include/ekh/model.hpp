#pragma once

#include <cstdint>
#include <vector>

#include "ekh/error.hpp"

namespace ekh {

// Dimensionless N-species electrolyte. All quantities follow the paper's
// nondimensional Table-1 scaling; there is no unit conversion anywhere.
struct ElectrolyteSpec {
    int N = 0;
    std::vector<int> z;        // valences, strictly increasing, z.front() < 0 < z.back()
    std::vector<double> n_c;   // infinite-dilution concentrations, each in (0,1)
    std::vector<double> pe;    // Peclet numbers
    double beta = 1.0;         // (pore scale / Debye length)^2
    double n_sigma = 1.0;      // pore scale / Gouy length
};

// Throws on violated invariants, returns its argument otherwise. Idempotent.
const ElectrolyteSpec& validate_electrolyte(const ElectrolyteSpec& spec);

// n_H(psi) = -sum_j z_j n_j^c exp(-z_j psi); strictly increasing, zero at 0
// for electroneutral specs.
double hardy_nonlinearity(const ElectrolyteSpec& spec, double psi);

// d/dpsi n_H(psi) = sum_j z_j^2 n_j^c exp(-z_j psi) > 0.
double hardy_derivative(const ElectrolyteSpec& spec, double psi);

// Cut-off nonlinearity: n_H inside [-Ncut, Ncut], linear slope-1 continuation
// outside. Keeps the Newton Jacobian uniformly positive definite.
double hardy_cutoff(const ElectrolyteSpec& spec, double psi, double ncut);
double hardy_cutoff_derivative(const ElectrolyteSpec& spec, double psi, double ncut);

// Primitive of hardy_cutoff, normalized to vanish at psi = 0. The discrete
// Poisson-Boltzmann energy integrates beta times this over fluid cells.
double hardy_cutoff_primitive(const ElectrolyteSpec& spec, double psi, double ncut);

// Surface charge density (dimensionless sigma) on the grain boundaries.
struct SurfaceCharge {
    enum class Kind { Constant, PerGrain };
    Kind kind = Kind::Constant;
    double value = 0.0;               // Constant
    std::vector<double> values;       // PerGrain, indexed by grain id

    double at(int grain_id) const {
        return kind == Kind::Constant ? value
                                      : values.at(static_cast<std::size_t>(grain_id));
    }
    double sup_abs() const;
    // C0 = N_sigma * sup|sigma|, the Neumann-data bound of the lift problem.
    double bound(double n_sigma) const { return n_sigma * sup_abs(); }
};

// Applied macroscopic driving: body force f* and exterior field E = grad Psi^ext.
struct Forcing {
    double f_star[2] = {0.0, 0.0};
    double e_field[2] = {0.0, 0.0};
    // Exterior potential consistent with constant E, anchored to zero at the
    // domain center (reporting convention; only the gradient matters).
    double psi_ext(double x, double y, double cx, double cy) const {
        return e_field[0] * (x - cx) + e_field[1] * (y - cy);
    }
};

// A-priori bounds on the equilibrium potential, derived from the extrema
// (V_m, V_M) of the screened lift.
struct BoundConstants {
    double V_m = 0.0, V_M = 0.0;
    double C_m = 0.0;       // shift constant of the lower-bound argument
    double C_p = 0.0;       // mirrored shift constant of the upper bound
    double psi_min = 0.0;   // V_m - C_m
    double psi_max = 0.0;   // V_M - C_p
};

// Evaluates the shift constants of the maximum-principle argument:
//   C_m = V_M + (1/z_N) log( (V_m + z_1 sum_{j-} n_j^c)_- / (z_N n_N^c) + 1 )
//   C_p = V_m + (1/z_1) log( (V_M + z_N sum_{j+} n_j^c)_+ / (|z_1| n_1^c) + 1 )
// with (a)_- = max(0,-a), (a)_+ = max(0,a), and the resulting potential bounds
// psi_min = V_m - C_m, psi_max = V_M - C_p.
BoundConstants bound_constants(const ElectrolyteSpec& spec, double V_m, double V_M);

// Upper bound 2*Chat for |V| from the barrier function of the screened lift
// problem, built from h(t) = C0 t (1 - t/k)^2 on [0,k]:
//   Chat = sup|h''| + sup|h'| / r_min + sup h.
// k should be min(r_min, delta_min/2), the range where the distance function
// to the grain set stays smooth.
double screened_lift_barrier_bound(double c0, double k, double r_min);

} // namespace ekh
