#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ekh/grid.hpp"

namespace ekh {

struct DisperseParams {
    double delta_min = 0.05;   // minimal surface-to-surface gap (R3)
    double r_min = 0.05;       // curvature bound 1/r_min (R2)
    double r_max = 0.75;       // diameter bound (R4)
    double r_0 = 1.0;          // covering radius (R5)
    bool strict_r5 = false;
};

struct Grain {
    double cx = 0.0, cy = 0.0, r = 0.0;
};

struct Microstructure {
    double L = 0.0;                    // RVE period, pore-scale units
    std::vector<Grain> grains;         // centers in [0,L)^2
    std::string generator;             // perturbed-lattice | bernoulli | poisson-voronoi
    std::uint64_t seed = 0;
    DisperseParams constraints;
};

// Shortest periodic distance between points on the [0,L)^2 torus.
double periodic_distance(double ax, double ay, double bx, double by, double L);

// Random perturbation of the unit lattice: grains at j + zeta^j + eta with
// i.i.d. zeta^j uniform in [-amplitude, amplitude]^2, i.i.d. radii in
// [r_lo, r_hi], one global uniform shift eta. R3 is enforced afterwards by
// proportional radius clamping of violating pairs (a documented deviation:
// the raw ranges allow contact). Deterministic given the seed.
Microstructure generate_perturbed_lattice(int L, double amplitude, double r_lo, double r_hi,
                                          std::uint64_t seed, const DisperseParams& params,
                                          double gap_fraction = 0.05);

// Bernoulli spherical structure: per lattice vertex radius 1/2 with
// probability p_open else 1/4, both shrunk by (1 - gap_fraction) so that
// adjacent grains keep a positive gap, plus one global uniform shift.
Microstructure generate_bernoulli(int L, double p_open, std::uint64_t seed,
                                  const DisperseParams& params, double gap_fraction = 0.05);

// Poisson spherical structure: Poisson(intensity L^2) points, ball of radius
// r kept at z_k iff it lies inside z_k's Voronoi cell (equivalently
// r <= half the periodic nearest-neighbor distance). Kept radii are shrunk by
// (1 - gap_fraction). With strict_r5, empty regions are filled with a grid of
// balls of radius r_0/4 at spacing r_0/2.
Microstructure generate_poisson_voronoi(int L, double intensity, double r, std::uint64_t seed,
                                        const DisperseParams& params,
                                        double gap_fraction = 0.05);

struct Violation {
    std::string rule;    // R2 | R3 | R4 | R5
    int grain_a = -1, grain_b = -1;
    double x = 0.0, y = 0.0;   // witness location for R5
    double value = 0.0;        // offending measurement
};

// Empty report iff R2-R4 hold (R1 smoothness is automatic for disks) and,
// in strict mode, R5. Distances are periodic; R5 is checked on a sample grid
// of spacing <= r_0/8. Violations are data, not errors.
std::vector<Violation> check_disperse(const Microstructure& m, const DisperseParams& params);

// Voxelized realization of the fluid set on an n x n periodic grid.
// A cell is solid iff its center lies in some (wrapped) grain. Grain boundary
// faces are fluid faces adjacent to solid cells; per-grain quadrature weights
// are rescaled so their sum equals the exact perimeter 2 pi r.
struct BoundaryFace {
    int comp;          // 0 = x face, 1 = y face
    int fidx;          // face index in grid arrays
    int cell;          // adjacent fluid cell index
    int grain;         // grain id (or pseudo-grain for mask-built grids)
    double weight;     // quadrature weight, sums to the exact perimeter
};

struct FluidGrid {
    Grid2D grid;
    std::vector<int> cell_grain;           // per cell: grain id or -1 for fluid
    std::vector<BoundaryFace> boundary;    // grain-boundary quadrature
    int ngrains = 0;

    double porosity() const { return grid.porosity(); }
};

FluidGrid voxelize(const Microstructure& m, int n);

// Derived constructor for analytic masks (slab fixtures and the like):
// every boundary face gets weight h on pseudo-grain 0, no rescaling.
FluidGrid fluid_grid_from_mask(int n, double L, const std::vector<std::uint8_t>& cell_fluid);

// EKMICRO1 text format: header line, then one "cx cy r" line per grain.
void write_microstructure(const std::string& path, const Microstructure& m);
Microstructure read_microstructure(const std::string& path);

} // namespace ekh
