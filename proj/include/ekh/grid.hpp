#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ekh/error.hpp"

namespace ekh {

// Staggered (MAC) grid on a rectangle: scalars at cell centers, velocity
// components at faces. Two topologies:
//   Torus - fully periodic RVE cell; faces stored once (nx*ny per component),
//           x-face (i,j) separates cells (i-1 mod nx, j) and (i,j).
//   Box   - Dirichlet outer boundary; x-faces are (nx+1)*ny with i=0 and i=nx
//           on the domain edge.
enum class Topology : std::uint8_t { Torus, Box };

// Face classification. Open faces carry velocity unknowns and scalar fluxes.
// Wall faces touch at least one solid cell: no-slip, zero scalar flux.
// Boundary faces (Box only) lie on the domain edge next to a fluid cell:
// no-slip for velocity, Dirichlet transmissibility for scalars.
enum class FaceKind : std::uint8_t { Open = 0, Wall = 1, Boundary = 2 };

struct Grid2D {
    int nx = 0, ny = 0;
    double h = 0.0;
    double Lx = 0.0, Ly = 0.0;
    Topology topo = Topology::Torus;

    std::vector<std::uint8_t> fluid;    // nx*ny cell mask, 1 = fluid
    std::vector<FaceKind> fx, fy;       // face kinds

    int ncells() const { return nx * ny; }
    int nfx() const { return topo == Topology::Torus ? nx * ny : (nx + 1) * ny; }
    int nfy() const { return topo == Topology::Torus ? nx * ny : nx * (ny + 1); }

    int cidx(int i, int j) const { return j * nx + i; }
    int cwrap(int i, int j) const {
        i = (i % nx + nx) % nx;
        j = (j % ny + ny) % ny;
        return j * nx + i;
    }
    int fxidx(int i, int j) const {
        return topo == Topology::Torus ? j * nx + i : j * (nx + 1) + i;
    }
    int fyidx(int i, int j) const { return j * nx + i; }

    bool cell_fluid(int i, int j) const { return fluid[cidx(i, j)] != 0; }

    // Builds face kinds from the cell mask. For Torus every face separating
    // two fluid cells is Open; for Box the outer rim is Boundary/Wall.
    void classify_faces();

    // Number of fluid cells and the fluid volume fraction.
    int fluid_cell_count() const;
    double porosity() const;

    // True when the fluid phase is edge-connected (periodically for Torus).
    bool fluid_connected() const;

    static Grid2D make_torus(int n, double L);
    static Grid2D make_box(int nx, int ny, double Lx, double Ly);
};

struct ScalarField {
    const Grid2D* g = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& grid) : g(&grid), v(grid.ncells(), 0.0) {}
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
};

struct MacVectorField {
    const Grid2D* g = nullptr;
    std::vector<double> x, y;

    MacVectorField() = default;
    explicit MacVectorField(const Grid2D& grid)
        : g(&grid), x(grid.nfx(), 0.0), y(grid.nfy(), 0.0) {}
};

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0.0;
    std::string method;
    bool converged = false;
};

// Discrete operators on the torus restricted to the fluid phase.
// Homogeneous Neumann at wall faces is realized by zeroing fluxes there;
// nonhomogeneous Neumann data enters only via explicit boundary-face sources.
MacVectorField grad(const ScalarField& s);
ScalarField div(const MacVectorField& v);
ScalarField lap(const ScalarField& s);

// Compensated (Neumaier) sums; all inner products go through these so that
// invariant checks are deterministic.
double csum(const std::vector<double>& a);
double cdot(const std::vector<double>& a, const std::vector<double>& b);
// <a,b> = sum a_i b_i h^2 over cells / faces.
double dot_cells(const ScalarField& a, const ScalarField& b);
double dot_faces(const MacVectorField& a, const MacVectorField& b);
double norm_cells(const ScalarField& a);
double norm_faces(const MacVectorField& a);

// EKFIELD1 file format: text header, then little-endian 64-bit floats.
// scalar: nx*ny values row-major (x fastest).
// vector_mac: (nx+1)*ny x-face values then nx*(ny+1) y-face values; for the
// torus the wrap column/row is duplicated on write and checked on read.
void write_field(const std::string& path, const ScalarField& s);
void write_field(const std::string& path, const MacVectorField& v);
ScalarField read_scalar_field(const std::string& path, const Grid2D& g);
MacVectorField read_vector_field(const std::string& path, const Grid2D& g);

} // namespace ekh
