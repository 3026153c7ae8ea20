#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ekh/cell.hpp"

namespace ekh {

using Mat2 = std::array<std::array<double, 2>, 2>;

// Small dense symmetric-capable matrix for the assembled block tensor.
struct SmallMat {
    int n = 0;
    std::vector<double> a;   // row-major n*n
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    static SmallMat zero(int n) { return {n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)}; }
};

// Cyclic Jacobi eigenvalue iteration for small symmetric matrices.
std::vector<double> jacobi_eigenvalues(SmallMat m, double tol = 1e-12, int max_sweeps = 64);

struct OnsagerTensor {
    int N = 0;
    double L = 0.0;
    int grid_n = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    double porosity = 0.0;
    Mat2 K{};                          // permeability block
    std::vector<Mat2> Jm;              // electroosmotic blocks J_i
    std::vector<Mat2> Lm;              // streaming blocks L_j
    std::vector<std::vector<Mat2>> D;  // electrodiffusion blocks D_ji
    SmallMat B;                        // (N+1)d x (N+1)d assembled layout
    double asym = 0.0;
    double lambda_min = 0.0;
};

// Volume-average tensor entries over the RVE from the 2(N+1) cell solutions
// (layout alpha = family*2 + (k-1)). The E{.} average carries the porosity
// weight: (1/L^2) sum_fluid (.) h^2. The n_j-weighted entries use the same
// harmonic face weights as the cell operators, which makes the block
// symmetry exact up to solver error.
OnsagerTensor assemble_tensor(const CellContext& ctx, const std::vector<CellSolution>& cells);

struct OnsagerCheck {
    double asym = 0.0;         // ||B - B^T||_F / ||B||_F
    double lambda_min = 0.0;   // smallest eigenvalue of (B + B^T)/2
    bool pass = false;
};

OnsagerCheck check_onsager(const OnsagerTensor& t, double asym_tol = 1e-6);

struct EnsembleEstimate {
    int M = 0;
    int N = 0;
    double mean_porosity = 0.0;
    SmallMat mean;     // entrywise mean of B
    SmallMat stderr_;  // sample stddev / sqrt(M)
    std::vector<OnsagerTensor> members;
};

EnsembleEstimate ensemble_average(const std::vector<OnsagerTensor>& tensors);

// Tensor JSON (fixed key order) and the ensemble CSV (one row per entry).
std::string tensor_to_json(const OnsagerTensor& t);
OnsagerTensor tensor_from_json(const std::string& text);
void write_tensor(const std::string& path, const OnsagerTensor& t);
OnsagerTensor read_tensor(const std::string& path);
void write_ensemble_csv(const std::string& path, const EnsembleEstimate& e);

} // namespace ekh
