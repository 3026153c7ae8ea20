#include "ekh/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ekh {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ValenceOrder: return "ValenceOrder";
        case ErrorCode::NonNeutral: return "NonNeutral";
        case ErrorCode::NonPositive: return "NonPositive";
        case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
        case ErrorCode::DisconnectedFluid: return "DisconnectedFluid";
        case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::InconsistentRhs: return "InconsistentRhs";
        case ErrorCode::CutoffActive: return "CutoffActive";
        case ErrorCode::MissingCellSolution: return "MissingCellSolution";
        case ErrorCode::ConfigMismatch: return "ConfigMismatch";
        case ErrorCode::NonSpdTensor: return "NonSpdTensor";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::TypeError: return "TypeError";
        case ErrorCode::MissingRequired: return "MissingRequired";
        case ErrorCode::StageFailure: return "StageFailure";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

const ElectrolyteSpec& validate_electrolyte(const ElectrolyteSpec& spec) {
    if (spec.N < 1 || static_cast<int>(spec.z.size()) != spec.N ||
        static_cast<int>(spec.n_c.size()) != spec.N ||
        static_cast<int>(spec.pe.size()) != spec.N)
        throw Error(ErrorCode::NonPositive, "species count and array lengths disagree");
    for (int j = 0; j + 1 < spec.N; ++j)
        if (spec.z[j] >= spec.z[j + 1])
            throw Error(ErrorCode::ValenceOrder, "valences must be strictly increasing");
    if (spec.z.front() >= 0 || spec.z.back() <= 0)
        throw Error(ErrorCode::ValenceOrder, "valences must satisfy z_1 < 0 < z_N");
    for (int j = 0; j < spec.N; ++j) {
        if (spec.z[j] == 0)
            throw Error(ErrorCode::ValenceOrder, "zero valence");
        if (!(spec.n_c[j] > 0.0))
            throw Error(ErrorCode::NonPositive, "n_c must be positive");
        if (!(spec.pe[j] > 0.0))
            throw Error(ErrorCode::NonPositive, "Peclet numbers must be positive");
    }
    if (!(spec.beta > 0.0))
        throw Error(ErrorCode::NonPositive, "beta must be positive");
    if (!(spec.n_sigma >= 0.0))
        throw Error(ErrorCode::NonPositive, "N_sigma must be nonnegative");
    double q = 0.0;
    for (int j = 0; j < spec.N; ++j) q += spec.z[j] * spec.n_c[j];
    if (std::abs(q) > 1e-12)
        throw Error(ErrorCode::NonNeutral, "bulk electroneutrality violated");
    return spec;
}

double hardy_nonlinearity(const ElectrolyteSpec& spec, double psi) {
    double s = 0.0;
    for (int j = 0; j < spec.N; ++j) s += spec.z[j] * spec.n_c[j] * std::exp(-spec.z[j] * psi);
    return -s;
}

double hardy_derivative(const ElectrolyteSpec& spec, double psi) {
    double s = 0.0;
    for (int j = 0; j < spec.N; ++j)
        s += static_cast<double>(spec.z[j]) * spec.z[j] * spec.n_c[j] * std::exp(-spec.z[j] * psi);
    return s;
}

double hardy_cutoff(const ElectrolyteSpec& spec, double psi, double ncut) {
    if (psi > ncut) return hardy_nonlinearity(spec, ncut) + (psi - ncut);
    if (psi < -ncut) return hardy_nonlinearity(spec, -ncut) + (psi + ncut);
    return hardy_nonlinearity(spec, psi);
}

double hardy_cutoff_derivative(const ElectrolyteSpec& spec, double psi, double ncut) {
    if (psi > ncut || psi < -ncut) return 1.0;
    return hardy_derivative(spec, psi);
}

namespace {
// sum_j n_j^c exp(-z_j psi) - sum_j n_j^c, the primitive of n_H on [-N, N].
double gamma_core(const ElectrolyteSpec& spec, double psi) {
    double s = 0.0;
    for (int j = 0; j < spec.N; ++j) s += spec.n_c[j] * (std::exp(-spec.z[j] * psi) - 1.0);
    return s;
}
} // namespace

double hardy_cutoff_primitive(const ElectrolyteSpec& spec, double psi, double ncut) {
    if (psi > ncut) {
        double d = psi - ncut;
        return gamma_core(spec, ncut) + hardy_nonlinearity(spec, ncut) * d + 0.5 * d * d;
    }
    if (psi < -ncut) {
        double d = psi + ncut;
        return gamma_core(spec, -ncut) + hardy_nonlinearity(spec, -ncut) * d + 0.5 * d * d;
    }
    return gamma_core(spec, psi);
}

double SurfaceCharge::sup_abs() const {
    if (kind == Kind::Constant) return std::abs(value);
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

BoundConstants bound_constants(const ElectrolyteSpec& spec, double V_m, double V_M) {
    BoundConstants b;
    b.V_m = V_m;
    b.V_M = V_M;
    double zN = spec.z.back();
    double z1 = spec.z.front();
    double sum_neg = 0.0, sum_pos = 0.0;
    for (int j = 0; j < spec.N; ++j)
        (spec.z[j] < 0 ? sum_neg : sum_pos) += spec.n_c[j];
    double a = V_m + z1 * sum_neg;
    b.C_m = V_M + std::log(std::max(0.0, -a) / (zN * spec.n_c.back()) + 1.0) / zN;
    double p = V_M + zN * sum_pos;
    b.C_p = V_m + std::log(std::max(0.0, p) / (-z1 * spec.n_c.front()) + 1.0) / z1;
    b.psi_min = V_m - b.C_m;
    b.psi_max = V_M - b.C_p;
    return b;
}

double screened_lift_barrier_bound(double c0, double k, double r_min) {
    // h(t) = c0 t (1 - t/k)^2: sup h = 4 c0 k / 27, sup|h'| = c0, sup|h''| = 4 c0 / k.
    return 4.0 * c0 / k + c0 / r_min + 4.0 * c0 * k / 27.0;
}

} // namespace ekh
