#include "ekh/onsager.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace ekh {

using ordered_json = nlohmann::ordered_json;

std::vector<double> jacobi_eigenvalues(SmallMat m, double tol, int max_sweeps) {
    const int n = m.n;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i != j) off += m.at(i, j) * m.at(i, j);
                scale += m.at(i, j) * m.at(i, j);
            }
        if (off <= tol * tol * std::max(scale, 1e-300)) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = m.at(p, q);
                if (apq == 0.0) continue;
                double app = m.at(p, p), aqq = m.at(q, q);
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double cth = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * cth;
                for (int k = 0; k < n; ++k) {
                    double akp = m.at(k, p), akq = m.at(k, q);
                    m.at(k, p) = cth * akp - s * akq;
                    m.at(k, q) = s * akp + cth * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = m.at(p, k), aqk = m.at(q, k);
                    m.at(p, k) = cth * apk - s * aqk;
                    m.at(q, k) = s * apk + cth * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = m.at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

OnsagerTensor assemble_tensor(const CellContext& ctx, const std::vector<CellSolution>& cells) {
    const Grid2D& g = ctx.fg->grid;
    const ElectrolyteSpec& spec = *ctx.spec;
    const int N = spec.N;
    if (static_cast<int>(cells.size()) != 2 * (N + 1))
        throw Error(ErrorCode::MissingCellSolution, "expected 2(N+1) cell solutions");
    for (const auto& c : cells)
        if (!c.report.converged)
            throw Error(ErrorCode::MissingCellSolution, "unconverged cell solution");

    OnsagerTensor t;
    t.N = N;
    t.L = g.Lx;
    t.grid_n = g.nx;
    t.porosity = g.porosity();
    t.Jm.assign(N, Mat2{});
    t.Lm.assign(N, Mat2{});
    t.D.assign(N, std::vector<Mat2>(N, Mat2{}));

    const double scale = g.h * g.h / (g.Lx * g.Ly);
    auto sol = [&](int family, int k) -> const CellSolution& {
        return cells[static_cast<std::size_t>(family) * 2 + (k - 1)];
    };

    for (int k = 1; k <= 2; ++k)
        for (int l = 1; l <= 2; ++l) {
            t.K[l - 1][k - 1] = scale * face_sum_component(g, sol(0, k).v, l);
            for (int i = 1; i <= N; ++i)
                t.Jm[i - 1][l - 1][k - 1] = scale * face_sum_component(g, sol(i, k).v, l);
            for (int j = 0; j < N; ++j) {
                const double zp = static_cast<double>(spec.z[j]) / spec.pe[j];
                {
                    const CellSolution& s0 = sol(0, k);
                    MacVectorField gt = grad(s0.theta[j]);
                    double val = weighted_face_sum(g, ctx.W[j], s0.v, l) +
                                 zp * weighted_face_sum(g, ctx.W[j], gt, l);
                    t.Lm[j][l - 1][k - 1] = scale * val;
                }
                for (int i = 1; i <= N; ++i) {
                    const CellSolution& si = sol(i, k);
                    MacVectorField gt = grad(si.theta[j]);
                    double val = weighted_face_sum(g, ctx.W[j], si.v, l) +
                                 zp * weighted_face_sum(g, ctx.W[j], gt, l);
                    if (i - 1 == j && l == k)
                        val += zp * weight_sum_component(g, ctx.W[j], l);
                    t.D[j][i - 1][l - 1][k - 1] = scale * val;
                }
            }
        }

    // assembled block layout: row 0 = [K, J_i / z_i], row j = [L_j, D_ji / z_i]
    const int nb = 2 * (N + 1);
    t.B = SmallMat::zero(nb);
    for (int l = 0; l < 2; ++l)
        for (int k = 0; k < 2; ++k) {
            t.B.at(l, k) = t.K[l][k];
            for (int i = 0; i < N; ++i)
                t.B.at(l, 2 * (i + 1) + k) = t.Jm[i][l][k] / spec.z[i];
            for (int j = 0; j < N; ++j) {
                t.B.at(2 * (j + 1) + l, k) = t.Lm[j][l][k];
                for (int i = 0; i < N; ++i)
                    t.B.at(2 * (j + 1) + l, 2 * (i + 1) + k) = t.D[j][i][l][k] / spec.z[i];
            }
        }

    OnsagerCheck chk = check_onsager(t);
    t.asym = chk.asym;
    t.lambda_min = chk.lambda_min;
    return t;
}

OnsagerCheck check_onsager(const OnsagerTensor& t, double asym_tol) {
    OnsagerCheck c;
    const int n = t.B.n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double d = t.B.at(i, j) - t.B.at(j, i);
            num += d * d;
            den += t.B.at(i, j) * t.B.at(i, j);
        }
    c.asym = den > 0 ? std::sqrt(num / den) : 0.0;
    SmallMat s = SmallMat::zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.at(i, j) = 0.5 * (t.B.at(i, j) + t.B.at(j, i));
    auto ev = jacobi_eigenvalues(s);
    c.lambda_min = ev.empty() ? 0.0 : ev.front();
    c.pass = c.asym <= asym_tol && c.lambda_min > 0.0;
    return c;
}

EnsembleEstimate ensemble_average(const std::vector<OnsagerTensor>& tensors) {
    if (tensors.size() < 2)
        throw Error(ErrorCode::ConfigMismatch, "ensemble needs at least two realizations");
    const OnsagerTensor& t0 = tensors.front();
    for (const auto& t : tensors) {
        if (t.N != t0.N || t.grid_n != t0.grid_n || t.L != t0.L ||
            t.config_hash != t0.config_hash)
            throw Error(ErrorCode::ConfigMismatch, "mixed configurations in ensemble");
    }
    EnsembleEstimate e;
    e.M = static_cast<int>(tensors.size());
    e.N = t0.N;
    const int nb = t0.B.n;
    e.mean = SmallMat::zero(nb);
    e.stderr_ = SmallMat::zero(nb);
    // centered accumulation: exact for identical members
    double dpor = 0.0;
    for (const auto& t : tensors) dpor += t.porosity - t0.porosity;
    e.mean_porosity = t0.porosity + dpor / e.M;
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            double d = 0.0;
            for (const auto& t : tensors) d += t.B.at(i, j) - t0.B.at(i, j);
            e.mean.at(i, j) = t0.B.at(i, j) + d / e.M;
        }
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            double ss = 0.0;
            for (const auto& t : tensors) {
                double d = t.B.at(i, j) - e.mean.at(i, j);
                ss += d * d;
            }
            e.stderr_.at(i, j) = std::sqrt(ss / (e.M - 1)) / std::sqrt(double(e.M));
        }
    e.members = tensors;
    return e;
}

namespace {
ordered_json mat2_json(const Mat2& m) {
    return ordered_json::array({ordered_json::array({m[0][0], m[0][1]}),
                                ordered_json::array({m[1][0], m[1][1]})});
}
Mat2 mat2_from(const ordered_json& j) {
    Mat2 m;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) m[a][b] = j.at(a).at(b).get<double>();
    return m;
}
} // namespace

std::string tensor_to_json(const OnsagerTensor& t) {
    ordered_json j;
    j["config_hash"] = t.config_hash;
    j["seed"] = t.seed;
    j["N"] = t.N;
    j["L"] = t.L;
    j["grid_n"] = t.grid_n;
    j["porosity"] = t.porosity;
    j["K"] = mat2_json(t.K);
    ordered_json jj = ordered_json::array();
    for (const auto& m : t.Jm) jj.push_back(mat2_json(m));
    j["J"] = jj;
    ordered_json ll = ordered_json::array();
    for (const auto& m : t.Lm) ll.push_back(mat2_json(m));
    j["Lb"] = ll;
    ordered_json dd = ordered_json::array();
    for (const auto& row : t.D) {
        ordered_json r = ordered_json::array();
        for (const auto& m : row) r.push_back(mat2_json(m));
        dd.push_back(r);
    }
    j["D"] = dd;
    ordered_json bb = ordered_json::array();
    for (int i = 0; i < t.B.n; ++i) {
        ordered_json row = ordered_json::array();
        for (int k = 0; k < t.B.n; ++k) row.push_back(t.B.at(i, k));
        bb.push_back(row);
    }
    j["B"] = bb;
    j["asym"] = t.asym;
    j["lambda_min"] = t.lambda_min;
    return j.dump(2) + "\n";
}

OnsagerTensor tensor_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    OnsagerTensor t;
    t.config_hash = j.at("config_hash").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.N = j.at("N").get<int>();
    t.L = j.at("L").get<double>();
    t.grid_n = j.at("grid_n").get<int>();
    t.porosity = j.at("porosity").get<double>();
    t.K = mat2_from(j.at("K"));
    for (const auto& m : j.at("J")) t.Jm.push_back(mat2_from(m));
    for (const auto& m : j.at("Lb")) t.Lm.push_back(mat2_from(m));
    for (const auto& row : j.at("D")) {
        std::vector<Mat2> r;
        for (const auto& m : row) r.push_back(mat2_from(m));
        t.D.push_back(r);
    }
    const auto& bb = j.at("B");
    t.B = SmallMat::zero(static_cast<int>(bb.size()));
    for (int i = 0; i < t.B.n; ++i)
        for (int k = 0; k < t.B.n; ++k) t.B.at(i, k) = bb.at(i).at(k).get<double>();
    t.asym = j.at("asym").get<double>();
    t.lambda_min = j.at("lambda_min").get<double>();
    return t;
}

void write_tensor(const std::string& path, const OnsagerTensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    out << tensor_to_json(t);
}

OnsagerTensor read_tensor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return tensor_from_json(text);
}

void write_ensemble_csv(const std::string& path, const EnsembleEstimate& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    out << "row,col,mean,stderr\n";
    char buf[128];
    for (int i = 0; i < e.mean.n; ++i)
        for (int j = 0; j < e.mean.n; ++j) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", i, j, e.mean.at(i, j),
                          e.stderr_.at(i, j));
            out << buf;
        }
}

} // namespace ekh
