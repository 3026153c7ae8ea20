#include "ekh/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <queue>

namespace ekh {

void Grid2D::classify_faces() {
    fx.assign(nfx(), FaceKind::Wall);
    fy.assign(nfy(), FaceKind::Wall);
    if (topo == Topology::Torus) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                bool r = cell_fluid(i, j);
                bool l = fluid[cwrap(i - 1, j)] != 0;
                fx[fxidx(i, j)] = (l && r) ? FaceKind::Open : FaceKind::Wall;
                bool b = fluid[cwrap(i, j - 1)] != 0;
                fy[fyidx(i, j)] = (b && r) ? FaceKind::Open : FaceKind::Wall;
            }
    } else {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                FaceKind k;
                if (i == 0)
                    k = cell_fluid(0, j) ? FaceKind::Boundary : FaceKind::Wall;
                else if (i == nx)
                    k = cell_fluid(nx - 1, j) ? FaceKind::Boundary : FaceKind::Wall;
                else
                    k = (cell_fluid(i - 1, j) && cell_fluid(i, j)) ? FaceKind::Open
                                                                   : FaceKind::Wall;
                fx[fxidx(i, j)] = k;
            }
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) {
                FaceKind k;
                if (j == 0)
                    k = cell_fluid(i, 0) ? FaceKind::Boundary : FaceKind::Wall;
                else if (j == ny)
                    k = cell_fluid(i, ny - 1) ? FaceKind::Boundary : FaceKind::Wall;
                else
                    k = (cell_fluid(i, j - 1) && cell_fluid(i, j)) ? FaceKind::Open
                                                                   : FaceKind::Wall;
                fy[fyidx(i, j)] = k;
            }
    }
}

int Grid2D::fluid_cell_count() const {
    int n = 0;
    for (auto f : fluid) n += f;
    return n;
}

double Grid2D::porosity() const {
    return static_cast<double>(fluid_cell_count()) * h * h / (Lx * Ly);
}

bool Grid2D::fluid_connected() const {
    int total = fluid_cell_count();
    if (total == 0) return false;
    std::vector<std::uint8_t> seen(ncells(), 0);
    std::queue<int> q;
    int start = 0;
    while (fluid[start] == 0) ++start;
    seen[start] = 1;
    q.push(start);
    int found = 1;
    const bool per = topo == Topology::Torus;
    while (!q.empty()) {
        int c = q.front();
        q.pop();
        int i = c % nx, j = c / nx;
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            int ii = i + di[d], jj = j + dj[d];
            if (per) {
                ii = (ii + nx) % nx;
                jj = (jj + ny) % ny;
            } else if (ii < 0 || ii >= nx || jj < 0 || jj >= ny)
                continue;
            int cc = cidx(ii, jj);
            if (fluid[cc] && !seen[cc]) {
                seen[cc] = 1;
                ++found;
                q.push(cc);
            }
        }
    }
    return found == total;
}

Grid2D Grid2D::make_torus(int n, double L) {
    Grid2D g;
    g.nx = g.ny = n;
    g.Lx = g.Ly = L;
    g.h = L / n;
    g.topo = Topology::Torus;
    g.fluid.assign(g.ncells(), 1);
    g.classify_faces();
    return g;
}

Grid2D Grid2D::make_box(int nx, int ny, double Lx, double Ly) {
    Grid2D g;
    g.nx = nx;
    g.ny = ny;
    g.Lx = Lx;
    g.Ly = Ly;
    g.h = Lx / nx;
    g.topo = Topology::Box;
    g.fluid.assign(g.ncells(), 1);
    g.classify_faces();
    return g;
}

namespace {
void check_same_grid(const Grid2D* a, const Grid2D* b) {
    if (a != b) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}
} // namespace

MacVectorField grad(const ScalarField& s) {
    const Grid2D& g = *s.g;
    MacVectorField out(g);
    const double ih = 1.0 / g.h;
    if (g.topo == Topology::Torus) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                int f = g.fxidx(i, j);
                if (g.fx[f] == FaceKind::Open)
                    out.x[f] = (s.v[g.cidx(i, j)] - s.v[g.cwrap(i - 1, j)]) * ih;
                f = g.fyidx(i, j);
                if (g.fy[f] == FaceKind::Open)
                    out.y[f] = (s.v[g.cidx(i, j)] - s.v[g.cwrap(i, j - 1)]) * ih;
            }
    } else {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) {
                int f = g.fxidx(i, j);
                if (g.fx[f] == FaceKind::Open)
                    out.x[f] = (s.v[g.cidx(i, j)] - s.v[g.cidx(i - 1, j)]) * ih;
            }
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                int f = g.fyidx(i, j);
                if (g.fy[f] == FaceKind::Open)
                    out.y[f] = (s.v[g.cidx(i, j)] - s.v[g.cidx(i, j - 1)]) * ih;
            }
    }
    return out;
}

ScalarField div(const MacVectorField& v) {
    const Grid2D& g = *v.g;
    ScalarField out(g);
    const double ih = 1.0 / g.h;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int c = g.cidx(i, j);
            if (!g.fluid[c]) continue;
            double e, w, n, s;
            if (g.topo == Topology::Torus) {
                w = v.x[g.fxidx(i, j)];
                e = v.x[g.fxidx((i + 1) % g.nx, j)];
                s = v.y[g.fyidx(i, j)];
                n = v.y[g.fyidx(i, (j + 1) % g.ny)];
            } else {
                w = v.x[g.fxidx(i, j)];
                e = v.x[g.fxidx(i + 1, j)];
                s = v.y[g.fyidx(i, j)];
                n = v.y[g.fyidx(i, j + 1)];
            }
            out.v[c] = (e - w + n - s) * ih;
        }
    return out;
}

ScalarField lap(const ScalarField& s) {
    return div(grad(s));
}

double csum(const std::vector<double>& a) {
    double s = 0.0, c = 0.0;
    for (double x : a) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

double cdot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0, c = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = a[i] * b[i];
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

double dot_cells(const ScalarField& a, const ScalarField& b) {
    check_same_grid(a.g, b.g);
    return cdot(a.v, b.v) * a.g->h * a.g->h;
}

double dot_faces(const MacVectorField& a, const MacVectorField& b) {
    check_same_grid(a.g, b.g);
    return (cdot(a.x, b.x) + cdot(a.y, b.y)) * a.g->h * a.g->h;
}

double norm_cells(const ScalarField& a) { return std::sqrt(dot_cells(a, a)); }
double norm_faces(const MacVectorField& a) { return std::sqrt(dot_faces(a, a)); }

namespace {

void write_header(std::ofstream& out, const char* kind, const Grid2D& g) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "EKFIELD1\nkind=%s\nnx=%d ny=%d h=%.17g L=%.17g\n", kind,
                  g.nx, g.ny, g.h, g.Lx);
    out << buf;
}

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
}

struct FieldHeader {
    std::string kind;
    int nx = 0, ny = 0;
    double h = 0.0, L = 0.0;
};

FieldHeader read_header(std::ifstream& in, const std::string& path) {
    std::string magic, kindline, dims;
    if (!std::getline(in, magic) || magic != "EKFIELD1")
        throw Error(ErrorCode::Io, "bad magic in " + path);
    if (!std::getline(in, kindline) || kindline.rfind("kind=", 0) != 0)
        throw Error(ErrorCode::Io, "bad kind line in " + path);
    if (!std::getline(in, dims))
        throw Error(ErrorCode::Io, "bad dims line in " + path);
    FieldHeader hd;
    hd.kind = kindline.substr(5);
    if (std::sscanf(dims.c_str(), "nx=%d ny=%d h=%lg L=%lg", &hd.nx, &hd.ny, &hd.h, &hd.L) != 4)
        throw Error(ErrorCode::Io, "unparsable dims in " + path);
    return hd;
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t n, const std::string& path) {
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
    if (!in) throw Error(ErrorCode::Io, "short read in " + path);
    return v;
}

} // namespace

void write_field(const std::string& path, const ScalarField& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    write_header(out, "scalar", *s.g);
    write_doubles(out, s.v.data(), s.v.size());
}

void write_field(const std::string& path, const MacVectorField& v) {
    const Grid2D& g = *v.g;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    write_header(out, "vector_mac", g);
    // File layout is (nx+1)*ny then nx*(ny+1); the torus wrap is duplicated.
    std::vector<double> buf;
    buf.reserve((g.nx + 1) * g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            buf.push_back(g.topo == Topology::Torus ? v.x[g.fxidx(i % g.nx, j)]
                                                    : v.x[g.fxidx(i, j)]);
    write_doubles(out, buf.data(), buf.size());
    buf.clear();
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            buf.push_back(g.topo == Topology::Torus ? v.y[g.fyidx(i, j % g.ny)]
                                                    : v.y[g.fyidx(i, j)]);
    write_doubles(out, buf.data(), buf.size());
}

ScalarField read_scalar_field(const std::string& path, const Grid2D& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    FieldHeader hd = read_header(in, path);
    if (hd.kind != "scalar" || hd.nx != g.nx || hd.ny != g.ny)
        throw Error(ErrorCode::GridMismatch, "field/grid mismatch in " + path);
    ScalarField s(g);
    s.v = read_doubles(in, static_cast<std::size_t>(g.ncells()), path);
    return s;
}

MacVectorField read_vector_field(const std::string& path, const Grid2D& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    FieldHeader hd = read_header(in, path);
    if (hd.kind != "vector_mac" || hd.nx != g.nx || hd.ny != g.ny)
        throw Error(ErrorCode::GridMismatch, "field/grid mismatch in " + path);
    auto xs = read_doubles(in, static_cast<std::size_t>((g.nx + 1) * g.ny), path);
    auto ys = read_doubles(in, static_cast<std::size_t>(g.nx * (g.ny + 1)), path);
    MacVectorField v(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double val = xs[static_cast<std::size_t>(j * (g.nx + 1) + i)];
            if (g.topo == Topology::Torus) {
                if (i == g.nx) {
                    if (val != v.x[g.fxidx(0, j)])
                        throw Error(ErrorCode::Io, "periodic wrap mismatch in " + path);
                } else
                    v.x[g.fxidx(i, j)] = val;
            } else
                v.x[g.fxidx(i, j)] = val;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double val = ys[static_cast<std::size_t>(j * g.nx + i)];
            if (g.topo == Topology::Torus) {
                if (j == g.ny) {
                    if (val != v.y[g.fyidx(i, 0)])
                        throw Error(ErrorCode::Io, "periodic wrap mismatch in " + path);
                } else
                    v.y[g.fyidx(i, j)] = val;
            } else
                v.y[g.fyidx(i, j)] = val;
        }
    return v;
}

} // namespace ekh
