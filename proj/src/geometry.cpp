#include "ekh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ekh/rng.hpp"

namespace ekh {

namespace {
constexpr std::uint64_t kStreamEta = 0xE7A0;
constexpr std::uint64_t kStreamSites = 0x517E0000;
constexpr std::uint64_t kStreamPoissonCount = 0xC0;
constexpr std::uint64_t kStreamPoissonPts = 0x90150000;

double wrap01(double x, double L) {
    x = std::fmod(x, L);
    if (x < 0) x += L;
    return x;
}
} // namespace

double periodic_distance(double ax, double ay, double bx, double by, double L) {
    double dx = std::abs(ax - bx);
    double dy = std::abs(ay - by);
    dx = std::min(dx, L - dx);
    dy = std::min(dy, L - dy);
    return std::hypot(dx, dy);
}

namespace {

// Proportional radius clamp: shrink both radii of a violating pair so the
// surface gap equals delta_min. Shrinking never creates new violations, so
// one pass in lexicographic pair order settles everything.
void enforce_r3_by_clamping(Microstructure& m) {
    const double dmin = m.constraints.delta_min;
    const int n = static_cast<int>(m.grains.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Grain& ga = m.grains[a];
            Grain& gb = m.grains[b];
            double d = periodic_distance(ga.cx, ga.cy, gb.cx, gb.cy, m.L);
            double need = ga.r + gb.r + dmin;
            if (need > d) {
                double t = (d - dmin) / (ga.r + gb.r);
                if (t <= 0.0)
                    throw Error(ErrorCode::InfeasibleConstraints,
                                "grain centers closer than delta_min");
                ga.r *= t;
                gb.r *= t;
            }
        }
    for (const Grain& g : m.grains)
        if (g.r < m.constraints.r_min)
            throw Error(ErrorCode::InfeasibleConstraints,
                        "R3 clamping drove a radius below r_min");
}

} // namespace

Microstructure generate_perturbed_lattice(int L, double amplitude, double r_lo, double r_hi,
                                          std::uint64_t seed, const DisperseParams& params,
                                          double gap_fraction) {
    (void)gap_fraction;
    Microstructure m;
    m.L = L;
    m.generator = "perturbed-lattice";
    m.seed = seed;
    m.constraints = params;
    CounterRng eta_rng(seed, kStreamEta);
    const double ex = eta_rng.next_uniform(-0.5, 0.5);
    const double ey = eta_rng.next_uniform(-0.5, 0.5);
    for (int jy = 0; jy < L; ++jy)
        for (int jx = 0; jx < L; ++jx) {
            CounterRng site(seed, kStreamSites + static_cast<std::uint64_t>(jy) * L + jx);
            double zx = site.next_uniform(-amplitude, amplitude);
            double zy = site.next_uniform(-amplitude, amplitude);
            double r = site.next_uniform(r_lo, r_hi);
            Grain g;
            g.cx = wrap01(jx + zx + ex, L);
            g.cy = wrap01(jy + zy + ey, L);
            g.r = r;
            m.grains.push_back(g);
        }
    enforce_r3_by_clamping(m);
    return m;
}

Microstructure generate_bernoulli(int L, double p_open, std::uint64_t seed,
                                  const DisperseParams& params, double gap_fraction) {
    Microstructure m;
    m.L = L;
    m.generator = "bernoulli";
    m.seed = seed;
    m.constraints = params;
    CounterRng eta_rng(seed, kStreamEta);
    const double ex = eta_rng.next_uniform(-0.5, 0.5);
    const double ey = eta_rng.next_uniform(-0.5, 0.5);
    const double shrink = 1.0 - gap_fraction;
    for (int jy = 0; jy < L; ++jy)
        for (int jx = 0; jx < L; ++jx) {
            CounterRng site(seed, kStreamSites + static_cast<std::uint64_t>(jy) * L + jx);
            bool open = site.next_bernoulli(p_open);
            Grain g;
            g.cx = wrap01(jx + ex, L);
            g.cy = wrap01(jy + ey, L);
            g.r = (open ? 0.5 : 0.25) * shrink;
            m.grains.push_back(g);
        }
    return m;
}

Microstructure generate_poisson_voronoi(int L, double intensity, double r, std::uint64_t seed,
                                        const DisperseParams& params, double gap_fraction) {
    Microstructure m;
    m.L = L;
    m.generator = "poisson-voronoi";
    m.seed = seed;
    m.constraints = params;
    CounterRng count_rng(seed, kStreamPoissonCount);
    const std::uint64_t npts = count_rng.next_poisson(intensity * L * L);
    std::vector<double> px(npts), py(npts);
    for (std::uint64_t k = 0; k < npts; ++k) {
        CounterRng pt(seed, kStreamPoissonPts + k);
        px[k] = pt.next_uniform(0.0, L);
        py[k] = pt.next_uniform(0.0, L);
    }
    // Ball of radius r inside the Voronoi cell of z_k <=> r <= d_nn / 2.
    for (std::uint64_t k = 0; k < npts; ++k) {
        double dnn = std::numeric_limits<double>::infinity();
        for (std::uint64_t l = 0; l < npts; ++l)
            if (l != k) dnn = std::min(dnn, periodic_distance(px[k], py[k], px[l], py[l], L));
        if (r <= 0.5 * dnn) {
            Grain g;
            g.cx = px[k];
            g.cy = py[k];
            g.r = r * (1.0 - gap_fraction);
            m.grains.push_back(g);
        }
    }
    if (params.strict_r5) {
        // Fill large empty areas with a regular grid of balls.
        const double spacing = params.r_0 / 2.0;
        const double rf = params.r_0 / 4.0;
        const int cells = std::max(1, static_cast<int>(std::ceil(L / spacing)));
        const double s = static_cast<double>(L) / cells;
        for (int jy = 0; jy < cells; ++jy)
            for (int jx = 0; jx < cells; ++jx) {
                double cx = (jx + 0.5) * s;
                double cy = (jy + 0.5) * s;
                double dsurf = std::numeric_limits<double>::infinity();
                for (const Grain& g : m.grains)
                    dsurf = std::min(dsurf,
                                     periodic_distance(cx, cy, g.cx, g.cy, L) - g.r);
                if (dsurf > params.r_0 / 2.0 && dsurf >= rf + params.delta_min) {
                    Grain g;
                    g.cx = cx;
                    g.cy = cy;
                    g.r = rf;
                    m.grains.push_back(g);
                }
            }
    }
    return m;
}

std::vector<Violation> check_disperse(const Microstructure& m, const DisperseParams& params) {
    std::vector<Violation> out;
    const int n = static_cast<int>(m.grains.size());
    for (int a = 0; a < n; ++a) {
        const Grain& g = m.grains[a];
        if (g.r < params.r_min)
            out.push_back({"R2", a, -1, g.cx, g.cy, g.r});
        if (g.r > params.r_max)
            out.push_back({"R4", a, -1, g.cx, g.cy, g.r});
        for (int b = a + 1; b < n; ++b) {
            const Grain& gb = m.grains[b];
            double gap = periodic_distance(g.cx, g.cy, gb.cx, gb.cy, m.L) - g.r - gb.r;
            if (gap < params.delta_min)
                out.push_back({"R3", a, b, 0.0, 0.0, gap});
        }
    }
    if (params.strict_r5) {
        const int samples = std::max(8, static_cast<int>(std::ceil(8.0 * m.L / params.r_0)));
        const double s = m.L / samples;
        for (int jy = 0; jy < samples; ++jy)
            for (int jx = 0; jx < samples; ++jx) {
                double x = (jx + 0.5) * s;
                double y = (jy + 0.5) * s;
                double d = std::numeric_limits<double>::infinity();
                for (const Grain& g : m.grains)
                    d = std::min(d, periodic_distance(x, y, g.cx, g.cy, m.L) - g.r);
                if (d > params.r_0)
                    out.push_back({"R5", -1, -1, x, y, d});
            }
    }
    return out;
}

FluidGrid voxelize(const Microstructure& m, int n) {
    if (n < 32 || (n & (n - 1)) != 0)
        throw Error(ErrorCode::ResolutionTooCoarse, "n must be a power of two >= 32");
    const double h = m.L / n;
    if (!m.grains.empty() && h > m.constraints.delta_min / 4.0)
        throw Error(ErrorCode::ResolutionTooCoarse,
                    "h > delta_min/4; voxelization could merge grains");
    FluidGrid fg;
    fg.grid = Grid2D::make_torus(n, m.L);
    Grid2D& g = fg.grid;
    fg.cell_grain.assign(g.ncells(), -1);
    fg.ngrains = static_cast<int>(m.grains.size());

    // Rasterize each grain over its bounding box; grains are pairwise
    // disjoint (R3) so cell ownership is unambiguous.
    for (int gi = 0; gi < fg.ngrains; ++gi) {
        const Grain& gr = m.grains[gi];
        int i0 = static_cast<int>(std::floor((gr.cx - gr.r) / h)) - 1;
        int i1 = static_cast<int>(std::ceil((gr.cx + gr.r) / h)) + 1;
        int j0 = static_cast<int>(std::floor((gr.cy - gr.r) / h)) - 1;
        int j1 = static_cast<int>(std::ceil((gr.cy + gr.r) / h)) + 1;
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                double x = (i + 0.5) * h;
                double y = (j + 0.5) * h;
                double dx = x - gr.cx, dy = y - gr.cy;
                if (dx * dx + dy * dy <= gr.r * gr.r) {
                    int c = g.cwrap(i, j);
                    g.fluid[c] = 0;
                    fg.cell_grain[c] = gi;
                }
            }
    }
    if (g.fluid_cell_count() == 0)
        throw Error(ErrorCode::DisconnectedFluid, "no fluid cells");
    if (!g.fluid_connected())
        throw Error(ErrorCode::DisconnectedFluid, "fluid phase is not connected");
    g.classify_faces();

    // Boundary faces: fluid faces adjacent to solid cells, attributed to the
    // solid cell's grain, weights rescaled to the exact perimeter per grain.
    std::vector<double> raw(fg.ngrains, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int cl = g.cwrap(i - 1, j);
            int cr = g.cidx(i, j);
            if ((g.fluid[cl] != 0) != (g.fluid[cr] != 0)) {
                int solid = g.fluid[cl] ? cr : cl;
                int fluidc = g.fluid[cl] ? cl : cr;
                BoundaryFace f;
                f.comp = 0;
                f.fidx = g.fxidx(i, j);
                f.cell = fluidc;
                f.grain = fg.cell_grain[solid];
                f.weight = h;
                fg.boundary.push_back(f);
                raw[f.grain] += h;
            }
            int cb = g.cwrap(i, j - 1);
            if ((g.fluid[cb] != 0) != (g.fluid[cr] != 0)) {
                int solid = g.fluid[cb] ? cr : cb;
                int fluidc = g.fluid[cb] ? cb : cr;
                BoundaryFace f;
                f.comp = 1;
                f.fidx = g.fyidx(i, j);
                f.cell = fluidc;
                f.grain = fg.cell_grain[solid];
                f.weight = h;
                fg.boundary.push_back(f);
                raw[f.grain] += h;
            }
        }
    for (BoundaryFace& f : fg.boundary) {
        double exact = 2.0 * M_PI * m.grains[f.grain].r;
        f.weight *= exact / raw[f.grain];
    }
    return fg;
}

FluidGrid fluid_grid_from_mask(int n, double L, const std::vector<std::uint8_t>& cell_fluid) {
    FluidGrid fg;
    fg.grid = Grid2D::make_torus(n, L);
    Grid2D& g = fg.grid;
    g.fluid = cell_fluid;
    if (!g.fluid_connected())
        throw Error(ErrorCode::DisconnectedFluid, "fluid phase is not connected");
    g.classify_faces();
    fg.cell_grain.assign(g.ncells(), -1);
    for (int c = 0; c < g.ncells(); ++c)
        if (!g.fluid[c]) fg.cell_grain[c] = 0;
    fg.ngrains = 1;
    const double h = g.h;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int cl = g.cwrap(i - 1, j);
            int cr = g.cidx(i, j);
            if ((g.fluid[cl] != 0) != (g.fluid[cr] != 0))
                fg.boundary.push_back({0, g.fxidx(i, j), g.fluid[cl] ? cl : cr, 0, h});
            int cb = g.cwrap(i, j - 1);
            if ((g.fluid[cb] != 0) != (g.fluid[cr] != 0))
                fg.boundary.push_back({1, g.fyidx(i, j), g.fluid[cb] ? cb : cr, 0, h});
        }
    return fg;
}

void write_microstructure(const std::string& path, const Microstructure& m) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    char buf[256];
    std::snprintf(buf, sizeof buf, "EKMICRO1 L=%.17g generator=%s seed=%llu\n", m.L,
                  m.generator.c_str(), static_cast<unsigned long long>(m.seed));
    out << buf;
    for (const Grain& g : m.grains) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", g.cx, g.cy, g.r);
        out << buf;
    }
}

Microstructure read_microstructure(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    Microstructure m;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty file " + path);
    char gen[64];
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "EKMICRO1 L=%lg generator=%63s seed=%llu", &m.L, gen, &seed) != 3)
        throw Error(ErrorCode::Io, "bad EKMICRO1 header in " + path);
    m.generator = gen;
    m.seed = seed;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Grain g;
        if (std::sscanf(line.c_str(), "%lg %lg %lg", &g.cx, &g.cy, &g.r) != 3)
            throw Error(ErrorCode::Io, "bad grain line in " + path);
        m.grains.push_back(g);
    }
    return m;
}

} // namespace ekh
