#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "fraclab/geometry.hpp"

namespace fraclab {

/// Uniform lattice of dyadic cells (level g, h = 2^{-g}) tiling the
/// domain window. Window corners are multiples of h by construction,
/// so every cell is itself a dyadic cube; Whitney cubes at levels <= g
/// are exact unions of cells.
template <int N>
struct GridSpec {
    Box<N> window{};
    int level = 0;
    std::array<std::int64_t, N> origin{};  // cell index of window.lo at `level`
    std::array<std::int64_t, N> dims{};

    static GridSpec make(const Domain<N>& d, int level) {
        if (level < d.window_level)
            throw std::invalid_argument("GridSpec: level coarser than the window lattice");
        GridSpec g;
        g.window = d.window;
        g.level = level;
        const double h = std::ldexp(1.0, -level);
        for (int i = 0; i < N; ++i) {
            g.origin[i] = static_cast<std::int64_t>(std::llround(d.window.lo[i] / h));
            g.dims[i] = static_cast<std::int64_t>(std::llround(d.window.hi[i] / h)) - g.origin[i];
            if (g.dims[i] <= 0) throw std::invalid_argument("GridSpec: empty window");
        }
        return g;
    }

    double h() const { return std::ldexp(1.0, -level); }

    std::size_t cell_count() const {
        std::size_t n = 1;
        for (int i = 0; i < N; ++i) n *= static_cast<std::size_t>(dims[i]);
        return n;
    }

    std::size_t flat(const std::array<std::int64_t, N>& c) const {
        std::size_t f = 0;
        for (int i = N - 1; i >= 0; --i) f = f * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(c[i]);
        return f;
    }

    std::array<std::int64_t, N> unflat(std::size_t f) const {
        std::array<std::int64_t, N> c{};
        for (int i = 0; i < N; ++i) {
            c[i] = static_cast<std::int64_t>(f % static_cast<std::size_t>(dims[i]));
            f /= static_cast<std::size_t>(dims[i]);
        }
        return c;
    }

    Vec<N> cell_center(const std::array<std::int64_t, N>& c) const {
        Vec<N> p;
        const double hh = h();
        for (int i = 0; i < N; ++i) p[i] = (static_cast<double>(origin[i] + c[i]) + 0.5) * hh;
        return p;
    }

    DyadicCube<N> cell_cube(const std::array<std::int64_t, N>& c) const {
        DyadicCube<N> q;
        q.level = level;
        for (int i = 0; i < N; ++i) q.index[i] = origin[i] + c[i];
        return q;
    }

    /// Cell range [a, b) covered by a dyadic cube of level <= grid level.
    void cube_cell_range(const DyadicCube<N>& q, std::array<std::int64_t, N>& a,
                         std::array<std::int64_t, N>& b) const {
        const int shift = level - q.level;
        for (int i = 0; i < N; ++i) {
            a[i] = (q.index[i] << shift) - origin[i];
            b[i] = ((q.index[i] + 1) << shift) - origin[i];
            a[i] = std::max<std::int64_t>(a[i], 0);
            b[i] = std::min<std::int64_t>(b[i], dims[i]);
        }
    }

    bool operator==(const GridSpec&) const = default;
};

/// Real values on inside-cell centers; cells outside the domain carry
/// value 0 and are excluded by the mask. Immutable by convention after
/// construction (evaluation code never mutates).
template <int N>
struct GridFunction {
    std::shared_ptr<const Domain<N>> domain;
    GridSpec<N> grid;
    std::vector<double> values;    // size cell_count(), 0 outside
    std::vector<std::uint8_t> in;  // inside-domain mask
    std::vector<double> bdist;     // dist_boundary at cell centers

    static GridFunction sample(std::shared_ptr<const Domain<N>> dom, int level,
                               const std::function<double(const Vec<N>&)>& f) {
        GridFunction u;
        u.domain = dom;
        u.grid = GridSpec<N>::make(*dom, level);
        const std::size_t M = u.grid.cell_count();
        u.values.assign(M, 0.0);
        u.in.assign(M, 0);
        u.bdist.assign(M, 0.0);
        for (std::size_t idx = 0; idx < M; ++idx) {
            const Vec<N> p = u.grid.cell_center(u.grid.unflat(idx));
            const double d = dom->dist_boundary(p);
            if (d > 0.0) {
                u.in[idx] = 1;
                u.bdist[idx] = d;
                u.values[idx] = f(p);
            }
        }
        return u;
    }

    static GridFunction zeros(std::shared_ptr<const Domain<N>> dom, int level) {
        return sample(dom, level, [](const Vec<N>&) { return 0.0; });
    }

    GridFunction like_with(std::vector<double> v) const {
        GridFunction u = *this;
        u.values = std::move(v);
        for (std::size_t i = 0; i < u.values.size(); ++i)
            if (!u.in[i]) u.values[i] = 0.0;
        return u;
    }

    std::size_t inside_count() const {
        return static_cast<std::size_t>(std::count(in.begin(), in.end(), std::uint8_t{1}));
    }

    /// Cells where the function does not vanish.
    std::vector<std::uint8_t> support_mask() const {
        std::vector<std::uint8_t> m(values.size(), 0);
        for (std::size_t i = 0; i < values.size(); ++i) m[i] = (in[i] && values[i] != 0.0) ? 1 : 0;
        return m;
    }

    double min_value() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < values.size(); ++i)
            if (in[i]) m = std::min(m, values[i]);
        return m;
    }

    double max_value() const {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < values.size(); ++i)
            if (in[i]) m = std::max(m, values[i]);
        return m;
    }

    /// Integral average over the inside cells.
    double mean() const {
        KahanSum s;
        std::size_t n = 0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (in[i]) {
                s.add(values[i]);
                ++n;
            }
        if (n == 0) throw std::runtime_error("GridFunction::mean: empty inside set");
        return s.value() / static_cast<double>(n);
    }

    /// Mean over the inside cells of a sub-box of the window (cells by center).
    double mean_over(const Box<N>& b) const {
        KahanSum s;
        std::size_t n = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!in[i]) continue;
            if (b.contains(grid.cell_center(grid.unflat(i)))) {
                s.add(values[i]);
                ++n;
            }
        }
        if (n == 0) throw std::runtime_error("GridFunction::mean_over: no cells in box");
        return s.value() / static_cast<double>(n);
    }

    void write_binary(const std::string& path) const;
    static GridFunction read_binary(std::shared_ptr<const Domain<N>> dom, const std::string& path);
    void write_csv(const std::string& path) const;
    nlohmann::json meta_json() const;
};

template <int N>
void GridFunction<N>::write_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_binary: cannot open " + path);
    const char magic[4] = {'F', 'R', 'G', 'F'};
    os.write(magic, 4);
    const std::int32_t n = N, lvl = grid.level;
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&lvl), 4);
    os.write(reinterpret_cast<const char*>(grid.window.lo.data()), 8 * N);
    os.write(reinterpret_cast<const char*>(grid.window.hi.data()), 8 * N);
    os.write(reinterpret_cast<const char*>(grid.dims.data()), 8 * N);
    os.write(reinterpret_cast<const char*>(values.data()), 8 * static_cast<std::streamsize>(values.size()));
    os.write(reinterpret_cast<const char*>(in.data()), static_cast<std::streamsize>(in.size()));
    // JSON sidecar with the same header
    std::ofstream js(path + ".json");
    js << meta_json().dump(2) << "\n";
}

template <int N>
GridFunction<N> GridFunction<N>::read_binary(std::shared_ptr<const Domain<N>> dom, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_binary: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::string(magic, 4) != "FRGF") throw std::runtime_error("read_binary: bad magic");
    std::int32_t n = 0, lvl = 0;
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&lvl), 4);
    if (n != N) throw std::runtime_error("read_binary: dimension mismatch");
    GridFunction u = GridFunction::zeros(dom, lvl);
    Box<N> win;
    std::array<std::int64_t, N> dims;
    is.read(reinterpret_cast<char*>(win.lo.data()), 8 * N);
    is.read(reinterpret_cast<char*>(win.hi.data()), 8 * N);
    is.read(reinterpret_cast<char*>(dims.data()), 8 * N);
    if (dims != u.grid.dims) throw std::runtime_error("read_binary: window mismatch with domain");
    is.read(reinterpret_cast<char*>(u.values.data()), 8 * static_cast<std::streamsize>(u.values.size()));
    std::vector<std::uint8_t> mask(u.in.size());
    is.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
    if (mask != u.in) throw std::runtime_error("read_binary: inside mask mismatch with domain");
    return u;
}

template <int N>
void GridFunction<N>::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    os << (N == 2 ? "x0,x1,value,inside\n" : "x0,x1,x2,value,inside\n");
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Vec<N> p = grid.cell_center(grid.unflat(i));
        for (int d = 0; d < N; ++d) {
            std::snprintf(buf, sizeof buf, "%.12g,", p[d]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%d\n", values[i], int(in[i]));
        os << buf;
    }
}

template <int N>
nlohmann::json GridFunction<N>::meta_json() const {
    nlohmann::json j;
    j["dim"] = N;
    j["level"] = grid.level;
    j["h"] = grid.h();
    j["dims"] = grid.dims;
    j["window"] = {{"lo", grid.window.lo}, {"hi", grid.window.hi}};
    j["domain"] = domain->to_json();
    return j;
}

/// Lattice cells marked as a compact set K; every cell must sit
/// strictly inside the domain.
template <int N>
struct CompactSet {
    GridSpec<N> grid;
    std::vector<std::size_t> cells;  // flat ids, sorted

    static CompactSet from_predicate(const GridFunction<N>& u, const std::function<bool(const Vec<N>&)>& pred) {
        CompactSet k;
        k.grid = u.grid;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            if (!u.in[i]) continue;
            const Vec<N> p = u.grid.cell_center(u.grid.unflat(i));
            if (pred(p)) {
                // strict interiority: the closed cell must avoid the boundary
                if (u.bdist[i] <= 0.5 * u.grid.h() * std::sqrt(double(N)))
                    throw std::invalid_argument("CompactSet: cell not strictly inside the domain");
                k.cells.push_back(i);
            }
        }
        return k;
    }
};

}  // namespace fraclab
