#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "subsel/core.hpp"

namespace subsel {

enum class CubeFamily { H, Hplus };

// Dyadic hyper-cube, identified by family, scale q >= 1 and integer anchor a.
// Family H:      prod_j [2^-q (2 a_j - 1), 2^-q (2 a_j + 3)), half-open.
// Family Hplus:  prod_j [2^-q a_j, 2^-q (a_j + 1)], closed.
struct HyperCube {
    CubeFamily family;
    int q;
    std::vector<std::int64_t> a;

    int dim() const { return static_cast<int>(a.size()); }

    double lower(int j) const {
        const double scale = std::ldexp(1.0, -q);
        return family == CubeFamily::H ? scale * static_cast<double>(2 * a[j] - 1)
                                       : scale * static_cast<double>(a[j]);
    }
    double upper(int j) const {
        const double scale = std::ldexp(1.0, -q);
        return family == CubeFamily::H ? scale * static_cast<double>(2 * a[j] + 3)
                                       : scale * static_cast<double>(a[j] + 1);
    }

    // Closure as a compact rectangle; identical to the cube for Hplus.
    Rectangle closure() const {
        std::vector<double> lo(a.size()), hi(a.size());
        for (int j = 0; j < dim(); ++j) {
            lo[j] = lower(j);
            hi[j] = upper(j);
        }
        return Rectangle(std::move(lo), std::move(hi));
    }

    bool operator==(const HyperCube& o) const {
        return family == o.family && q == o.q && a == o.a;
    }
    // Canonical order: by (q, a) lexicographically within one family.
    bool operator<(const HyperCube& o) const {
        if (q != o.q) return q < o.q;
        return a < o.a;
    }
};

inline double cube_diam(const HyperCube& c) {
    return c.family == CubeFamily::H ? std::ldexp(1.0, 2 - c.q)
                                     : std::ldexp(1.0, -c.q);
}

// Membership with the family's own open/closed convention.
inline bool cube_contains(const HyperCube& c, std::span<const double> x) {
    if (static_cast<int>(x.size()) != c.dim())
        throw std::invalid_argument("cube/point dimension mismatch");
    for (int j = 0; j < c.dim(); ++j) {
        const double lo = c.lower(j), hi = c.upper(j);
        if (c.family == CubeFamily::H) {
            if (x[j] < lo || x[j] >= hi) return false;
        } else {
            if (x[j] < lo || x[j] > hi) return false;
        }
    }
    return true;
}

inline bool cube_closure_contains(const HyperCube& c, std::span<const double> x) {
    for (int j = 0; j < c.dim(); ++j)
        if (x[j] < c.lower(j) || x[j] > c.upper(j)) return false;
    return true;
}

namespace detail {

// Largest q >= 0 with 2^q <= v, i.e. floor(log2 v) for v >= 1.
inline int floor_log2(std::uint64_t v) {
    int k = 0;
    while ((v >> 1) != 0) {
        v >>= 1;
        ++k;
    }
    return k;
}

// Anchor values a such that the scale-q cube anchored at a contains coordinate
// t = 2^q x in the given family. H windows always hold exactly two integers,
// Hplus windows one (two when t is itself an integer).
inline void anchors_for_coord(CubeFamily family, double t,
                              std::vector<std::int64_t>& out) {
    out.clear();
    const double center = family == CubeFamily::H ? (t - 1.0) / 2.0 : t;
    const auto lo = static_cast<std::int64_t>(std::floor(center)) - 2;
    for (std::int64_t a = lo; a <= lo + 4; ++a) {
        const bool inside =
            family == CubeFamily::H
                ? (static_cast<double>(2 * a - 1) <= t && t < static_cast<double>(2 * a + 3))
                : (static_cast<double>(a) <= t && t <= static_cast<double>(a + 1));
        if (inside) out.push_back(a);
    }
}

// Visits every (cube, containing point) incidence of the data-dependent family
// exactly once per point.
template <typename Visitor>
void for_each_cube_incidence(const Dataset& data, CubeFamily family, Visitor&& visit) {
    const std::uint64_t n = data.n();
    const int d = data.dim();
    int q_max;
    if (family == CubeFamily::H) {
        q_max = floor_log2(4 * n);  // diam 2^{2-q} >= 1/n
    } else {
        q_max = floor_log2(n);  // diam 2^{-q} >= 1/n
    }

    std::vector<std::vector<std::int64_t>> per_axis(d);
    std::vector<std::size_t> idx(d);
    HyperCube cube;
    cube.family = family;
    cube.a.resize(d);
    for (int q = 1; q <= q_max; ++q) {
        cube.q = q;
        const double scale = std::ldexp(1.0, q);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = data.x(i);
            for (int j = 0; j < d; ++j)
                anchors_for_coord(family, scale * x[j], per_axis[j]);
            // Cross product of per-axis anchors.
            std::fill(idx.begin(), idx.end(), 0);
            while (true) {
                for (int j = 0; j < d; ++j) cube.a[j] = per_axis[j][idx[j]];
                visit(cube, i);
                int j = d - 1;
                while (j >= 0 && ++idx[j] == per_axis[j].size()) idx[j--] = 0;
                if (j < 0) break;
            }
        }
    }
}

} // namespace detail

// All family members containing at least one data point with diam_inf >= 1/n,
// deduplicated and sorted by (q, a).
inline std::vector<HyperCube> enumerate_cubes(const Dataset& data, CubeFamily family) {
    if (data.n() < 1) throw std::invalid_argument("enumerate_cubes requires n >= 1");
    std::vector<HyperCube> cubes;
    detail::for_each_cube_incidence(
        data, family, [&](const HyperCube& c, std::size_t) { cubes.push_back(c); });
    std::sort(cubes.begin(), cubes.end());
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    return cubes;
}

namespace detail {

// Sorted distinct face coordinates per axis, clipped to [lo, hi] and always
// containing the interval ends.
inline std::vector<double> face_grid(double lo, double hi, int axis,
                                     const std::vector<HyperCube>& cubes) {
    std::vector<double> g{lo, hi};
    for (const auto& c : cubes) {
        const double a = c.lower(axis), b = c.upper(axis);
        if (a > lo && a < hi) g.push_back(a);
        if (b > lo && b < hi) g.push_back(b);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

inline bool union_closure_contains(const std::vector<HyperCube>& cubes,
                                   std::span<const double> x) {
    for (const auto& c : cubes)
        if (cube_closure_contains(c, x)) return true;
    return false;
}

} // namespace detail

// Whether the closed rectangle r lies in the topological closure of the cube
// union. The induced grid over r is tested through one witness per cell: every
// cell lies entirely inside or outside each closed cube, so midpoints decide
// containment exactly.
inline bool rect_in_cube_union(const Rectangle& r, const std::vector<HyperCube>& cubes) {
    if (r.is_empty()) throw std::invalid_argument("rect_in_cube_union requires non-empty rectangle");
    if (cubes.empty()) throw std::invalid_argument("rect_in_cube_union requires cubes");
    const int d = r.dim();
    for (const auto& c : cubes)
        if (c.dim() != d) throw std::invalid_argument("cube/rectangle dimension mismatch");

    std::vector<std::vector<double>> witness(d);
    for (int j = 0; j < d; ++j) {
        const auto g = detail::face_grid(r.lower()[j], r.upper()[j], j, cubes);
        if (g.size() == 1) {
            witness[j] = {g[0]};  // degenerate axis
        } else {
            witness[j].reserve(g.size() - 1);
            for (std::size_t k = 0; k + 1 < g.size(); ++k)
                witness[j].push_back(0.5 * (g[k] + g[k + 1]));
        }
    }

    std::vector<std::size_t> idx(d, 0);
    std::vector<double> pt(d);
    while (true) {
        for (int j = 0; j < d; ++j) pt[j] = witness[j][idx[j]];
        if (!detail::union_closure_contains(cubes, pt)) return false;
        int j = d - 1;
        while (j >= 0 && ++idx[j] == witness[j].size()) idx[j--] = 0;
        if (j < 0) break;
    }
    return true;
}

} // namespace subsel
