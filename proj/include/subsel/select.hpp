#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "subsel/core.hpp"
#include "subsel/hypercube.hpp"
#include "subsel/local_poly.hpp"
#include "subsel/stats.hpp"

namespace subsel {

struct SelectionResult {
    std::vector<HyperCube> selected_cubes;  // B_(1..ell_alpha) in Holm order
    std::size_t ell_alpha = 0;
    Rectangle a_hat;  // empty when nothing is selected
    double empirical_measure = 0.0;
    std::vector<PValueRecord> p_records;  // all candidate cubes, canonical order
};

// Holm step-down with the max-index cutoff: sort ascending by p (ties keep the
// canonical cube order), gate on L * p_(1) <= alpha, then
// ell_alpha = max{ l : (L + 1 - l) * p_(l) <= alpha }.
inline std::pair<std::size_t, std::vector<HyperCube>> holm_cutoff(
    std::span<const PValueRecord> ps, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("holm_cutoff requires alpha in (0,1)");
    const std::size_t L = ps.size();
    if (L == 0) return {0, {}};

    std::vector<std::size_t> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return ps[i].p < ps[j].p;
    });

    if (static_cast<double>(L) * ps[order[0]].p > alpha) return {0, {}};
    std::size_t ell = 0;
    for (std::size_t l = 1; l <= L; ++l) {
        const double factor = static_cast<double>(L + 1 - l);
        if (factor * ps[order[l - 1]].p <= alpha) ell = l;
    }
    std::vector<HyperCube> selected;
    selected.reserve(ell);
    for (std::size_t l = 0; l < ell; ++l) selected.push_back(ps[order[l]].cube);
    return {ell, selected};
}

namespace detail {

// Slot decomposition of one axis: grid coordinates g_0 < ... < g_{G-1} give
// 2G-1 slots alternating degenerate coordinates (even index 2k) and open cells
// (odd index 2k+1). Every cube face lies on a grid coordinate, so each slot is
// entirely inside or outside each closed cube.
struct AxisGrid {
    std::vector<double> coords;

    std::size_t n_slots() const { return 2 * coords.size() - 1; }

    // Slot of a point coordinate, or npos when outside the grid hull.
    std::size_t slot_of(double x) const {
        if (x < coords.front() || x > coords.back()) return static_cast<std::size_t>(-1);
        const auto it = std::lower_bound(coords.begin(), coords.end(), x);
        const auto k = static_cast<std::size_t>(it - coords.begin());
        if (*it == x) return 2 * k;
        return 2 * k - 1;
    }

    std::size_t index_of(double coord) const {
        const auto it = std::lower_bound(coords.begin(), coords.end(), coord);
        return static_cast<std::size_t>(it - coords.begin());
    }
};

inline std::vector<AxisGrid> build_grids(const std::vector<HyperCube>& cubes, int d) {
    std::vector<AxisGrid> grids(d);
    for (int j = 0; j < d; ++j) {
        auto& g = grids[j].coords;
        g.reserve(2 * cubes.size());
        for (const auto& c : cubes) {
            g.push_back(c.lower(j));
            g.push_back(c.upper(j));
        }
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    return grids;
}

// Dense tensors over slot tuples with prefix sums for O(2^d) range queries.
class SlotTensor {
public:
    SlotTensor(const std::vector<AxisGrid>& grids) {
        dims_.reserve(grids.size());
        for (const auto& g : grids) dims_.push_back(g.n_slots());
        strides_.assign(dims_.size(), 1);
        for (int j = static_cast<int>(dims_.size()) - 2; j >= 0; --j)
            strides_[j] = strides_[j + 1] * dims_[j + 1];
        data_.assign(strides_.empty() ? 0 : strides_[0] * dims_[0], 0);
    }

    std::size_t size() const { return data_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }

    std::int64_t& at(const std::vector<std::size_t>& idx) {
        std::size_t off = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) off += idx[j] * strides_[j];
        return data_[off];
    }

    // In-place inclusive prefix sums along every axis.
    void build_prefix() {
        for (std::size_t j = 0; j < dims_.size(); ++j) {
            for (std::size_t off = 0; off < data_.size(); ++off) {
                const std::size_t coord = (off / strides_[j]) % dims_[j];
                if (coord > 0) data_[off] += data_[off - strides_[j]];
            }
        }
    }

    // Sum over the slot box [lo, hi] (inclusive) after build_prefix.
    std::int64_t box_sum(const std::vector<std::size_t>& lo,
                         const std::vector<std::size_t>& hi) const {
        const auto d = dims_.size();
        std::int64_t total = 0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            std::size_t off = 0;
            bool valid = true;
            int bits = 0;
            for (std::size_t j = 0; j < d; ++j) {
                if (mask & (std::size_t{1} << j)) {
                    ++bits;
                    if (lo[j] == 0) {
                        valid = false;
                        break;
                    }
                    off += (lo[j] - 1) * strides_[j];
                } else {
                    off += hi[j] * strides_[j];
                }
            }
            if (!valid) continue;
            total += (bits % 2 == 0 ? 1 : -1) * data_[off];
        }
        return total;
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::vector<std::int64_t> data_;
};

struct RectCandidate {
    std::int64_t count = -1;
    std::int64_t cells = 0;
    std::vector<double> corner;  // (lower..., upper...)

    bool better_than(const RectCandidate& o) const {
        if (o.count < 0) return true;
        if (count != o.count) return count > o.count;
        if (cells != o.cells) return cells < o.cells;
        return corner < o.corner;
    }
};

} // namespace detail

struct MaxRectOptions {
    // The exact search enumerates every grid-aligned rectangle; the heuristic
    // is a deterministic coordinate ascent and may return a sub-optimal
    // rectangle for d >= 2.
    bool exact = true;
};

// Rectangle of maximal empirical measure inside the closed union of the cubes.
// Faces are restricted to the grid of cube face coordinates; any feasible
// rectangle expands face-by-face to this grid without losing points or leaving
// the union. Ties break to fewest spanned grid cells, then the smallest
// (lower, upper) vector. Returns an empty rectangle when no data point lies in
// the union.
inline std::pair<Rectangle, double> max_rect_in_union(
    const Dataset& data, const std::vector<HyperCube>& cubes,
    const MaxRectOptions& opts = {}) {
    if (cubes.empty())
        throw std::invalid_argument("max_rect_in_union requires at least one cube");
    const int d = data.dim();
    for (const auto& c : cubes)
        if (c.dim() != d) throw std::invalid_argument("cube/dataset dimension mismatch");

    const auto grids = detail::build_grids(cubes, d);

    // Covered slots via a d-dimensional difference array: each cube stamps its
    // slot box with 2^d signed corner increments; a prefix sum then yields the
    // number of cubes covering each slot.
    detail::SlotTensor uncovered(grids);
    {
        detail::SlotTensor diff(grids);
        std::vector<std::size_t> lo(d), hi(d), corner(d);
        for (const auto& c : cubes) {
            for (int j = 0; j < d; ++j) {
                lo[j] = 2 * grids[j].index_of(c.lower(j));
                hi[j] = 2 * grids[j].index_of(c.upper(j));
            }
            for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
                bool in_range = true;
                int bits = 0;
                for (int j = 0; j < d; ++j) {
                    if (mask & (std::size_t{1} << j)) {
                        ++bits;
                        corner[j] = hi[j] + 1;
                        if (corner[j] >= diff.dims()[j]) {
                            in_range = false;  // decrement beyond the edge is a no-op
                            break;
                        }
                    } else {
                        corner[j] = lo[j];
                    }
                }
                if (in_range) diff.at(corner) += (bits % 2 == 0 ? 1 : -1);
            }
        }
        diff.build_prefix();
        std::vector<std::size_t> it(d, 0);
        while (true) {
            uncovered.at(it) = diff.at(it) > 0 ? 0 : 1;
            int j = d - 1;
            while (j >= 0 && ++it[j] == uncovered.dims()[j]) it[j] = 0, --j;
            if (j < 0) break;
        }
    }
    uncovered.build_prefix();

    // Point histogram over slots.
    detail::SlotTensor points(grids);
    {
        std::vector<std::size_t> idx(d);
        for (std::size_t i = 0; i < data.n(); ++i) {
            const auto x = data.x(i);
            bool in_hull = true;
            for (int j = 0; j < d; ++j) {
                idx[j] = grids[j].slot_of(x[j]);
                if (idx[j] == static_cast<std::size_t>(-1)) {
                    in_hull = false;
                    break;
                }
            }
            if (in_hull) points.at(idx) += 1;
        }
    }
    points.build_prefix();

    auto evaluate = [&](const std::vector<std::size_t>& gi,
                        const std::vector<std::size_t>& gj) {
        std::vector<std::size_t> slo(d), shi(d);
        for (int j = 0; j < d; ++j) {
            slo[j] = 2 * gi[j];
            shi[j] = 2 * gj[j];
        }
        detail::RectCandidate cand;
        if (uncovered.box_sum(slo, shi) != 0) return cand;  // infeasible
        cand.count = points.box_sum(slo, shi);
        cand.cells = 1;
        for (int j = 0; j < d; ++j)
            cand.cells *= static_cast<std::int64_t>(gj[j] - gi[j]);
        cand.corner.resize(2 * d);
        for (int j = 0; j < d; ++j) {
            cand.corner[j] = grids[j].coords[gi[j]];
            cand.corner[d + j] = grids[j].coords[gj[j]];
        }
        return cand;
    };

    detail::RectCandidate best;
    if (d == 1 && opts.exact) {
        // Maximal runs of covered slots; within a run the optimum is the
        // tightest grid interval holding every point of the run.
        const auto& g = grids[0];
        const std::size_t n_slots = g.n_slots();
        std::vector<std::size_t> lo1(1), hi1(1);
        std::size_t s = 0;
        while (s < n_slots) {
            lo1[0] = s;
            hi1[0] = s;
            if (uncovered.box_sum(lo1, hi1) != 0) {
                ++s;
                continue;
            }
            std::size_t e = s;
            while (e + 1 < n_slots) {
                lo1[0] = hi1[0] = e + 1;
                if (uncovered.box_sum(lo1, hi1) != 0) break;
                ++e;
            }
            // Run spans slots [s, e]; clip to grid-coordinate (even) ends.
            std::size_t lo_slot = s % 2 == 0 ? s : s + 1;
            std::size_t hi_slot = e % 2 == 0 ? e : e - 1;
            if (lo_slot <= hi_slot) {
                lo1[0] = lo_slot;
                hi1[0] = hi_slot;
                if (points.box_sum(lo1, hi1) > 0) {
                    // Tighten both ends while no point is lost.
                    const std::int64_t run_count = points.box_sum(lo1, hi1);
                    std::size_t a = lo_slot, b = hi_slot;
                    while (a + 2 <= b) {
                        lo1[0] = a + 2;
                        hi1[0] = b;
                        if (points.box_sum(lo1, hi1) == run_count) a += 2;
                        else break;
                    }
                    while (b >= a + 2) {
                        lo1[0] = a;
                        hi1[0] = b - 2;
                        if (points.box_sum(lo1, hi1) == run_count) b -= 2;
                        else break;
                    }
                    const auto cand = evaluate({a / 2}, {b / 2});
                    if (cand.better_than(best)) best = cand;
                } else {
                    const auto cand = evaluate({lo_slot / 2}, {hi_slot / 2});
                    if (cand.better_than(best)) best = cand;
                }
            }
            s = e + 1;
        }
    } else if (opts.exact) {
        // Exhaustive enumeration over grid rectangles, O(prod G_j^2).
        std::vector<std::size_t> gi(d, 0), gj(d, 0);
        const auto advance = [&]() {
            int j = d - 1;
            while (j >= 0) {
                if (gj[j] + 1 < grids[j].coords.size()) {
                    ++gj[j];
                    return true;
                }
                if (gi[j] + 1 < grids[j].coords.size()) {
                    ++gi[j];
                    gj[j] = gi[j];
                    return true;
                }
                gi[j] = gj[j] = 0;
                --j;
            }
            return false;
        };
        while (true) {
            const auto cand = evaluate(gi, gj);
            if (cand.better_than(best)) best = cand;
            if (!advance()) break;
        }
    } else {
        // Deterministic coordinate ascent from each cube's own span; labeled
        // non-exact for d >= 2.
        std::vector<std::size_t> gi(d), gj(d);
        for (const auto& c : cubes) {
            for (int j = 0; j < d; ++j) {
                gi[j] = grids[j].index_of(c.lower(j));
                gj[j] = grids[j].index_of(c.upper(j));
            }
            auto cur = evaluate(gi, gj);
            if (cur.count < 0) continue;
            bool improved = true;
            while (improved) {
                improved = false;
                for (int j = 0; j < d; ++j) {
                    if (gi[j] > 0) {
                        --gi[j];
                        auto next = evaluate(gi, gj);
                        if (next.count > cur.count) {
                            cur = next;
                            improved = true;
                            continue;
                        }
                        ++gi[j];
                    }
                    if (gj[j] + 1 < grids[j].coords.size()) {
                        ++gj[j];
                        auto next = evaluate(gi, gj);
                        if (next.count > cur.count) {
                            cur = next;
                            improved = true;
                            continue;
                        }
                        --gj[j];
                    }
                }
            }
            if (cur.better_than(best)) best = cur;
        }
    }

    if (best.count <= 0) return {Rectangle::empty(), 0.0};
    std::vector<double> lo(best.corner.begin(), best.corner.begin() + d);
    std::vector<double> hi(best.corner.begin() + d, best.corner.end());
    return {Rectangle(std::move(lo), std::move(hi)),
            static_cast<double>(best.count) / static_cast<double>(data.n())};
}

namespace detail {

struct CubeAccum {
    std::size_t m = 0;
    double sum_y = 0.0;
};

} // namespace detail

// Algorithm: enumerate the data-dependent cube family, attach the variant's
// p-value to every cube, run Holm's step-down, and maximize the empirical
// measure over rectangles inside the selected union.
inline SelectionResult oss_select(const Dataset& data, const SelectionConfig& cfg,
                                  const MaxRectOptions& rect_opts = {}) {
    if (data.n() < 1) throw std::invalid_argument("oss_select requires n >= 1");
    const CubeFamily family =
        cfg.variant == Variant::FirstOrder ? CubeFamily::H : CubeFamily::Hplus;

    // One pass collects each cube with its in-cube count and response sum; the
    // map key order is the canonical (q, a) enumeration order.
    std::map<HyperCube, detail::CubeAccum> accum;
    detail::for_each_cube_incidence(data, family,
                                    [&](const HyperCube& c, std::size_t i) {
                                        auto& cell = accum[c];
                                        ++cell.m;
                                        cell.sum_y += data.y(i);
                                    });

    SelectionResult result;
    result.p_records.reserve(accum.size());
    for (const auto& [cube, cell] : accum) {
        const double eta_hat =
            cell.m > 0 ? cell.sum_y / static_cast<double>(cell.m) : 0.5;
        double p;
        if (cfg.variant == Variant::FirstOrder) {
            p = p_value_from_box_stats(cell.m, eta_hat, cube_diam(cube), cfg);
        } else {
            std::vector<double> center(cube.dim());
            for (int j = 0; j < cube.dim(); ++j)
                center[j] = 0.5 * (cube.lower(j) + cube.upper(j));
            p = p_value_local(data, center, 0.5 * cube_diam(cube), cfg);
        }
        result.p_records.push_back({cube, p, cell.m, eta_hat});
    }

    auto [ell, selected] = holm_cutoff(result.p_records, cfg.alpha);
    result.ell_alpha = ell;
    result.selected_cubes = std::move(selected);
    if (ell == 0) {
        result.a_hat = Rectangle::empty();
        result.empirical_measure = 0.0;
        return result;
    }
    auto [rect, measure] = max_rect_in_union(data, result.selected_cubes, rect_opts);
    result.a_hat = std::move(rect);
    result.empirical_measure = measure;
    return result;
}

} // namespace subsel
