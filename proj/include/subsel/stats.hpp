#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <tuple>

#include "subsel/core.hpp"
#include "subsel/hypercube.hpp"

namespace subsel {

// p-values below this are reported as the floor itself; still conclusive at
// any practical alpha, and keeps the record strictly positive.
inline constexpr double kPValueFloor = 1e-300;

// Kullback-Leibler divergence between Bern(a) and Bern(b), with the closed-form
// limits kl(0,b) = -log(1-b) and kl(1,b) = -log b.
inline double kl_bernoulli(double a, double b) {
    if (!(b > 0.0 && b < 1.0))
        throw std::invalid_argument("kl_bernoulli requires b in (0,1)");
    if (!(a >= 0.0 && a <= 1.0))
        throw std::invalid_argument("kl_bernoulli requires a in [0,1]");
    if (a == 0.0) return -std::log1p(-b);
    if (a == 1.0) return -std::log(b);
    return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

struct BoxStats {
    double mu_hat;   // m / n
    double eta_hat;  // mean response over points in the box, 1/2 if empty
    std::size_t m;   // point count in the box
};

inline BoxStats box_stats(const Dataset& data, const HyperCube& c) {
    if (c.dim() != data.dim())
        throw std::invalid_argument("cube/dataset dimension mismatch");
    std::size_t m = 0;
    double sum_y = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (cube_contains(c, data.x(i))) {
            ++m;
            sum_y += data.y(i);
        }
    }
    const double n = static_cast<double>(data.n());
    return {static_cast<double>(m) / n, m > 0 ? sum_y / static_cast<double>(m) : 0.5, m};
}

struct PValueRecord {
    HyperCube cube;
    double p;        // in (0,1]
    std::size_t m;   // point count in cube
    double eta_hat;  // 1/2 when m == 0
};

// Tail bound p-value for "regression uniformly above tau on a box of the given
// diameter", from the box count m and box mean eta_hat. Computed in log space;
// when tau + c_s * diam^beta >= 1 the null can never be rejected, so p = 1.
inline double p_value_from_box_stats(std::size_t m, double eta_hat, double diam,
                                     const SelectionConfig& cfg) {
    const double t = cfg.tau + cfg.c_s * std::pow(diam, cfg.beta);
    if (m == 0 || t >= 1.0 || eta_hat <= t) return 1.0;
    const double log_p = -static_cast<double>(m) * kl_bernoulli(eta_hat, t);
    return std::max(std::exp(log_p), kPValueFloor);
}

inline PValueRecord p_value_first_order(const Dataset& data, const HyperCube& c,
                                        const SelectionConfig& cfg) {
    if (cfg.variant != Variant::FirstOrder)
        throw std::invalid_argument("p_value_first_order requires the first-order variant");
    const BoxStats bs = box_stats(data, c);
    return {c, p_value_from_box_stats(bs.m, bs.eta_hat, cube_diam(c), cfg), bs.m, bs.eta_hat};
}

} // namespace subsel
