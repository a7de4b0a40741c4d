#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "subsel/core.hpp"
#include "subsel/rng.hpp"

namespace subsel {

// Smooth bump used by the lower-bound regression functions:
// h(z) = exp(-z^2 / (1 - z^2)) on [0,1) with h(1) = 0.
inline double bump_h(double z) {
    if (!(z >= 0.0 && z <= 1.0))
        throw std::invalid_argument("bump_h requires z in [0,1]");
    if (z == 1.0) return 0.0;
    return std::exp(-z * z / (1.0 - z * z));
}

// Level where the bump crosses 1/2; the super-level boundaries of the
// lower-bound regression functions sit at radius * (1 + this).
inline double bump_half_crossing() {
    static const double v = std::sqrt(std::log(2.0) / (1.0 + std::log(2.0)));
    return v;
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// CDF of the sup-norm radius under the Example-3 marginal: F(y) = mu_kappa of
// the closed ball of radius y.
inline double radial_cdf_example3(double kappa, double y, int d) {
    if (!(kappa > 0.0)) throw std::invalid_argument("radial_cdf_example3 requires kappa > 0");
    if (d < 1) throw std::invalid_argument("radial_cdf_example3 requires d >= 1");
    if (y <= 0.0) return 0.0;
    const double yd = std::pow(y, d);
    if (kappa == 1.0) return -std::expm1(-yd);
    const double base = 1.0 + (1.0 - kappa) * yd;
    if (base <= 0.0) return 1.0;  // beyond the bounded support for kappa > 1
    return 1.0 - std::pow(base, -kappa / (1.0 - kappa));
}

struct Example1Params {
    double nu;
    double tau;  // threshold the ground truth is reported at
};

struct Example2Params {
    double epsilon;
    double delta;
    double gamma;
    double c;
    double tau;
    int d;
};

struct Example3Params {
    double kappa;
    double gamma;
    double tau;
    double c_s;
    int d;
};

struct FanoParams {
    int L;
    double r;
    double w;
    double s;
    double theta;
    int ell;  // index in 1..L of the favoured region
    double tau;
    int d;
    double epsilon0 = 0.2;
};

struct ParametricParams {
    double t;
    double theta;
    double s;
    double zeta;
    int ell;  // -1 or +1
    double tau;
    int d;
    double epsilon0 = 0.2;
};

struct GeneratorSpec {
    std::variant<Example1Params, Example2Params, Example3Params, FanoParams,
                 ParametricParams>
        kind;
    std::uint64_t seed = 0;
};

// Analytic ground truth attached to a generator: the regression function, the
// oracle measure of the best admissible rectangle, an exact super-level
// membership test for rectangles (empty rectangles are vacuously inside), and,
// where available, the exact marginal measure of a rectangle.
struct GroundTruth {
    double tau;
    std::function<double(std::span<const double>)> eta;
    std::optional<double> m_tau;
    std::function<bool(const Rectangle&)> superlevel_contains;
    std::function<double(const Rectangle&)> rect_measure;  // may be empty
};

namespace detail {

inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Volume of the intersection of a rectangle with a closed sup-norm box.
inline double rect_box_overlap(const Rectangle& rect, std::span<const double> center,
                               double radius) {
    double vol = 1.0;
    for (int j = 0; j < rect.dim(); ++j) {
        const double lo = std::max(rect.lower()[j], center[j] - radius);
        const double hi = std::min(rect.upper()[j], center[j] + radius);
        if (hi <= lo) return 0.0;
        vol *= hi - lo;
    }
    return vol;
}

inline double rect_box_overlap(const Rectangle& rect, std::span<const double> lo_box,
                               std::span<const double> hi_box) {
    double vol = 1.0;
    for (int j = 0; j < rect.dim(); ++j) {
        const double lo = std::max(rect.lower()[j], lo_box[j]);
        const double hi = std::min(rect.upper()[j], hi_box[j]);
        if (hi <= lo) return 0.0;
        vol *= hi - lo;
    }
    return vol;
}

// Range of squared Euclidean distance from a point z to a rectangle.
inline std::pair<double, double> rect_dist2_range(const Rectangle& rect,
                                                  std::span<const double> z) {
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < rect.dim(); ++j) {
        const double a = rect.lower()[j] - z[j];
        const double b = rect.upper()[j] - z[j];
        const double away = std::max(std::abs(a), std::abs(b));
        hi += away * away;
        if (a > 0.0) lo += a * a;
        else if (b < 0.0) lo += b * b;
    }
    return {lo, hi};
}

inline void validate(const Example1Params& p) {
    require(p.nu > 0.0, "example1 requires nu > 0");
    require(p.tau > 0.0 && p.tau < 1.0, "example1 requires tau in (0,1)");
}

inline void validate(const Example2Params& p) {
    require(p.epsilon > 0.0 && p.epsilon <= 1.0, "example2 requires epsilon in (0,1]");
    require(p.delta > 0.0 && p.delta <= 1.0, "example2 requires delta in (0,1]");
    require(p.gamma > 0.0, "example2 requires gamma > 0");
    require(p.c > 0.0 && p.c < 1.0, "example2 requires c in (0,1)");
    require(p.tau > 0.0 && p.tau < 1.0, "example2 requires tau in (0,1)");
    require(p.d >= 1, "example2 requires d >= 1");
}

inline void validate(const Example3Params& p) {
    require(p.kappa > 0.0, "example3 requires kappa > 0");
    require(p.gamma > 0.0, "example3 requires gamma > 0");
    require(p.tau > 0.0 && p.tau < 1.0, "example3 requires tau in (0,1)");
    require(p.c_s > 0.0, "example3 requires c_s > 0");
    require(p.d >= 1, "example3 requires d >= 1");
}

inline void validate(const FanoParams& p) {
    require(p.d >= 1, "fano requires d >= 1");
    require(p.L >= 1, "fano requires L >= 1");
    require(p.ell >= 1 && p.ell <= p.L, "fano requires ell in 1..L");
    require(p.r > 0.0, "fano requires r > 0");
    require(p.s > 0.0 && p.s <= std::min(1.0, p.r / 2.0),
            "fano requires s in (0, min(1, r/2)]");
    const double w_cap = std::min(std::pow(2.0 * p.r, -p.d), 1.0);
    require(p.w > 0.0 && p.w < w_cap, "fano requires w in (0, (2r)^-d ^ 1)");
    require(p.epsilon0 > 0.0 && p.epsilon0 < 0.5, "fano requires epsilon0 in (0, 1/2)");
    require(p.theta > 0.0 && p.theta <= p.epsilon0 / 2.0,
            "fano requires theta in (0, epsilon0/2]");
    require(p.tau > p.epsilon0 && p.tau < 1.0 - p.epsilon0,
            "fano requires tau in (epsilon0, 1-epsilon0)");
}

inline void validate(const ParametricParams& p) {
    require(p.d >= 1, "parametric requires d >= 1");
    require(p.t >= 1.0, "parametric requires t >= 1");
    require(p.s > 0.0 && p.s <= 1.0, "parametric requires s in (0,1]");
    require(p.ell == -1 || p.ell == 1, "parametric requires ell in {-1, 1}");
    const double sd = std::pow(p.s, p.d);
    const double td = std::pow(2.0 * p.t, p.d);
    require(p.zeta >= 0.0 && p.zeta <= sd / (2.0 * (td + 2.0 * sd)),
            "parametric requires zeta in [0, s^d / (2 ((2t)^d + 2 s^d))]");
    require(p.epsilon0 > 0.0 && p.epsilon0 <= 0.5,
            "parametric requires epsilon0 in (0, 1/2]");
    require(p.theta > 0.0 && p.theta <= p.epsilon0 / 2.0,
            "parametric requires theta in (0, epsilon0/2]");
    require(p.tau > p.epsilon0 && p.tau < 1.0 - p.epsilon0,
            "parametric requires tau in (epsilon0, 1-epsilon0)");
}

inline double fano_r_sharp(const FanoParams& p) {
    const double sqrt_d = std::sqrt(static_cast<double>(p.d));
    return 0.5 * std::pow((std::pow(4.0 * sqrt_d, p.d) - std::pow(2.0, p.d)) *
                                  std::pow(p.r, p.d) +
                              1.0 / p.w,
                          1.0 / p.d);
}

inline std::vector<std::vector<double>> fano_centers(const FanoParams& p) {
    const double spacing = 3.0 * (fano_r_sharp(p) + 1.0);
    std::vector<std::vector<double>> z(p.L, std::vector<double>(p.d, 0.0));
    for (int l = 0; l < p.L; ++l) z[l][0] = spacing * static_cast<double>(l + 1);
    return z;
}

inline double fano_eta(const FanoParams& p,
                       const std::vector<std::vector<double>>& centers,
                       std::span<const double> x) {
    const double sqrt_d_r = std::sqrt(static_cast<double>(p.d)) * p.r;
    for (int l = 0; l < p.L; ++l) {
        double dist2 = 0.0;
        for (int j = 0; j < p.d; ++j) {
            const double diff = x[j] - centers[l][j];
            dist2 += diff * diff;
        }
        const double dist = std::sqrt(dist2);
        if (dist >= 2.0 * sqrt_d_r) continue;  // outside every special region
        const bool favoured = (l + 1 == p.ell);
        if (favoured) {
            if (dist <= sqrt_d_r) return p.tau + p.theta;
        } else {
            if (dist <= p.s) return p.tau - p.theta;
            if (dist <= 2.0 * p.s)
                return p.tau + p.theta - 2.0 * p.theta * bump_h(dist / p.s - 1.0);
            if (dist <= sqrt_d_r) return p.tau + p.theta;
        }
        return p.tau - p.theta + 2.0 * p.theta * bump_h(dist / sqrt_d_r - 1.0);
    }
    return p.tau - p.theta;
}

inline double parametric_eta(const ParametricParams& p, double x1) {
    if (x1 <= -p.t - p.s) return p.tau + p.theta;
    if (x1 <= -p.t)
        return p.tau + p.theta * (1.0 - 2.0 * bump_h((-x1 - p.t) / p.s));
    if (x1 <= p.t) return p.tau - p.theta;
    if (x1 <= p.t + p.s)
        return p.tau + p.theta * (1.0 - 2.0 * bump_h((x1 - p.t) / p.s));
    return p.tau + p.theta;
}

} // namespace detail

inline void validate_spec(const GeneratorSpec& spec) {
    std::visit([](const auto& p) { detail::validate(p); }, spec.kind);
}

inline int spec_dim(const GeneratorSpec& spec) {
    return std::visit(
        [](const auto& p) -> int {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Example1Params>) return 1;
            else return p.d;
        },
        spec.kind);
}

inline GroundTruth ground_truth(const GeneratorSpec& spec) {
    validate_spec(spec);
    GroundTruth gt;

    if (const auto* p1 = std::get_if<Example1Params>(&spec.kind)) {
        const Example1Params p = *p1;
        gt.tau = p.tau;
        gt.eta = [p](std::span<const double> x) {
            return 1.0 / (1.0 + std::exp(-2.0 * x[0] * p.nu));
        };
        const double x_tau = std::log(p.tau / (1.0 - p.tau)) / (2.0 * p.nu);
        auto mixture_cdf = [p](double x) {
            return 0.5 * norm_cdf(x - p.nu) + 0.5 * norm_cdf(x + p.nu);
        };
        gt.m_tau = 1.0 - mixture_cdf(x_tau);
        gt.superlevel_contains = [x_tau](const Rectangle& r) {
            return r.is_empty() || r.lower()[0] >= x_tau;
        };
        gt.rect_measure = [mixture_cdf](const Rectangle& r) {
            if (r.is_empty()) return 0.0;
            return mixture_cdf(r.upper()[0]) - mixture_cdf(r.lower()[0]);
        };
        return gt;
    }

    if (const auto* p2 = std::get_if<Example2Params>(&spec.kind)) {
        const Example2Params p = *p2;
        gt.tau = p.tau;
        gt.eta = [p](std::span<const double> x) {
            double mean = 0.0;
            for (double v : x) mean += v;
            mean /= static_cast<double>(p.d);
            return detail::clamp01(p.tau + p.epsilon * (mean - p.c));
        };
        gt.m_tau = std::pow(1.0 - p.c, p.d);
        gt.superlevel_contains = [p](const Rectangle& r) {
            if (r.is_empty()) return true;
            double mean = 0.0;
            for (double v : r.lower()) mean += v;
            return mean / static_cast<double>(p.d) >= p.c;
        };
        gt.rect_measure = [p](const Rectangle& r) {
            if (r.is_empty()) return 0.0;
            std::vector<double> lo(p.d, 0.0), hi(p.d, 1.0);
            return detail::rect_box_overlap(r, lo, hi);
        };
        return gt;
    }

    if (const auto* p3 = std::get_if<Example3Params>(&spec.kind)) {
        const Example3Params p = *p3;
        gt.tau = p.tau;
        gt.eta = [p](std::span<const double> x) {
            const double sgn = x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0);
            return detail::clamp01(
                p.tau + p.c_s * sgn * std::pow(std::abs(x[0]), 1.0 / p.gamma));
        };
        gt.m_tau = 0.5;
        gt.superlevel_contains = [](const Rectangle& r) {
            return r.is_empty() || r.lower()[0] >= 0.0;
        };
        if (p.d == 1) {
            auto cdf = [p](double x) {
                const double sgn = x >= 0.0 ? 1.0 : -1.0;
                return 0.5 * (1.0 + sgn * radial_cdf_example3(p.kappa, std::abs(x), 1));
            };
            gt.rect_measure = [cdf](const Rectangle& r) {
                if (r.is_empty()) return 0.0;
                return cdf(r.upper()[0]) - cdf(r.lower()[0]);
            };
        }
        return gt;
    }

    if (const auto* pf = std::get_if<FanoParams>(&spec.kind)) {
        const FanoParams p = *pf;
        const auto centers = detail::fano_centers(p);
        const double r_sharp = detail::fano_r_sharp(p);
        const double sqrt_d_r = std::sqrt(static_cast<double>(p.d)) * p.r;
        const double density = p.w / static_cast<double>(p.L);
        gt.tau = p.tau;
        gt.eta = [p, centers](std::span<const double> x) {
            return detail::fano_eta(p, centers, x);
        };
        gt.m_tau = density * std::pow(2.0 * p.r, p.d);
        const double lift = 1.0 + bump_half_crossing();
        const double r_out = sqrt_d_r * lift;
        const double r_in = p.s * lift;
        gt.superlevel_contains = [p, centers, r_out, r_in](const Rectangle& rect) {
            if (rect.is_empty()) return true;
            for (int l = 0; l < p.L; ++l) {
                const auto [lo2, hi2] = detail::rect_dist2_range(rect, centers[l]);
                if (l + 1 == p.ell) {
                    if (hi2 <= r_out * r_out) return true;  // ball around z_ell
                } else {
                    if (lo2 >= r_in * r_in && hi2 <= r_out * r_out) return true;
                }
            }
            return false;
        };
        gt.rect_measure = [p, centers, r_sharp, sqrt_d_r, density](const Rectangle& rect) {
            if (rect.is_empty()) return 0.0;
            double vol = 0.0;
            for (int l = 0; l < p.L; ++l) {
                vol += detail::rect_box_overlap(rect, centers[l], p.r);
                vol += detail::rect_box_overlap(rect, centers[l], r_sharp) -
                       detail::rect_box_overlap(rect, centers[l], 2.0 * sqrt_d_r);
            }
            return density * vol;
        };
        return gt;
    }

    const auto& p = std::get<ParametricParams>(spec.kind);
    const double sd = std::pow(p.s, p.d);
    const double td = std::pow(2.0 * p.t, p.d);
    const double base_density = 1.0 / (td + 2.0 * sd);
    gt.tau = p.tau;
    gt.eta = [p](std::span<const double> x) { return detail::parametric_eta(p, x[0]); };
    gt.m_tau = sd * base_density + p.zeta;
    const double edge = p.t + p.s * bump_half_crossing();
    gt.superlevel_contains = [edge](const Rectangle& r) {
        return r.is_empty() || r.upper()[0] <= -edge || r.lower()[0] >= edge;
    };
    gt.rect_measure = [p, base_density, sd](const Rectangle& r) {
        if (r.is_empty()) return 0.0;
        std::vector<double> lo(p.d), hi(p.d);
        // A_0 = [-t, t]^d
        for (int j = 0; j < p.d; ++j) lo[j] = -p.t, hi[j] = p.t;
        double vol = base_density * detail::rect_box_overlap(r, lo, hi);
        // A_{-1} and A_1 straddle the first axis with cross-section [-s/2, s/2].
        for (int j = 1; j < p.d; ++j) lo[j] = -p.s / 2.0, hi[j] = p.s / 2.0;
        lo[0] = -p.t - 2.0 * p.s;
        hi[0] = -p.t - p.s;
        vol += (base_density - p.zeta * p.ell / sd) * detail::rect_box_overlap(r, lo, hi);
        lo[0] = p.t + p.s;
        hi[0] = p.t + 2.0 * p.s;
        vol += (base_density + p.zeta * p.ell / sd) * detail::rect_box_overlap(r, lo, hi);
        return vol;
    };
    return gt;
}

namespace detail {

inline double example3_draw_radius(const Example3Params& p, Rng& rng) {
    const double u = rng.uniform();
    if (p.kappa == 1.0) return std::pow(-std::log1p(-u), 1.0 / p.d);
    double lo = 0.0;
    double hi;
    if (p.kappa > 1.0) {
        hi = std::pow(1.0 / (p.kappa - 1.0), 1.0 / p.d);
    } else {
        hi = 1.0;
        while (radial_cdf_example3(p.kappa, hi, p.d) < u && hi < 1e12) hi *= 2.0;
    }
    // Bisection to 1e-12.
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (radial_cdf_example3(p.kappa, mid, p.d) < u) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// n i.i.d. draws; responses are Bernoulli(eta(x)) apart from Example 1, which
// samples its Gaussian mixture directly.
inline Dataset sample(const GeneratorSpec& spec, std::size_t n, Rng& rng) {
    validate_spec(spec);
    if (n < 1) throw std::invalid_argument("sample requires n >= 1");
    const int d = spec_dim(spec);
    std::vector<double> xs;
    xs.reserve(n * static_cast<std::size_t>(d));
    std::vector<double> ys;
    ys.reserve(n);

    if (const auto* p1 = std::get_if<Example1Params>(&spec.kind)) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool one = rng.bernoulli(0.5);
            xs.push_back(rng.normal(one ? p1->nu : -p1->nu, 1.0));
            ys.push_back(one ? 1.0 : 0.0);
        }
        return Dataset(d, std::move(xs), std::move(ys));
    }

    const GroundTruth gt = ground_truth(spec);
    std::vector<double> x(d);
    auto push_draw = [&](std::span<const double> pt) {
        for (double v : pt) xs.push_back(v);
        ys.push_back(rng.bernoulli(gt.eta(pt)) ? 1.0 : 0.0);
    };

    if (const auto* p2 = std::get_if<Example2Params>(&spec.kind)) {
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < p2->d; ++j) x[j] = rng.uniform();
            push_draw(x);
        }
    } else if (const auto* p3 = std::get_if<Example3Params>(&spec.kind)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double radius = detail::example3_draw_radius(*p3, rng);
            const auto face = rng.uniform_index(static_cast<std::uint64_t>(2 * p3->d));
            const int axis = static_cast<int>(face / 2);
            const double sign = (face % 2 == 0) ? 1.0 : -1.0;
            for (int j = 0; j < p3->d; ++j)
                x[j] = j == axis ? sign * radius : rng.uniform(-radius, radius);
            push_draw(x);
        }
    } else if (const auto* pf = std::get_if<FanoParams>(&spec.kind)) {
        const auto centers = detail::fano_centers(*pf);
        const double r_sharp = detail::fano_r_sharp(*pf);
        const double sqrt_d_r = std::sqrt(static_cast<double>(pf->d)) * pf->r;
        const double p_cube = pf->w * std::pow(2.0 * pf->r, pf->d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto l = rng.uniform_index(static_cast<std::uint64_t>(pf->L));
            if (rng.uniform() < p_cube) {
                for (int j = 0; j < pf->d; ++j)
                    x[j] = centers[l][j] + rng.uniform(-pf->r, pf->r);
            } else {
                // Shell: rejection from the bounding cube; the acceptance rate
                // is 1 - (4 sqrt(d) r)^d / (2 r_sharp)^d > 0 by construction.
                while (true) {
                    double sup = 0.0;
                    for (int j = 0; j < pf->d; ++j) {
                        x[j] = centers[l][j] + rng.uniform(-r_sharp, r_sharp);
                        sup = std::max(sup, std::abs(x[j] - centers[l][j]));
                    }
                    if (sup >= 2.0 * sqrt_d_r) break;
                }
            }
            push_draw(x);
        }
    } else {
        const auto& pp = std::get<ParametricParams>(spec.kind);
        const double sd = std::pow(pp.s, pp.d);
        const double td = std::pow(2.0 * pp.t, pp.d);
        const double base = 1.0 / (td + 2.0 * sd);
        const double mass_m1 = sd * base - pp.zeta * pp.ell;
        const double mass_0 = td * base;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            if (u < mass_m1) {
                x[0] = rng.uniform(-pp.t - 2.0 * pp.s, -pp.t - pp.s);
                for (int j = 1; j < pp.d; ++j) x[j] = rng.uniform(-pp.s / 2.0, pp.s / 2.0);
            } else if (u < mass_m1 + mass_0) {
                for (int j = 0; j < pp.d; ++j) x[j] = rng.uniform(-pp.t, pp.t);
            } else {
                x[0] = rng.uniform(pp.t + pp.s, pp.t + 2.0 * pp.s);
                for (int j = 1; j < pp.d; ++j) x[j] = rng.uniform(-pp.s / 2.0, pp.s / 2.0);
            }
            push_draw(x);
        }
    }
    return Dataset(d, std::move(xs), std::move(ys));
}

inline std::pair<Dataset, GroundTruth> sample(const GeneratorSpec& spec, std::size_t n) {
    Rng rng = Rng::stream(spec.seed, 0);
    return {sample(spec, n, rng), ground_truth(spec)};
}

} // namespace subsel
