#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "subsel/core.hpp"
#include "subsel/select.hpp"

namespace subsel {

// Treatment/control triples (x, t, y~) with binary treatment and bounded
// responses.
class HTEDataset {
public:
    HTEDataset(int dim, std::vector<double> x_flat, std::vector<int> t,
               std::vector<double> y_tilde)
        : dim_(dim), x_(std::move(x_flat)), t_(std::move(t)), y_(std::move(y_tilde)) {
        if (dim_ < 1) throw std::invalid_argument("hte dataset dimension must be >= 1");
        if (x_.size() != y_.size() * static_cast<std::size_t>(dim_) ||
            t_.size() != y_.size())
            throw std::invalid_argument("hte dataset storage sizes do not match");
        for (int v : t_)
            if (v != 0 && v != 1)
                throw std::invalid_argument("treatment indicator must be 0 or 1");
        for (double v : y_)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("response out of range [0,1]");
    }

    int dim() const { return dim_; }
    std::size_t n() const { return y_.size(); }
    std::span<const double> x(std::size_t i) const {
        return {x_.data() + i * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }
    int t(std::size_t i) const { return t_[i]; }
    double y_tilde(std::size_t i) const { return y_[i]; }

private:
    int dim_;
    std::vector<double> x_;
    std::vector<int> t_;
    std::vector<double> y_;
};

// Known propensity with a declared margin: every evaluated value must lie in
// [zeta0, 1 - zeta0].
struct Propensity {
    std::function<double(std::span<const double>)> pi;
    double zeta0;

    static Propensity constant(double value, double zeta0) {
        return {[value](std::span<const double>) { return value; }, zeta0};
    }
};

// Proxy-label reduction: turns triples into a bounded-response regression
// sample whose super-level set at tau' coincides with the treatment-effect
// super-level set at t_level. rho_min is the sample surrogate
// min_i min(pi(x_i), 1 - pi(x_i)), which the declared zeta0 bound must cover.
inline std::pair<Dataset, double> proxy_transform(const HTEDataset& hd,
                                                  const Propensity& prop,
                                                  double t_level) {
    if (!(t_level >= -1.0 && t_level <= 1.0))
        throw std::invalid_argument("t_level must lie in [-1,1]");
    if (!(prop.zeta0 > 0.0 && prop.zeta0 < 0.5))
        throw std::invalid_argument("zeta0 must lie in (0, 1/2)");
    if (hd.n() < 1) throw std::invalid_argument("proxy_transform requires n >= 1");

    std::vector<double> pi_vals(hd.n());
    double rho_min = 0.5;
    for (std::size_t i = 0; i < hd.n(); ++i) {
        const double pi = prop.pi(hd.x(i));
        if (!(pi >= prop.zeta0 && pi <= 1.0 - prop.zeta0))
            throw std::invalid_argument("propensity value outside [zeta0, 1-zeta0]");
        pi_vals[i] = pi;
        rho_min = std::min({rho_min, pi, 1.0 - pi});
    }

    std::vector<double> xs(hd.n() * static_cast<std::size_t>(hd.dim()));
    std::vector<double> ys(hd.n());
    for (std::size_t i = 0; i < hd.n(); ++i) {
        const auto x = hd.x(i);
        std::copy(x.begin(), x.end(),
                  xs.begin() + static_cast<std::ptrdiff_t>(i * x.size()));
        const double pi = pi_vals[i];
        const double y =
            0.5 * (1.0 + rho_min / (pi * (1.0 - pi)) *
                             (static_cast<double>(hd.t(i)) - pi) * hd.y_tilde(i));
        ys[i] = std::clamp(y, 0.0, 1.0);  // exact in [0,1]; clamp absorbs roundoff
    }
    const double tau_prime = 0.5 * (1.0 + rho_min * t_level);
    return {Dataset(hd.dim(), std::move(xs), std::move(ys)), tau_prime};
}

// Runs the selection pipeline on the proxy labels at the induced threshold.
inline SelectionResult hte_select(const HTEDataset& hd, const Propensity& prop,
                                  double t_level, const SelectionConfig& cfg,
                                  const MaxRectOptions& rect_opts = {}) {
    auto [data, tau_prime] = proxy_transform(hd, prop, t_level);
    SelectionConfig run_cfg(tau_prime, cfg.alpha, cfg.beta, cfg.c_s, cfg.variant,
                            cfg.q_inv_tol);
    return oss_select(data, run_cfg, rect_opts);
}

} // namespace subsel
