#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "subsel/core.hpp"
#include "subsel/hypercube.hpp"
#include "subsel/stats.hpp"

namespace subsel {

// Multi-indices nu with |nu|_1 <= ceil(beta)-1, ordered by total degree and,
// within a degree, with earlier coordinates carrying higher powers first. The
// zero index sits at position 0.
struct MultiIndexBasis {
    int d;
    double beta;
    std::vector<std::vector<int>> indices;

    std::size_t size() const { return indices.size(); }
};

namespace detail {

inline void gen_degree_indices(int d, int degree, std::vector<int>& cur,
                               std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == d - 1) {
        cur.push_back(degree);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int k = degree; k >= 0; --k) {
        cur.push_back(k);
        gen_degree_indices(d, degree - k, cur, out);
        cur.pop_back();
    }
}

} // namespace detail

inline MultiIndexBasis multi_indices(int d, double beta) {
    if (d < 1) throw std::invalid_argument("multi_indices requires d >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("multi_indices requires beta > 0");
    const int max_degree = static_cast<int>(std::ceil(beta)) - 1;
    MultiIndexBasis basis{d, beta, {}};
    std::vector<int> cur;
    for (int degree = 0; degree <= max_degree; ++degree)
        detail::gen_degree_indices(d, degree, cur, basis.indices);
    return basis;
}

// Polynomial feature vector ((x' - x)/h)^nu over the basis.
inline Eigen::VectorXd features(const MultiIndexBasis& basis, std::span<const double> x,
                                double h, std::span<const double> xp) {
    if (!(h > 0.0)) throw std::invalid_argument("features requires h > 0");
    if (static_cast<int>(x.size()) != basis.d || static_cast<int>(xp.size()) != basis.d)
        throw std::invalid_argument("features dimension mismatch");
    Eigen::VectorXd phi(static_cast<Eigen::Index>(basis.size()));
    std::vector<double> z(basis.d);
    for (int j = 0; j < basis.d; ++j) z[j] = (xp[j] - x[j]) / h;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        double v = 1.0;
        for (int j = 0; j < basis.d; ++j)
            for (int rep = 0; rep < basis.indices[k][j]; ++rep) v *= z[j];
        phi(static_cast<Eigen::Index>(k)) = v;
    }
    return phi;
}

// Local least squares over the closed sup-norm ball of radius h around x.
struct LocalFit {
    std::vector<double> center;
    double bandwidth;
    std::size_t neighborhood_size;
    Eigen::MatrixXd q_matrix;
    Eigen::VectorXd v_vector;
    double eta_hat;      // clamp of the fitted constant coefficient
    bool q_invertible;   // lambda_min(Q) >= q_inv_tol * max(1, |N|)
    double e0_quad;      // e0' Q^{-1} e0, valid only when q_invertible
};

inline LocalFit local_fit(const Dataset& data, std::span<const double> x, double h,
                          const MultiIndexBasis& basis, double q_inv_tol) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("local_fit requires h in (0,1]");
    if (static_cast<int>(x.size()) != data.dim() || basis.d != data.dim())
        throw std::invalid_argument("local_fit dimension mismatch");

    const auto k = static_cast<Eigen::Index>(basis.size());
    LocalFit fit;
    fit.center.assign(x.begin(), x.end());
    fit.bandwidth = h;
    fit.neighborhood_size = 0;
    fit.q_matrix = Eigen::MatrixXd::Zero(k, k);
    fit.v_vector = Eigen::VectorXd::Zero(k);

    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto xi = data.x(i);
        bool inside = true;
        for (int j = 0; j < data.dim(); ++j)
            if (std::abs(xi[j] - x[j]) > h) {
                inside = false;
                break;
            }
        if (!inside) continue;
        ++fit.neighborhood_size;
        const Eigen::VectorXd phi = features(basis, x, h, xi);
        fit.q_matrix.noalias() += phi * phi.transpose();
        fit.v_vector.noalias() += data.y(i) * phi;
    }

    const double tol =
        q_inv_tol * std::max(1.0, static_cast<double>(fit.neighborhood_size));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.q_matrix);
    const Eigen::VectorXd& evals = es.eigenvalues();
    const Eigen::MatrixXd& evecs = es.eigenvectors();
    fit.q_invertible = evals(0) >= tol;

    // Pseudo-inverse solve for the coefficient vector; eigenvalues below the
    // tolerance are zeroed.
    double w0 = 0.0;
    double e0_quad = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
        if (evals(r) < tol) continue;
        const double proj = evecs.col(r).dot(fit.v_vector);
        w0 += evecs(0, r) * proj / evals(r);
        e0_quad += evecs(0, r) * evecs(0, r) / evals(r);
    }
    fit.eta_hat = std::clamp(w0, 0.0, 1.0);
    fit.e0_quad = fit.q_invertible ? e0_quad : 0.0;
    return fit;
}

// Higher-order p-value for the closed ball of radius r about center; the model
// bandwidth is h = (2r)^{1 ^ (1/beta)}.
inline double p_value_local(const Dataset& data, std::span<const double> center,
                            double r, const SelectionConfig& cfg) {
    if (!(r > 0.0 && 2.0 * r <= 1.0))
        throw std::invalid_argument("p_value_local requires diameter in (0,1]");
    const double h = std::pow(2.0 * r, std::min(1.0, 1.0 / cfg.beta));
    const MultiIndexBasis basis = multi_indices(data.dim(), cfg.beta);
    const LocalFit fit = local_fit(data, center, h, basis, cfg.q_inv_tol);
    if (!fit.q_invertible) return 1.0;
    const double g = fit.e0_quad;
    const double thr =
        cfg.tau +
        cfg.c_s *
            (1.0 + 2.0 * std::sqrt(g * static_cast<double>(fit.neighborhood_size))) *
            std::pow(r, std::min(cfg.beta, 1.0));
    if (fit.eta_hat < thr) return 1.0;
    const double dev = fit.eta_hat - thr;
    return std::max(std::exp(-(2.0 / g) * dev * dev), kPValueFloor);
}

inline PValueRecord p_value_higher_order(const Dataset& data, const HyperCube& c,
                                         const SelectionConfig& cfg) {
    if (c.family != CubeFamily::Hplus)
        throw std::invalid_argument("p_value_higher_order requires an Hplus cube");
    if (cube_diam(c) > 1.0)
        throw std::invalid_argument("p_value_higher_order requires diam <= 1");
    std::vector<double> center(c.dim());
    for (int j = 0; j < c.dim(); ++j) center[j] = 0.5 * (c.lower(j) + c.upper(j));
    const double p = p_value_local(data, center, 0.5 * cube_diam(c), cfg);
    const BoxStats bs = box_stats(data, c);
    return {c, p, bs.m, bs.eta_hat};
}

} // namespace subsel
