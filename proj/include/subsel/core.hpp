#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subsel {

// Covariate-response sample with a fixed dimension; responses live in [0,1].
// Immutable after construction, safe to share across threads.
class Dataset {
public:
    Dataset(int dim, std::vector<double> x_flat, std::vector<double> y)
        : dim_(dim), x_(std::move(x_flat)), y_(std::move(y)) {
        if (dim_ < 1) throw std::invalid_argument("dataset dimension must be >= 1");
        if (x_.size() != y_.size() * static_cast<std::size_t>(dim_))
            throw std::invalid_argument("covariate storage does not match n*d");
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
    double y(std::size_t i) const { return y_[i]; }

    const std::vector<double>& x_flat() const { return x_; }
    const std::vector<double>& y_all() const { return y_; }

private:
    int dim_;
    std::vector<double> x_;  // row-major, n * dim
    std::vector<double> y_;
};

// Compact axis-aligned hyper-rectangle with closed faces, plus an explicit
// empty variant so the empty candidate set is unambiguous.
class Rectangle {
public:
    Rectangle() = default;  // empty

    Rectangle(std::vector<double> lower, std::vector<double> upper)
        : empty_(false), lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size() || lower_.empty())
            throw std::invalid_argument("rectangle bounds size mismatch");
        for (std::size_t j = 0; j < lower_.size(); ++j)
            if (!(lower_[j] <= upper_[j]))
                throw std::invalid_argument("rectangle requires lower <= upper");
    }

    static Rectangle empty() { return Rectangle(); }

    bool is_empty() const { return empty_; }
    int dim() const { return static_cast<int>(lower_.size()); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }

    bool contains(std::span<const double> point) const {
        if (empty_) return false;
        if (point.size() != lower_.size())
            throw std::invalid_argument("rectangle/point dimension mismatch");
        for (std::size_t j = 0; j < lower_.size(); ++j)
            if (point[j] < lower_[j] || point[j] > upper_[j]) return false;
        return true;
    }

    bool operator==(const Rectangle& o) const {
        if (empty_ != o.empty_) return false;
        if (empty_) return true;
        return lower_ == o.lower_ && upper_ == o.upper_;
    }

private:
    bool empty_ = true;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

enum class Variant { FirstOrder, HigherOrder };

// Threshold, level and smoothness parameters for a selection run.
struct SelectionConfig {
    double tau;
    double alpha;
    double beta;
    double c_s;
    Variant variant;
    double q_inv_tol;

    SelectionConfig(double tau_, double alpha_, double beta_, double c_s_,
                    Variant variant_, double q_inv_tol_ = 1e-8)
        : tau(tau_), alpha(alpha_), beta(beta_), c_s(c_s_),
          variant(variant_), q_inv_tol(q_inv_tol_) {
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("tau must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0,1)");
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
        if (!(c_s >= 1.0)) throw std::invalid_argument("c_s must be >= 1");
        if (variant == Variant::FirstOrder && beta > 1.0)
            throw std::invalid_argument("first-order variant requires beta <= 1");
        if (!(q_inv_tol > 0.0))
            throw std::invalid_argument("q_inv_tol must be positive");
    }
};

// Fraction of sample points inside r; membership is closed on all faces.
inline double rect_empirical_measure(const Dataset& data, const Rectangle& r) {
    if (r.is_empty()) return 0.0;
    if (r.dim() != data.dim())
        throw std::invalid_argument("rectangle/dataset dimension mismatch");
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.n(); ++i)
        if (r.contains(data.x(i))) ++count;
    return static_cast<double>(count) / static_cast<double>(data.n());
}

} // namespace subsel
