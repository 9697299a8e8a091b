#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tsbvp/timescale.hpp"

namespace tsbvp {

/// Real values on a suffix-trimmed prefix of a time scale's points.
///
/// A fresh sample lives on every grid point. Each delta derivative shrinks
/// the domain by one point from the right: the last point has zero
/// graininess, so no difference quotient exists there. `derivative_order`
/// records how many trims have happened; the domain is always the first
/// (grid size - derivative_order) points.
class GridFunction {
public:
    GridFunction(TimeScalePtr scale, std::vector<double> values, int derivative_order = 0)
        : scale_(std::move(scale)), values_(std::move(values)), derivative_order_(derivative_order) {
        if (!scale_)
            throw std::invalid_argument("grid function needs a time scale");
        if (derivative_order_ < 0)
            throw std::invalid_argument("derivative order must be nonnegative");
        if (values_.size() + static_cast<std::size_t>(derivative_order_) != scale_->size())
            throw std::invalid_argument("grid function values must cover the trimmed domain");
        if (values_.empty())
            throw std::invalid_argument("grid function domain is empty");
    }

    static GridFunction zeros(TimeScalePtr scale) {
        const std::size_t n = scale->size();
        return GridFunction(std::move(scale), std::vector<double>(n, 0.0));
    }

    static GridFunction sample(TimeScalePtr scale, const std::function<double(double)>& fn) {
        std::vector<double> vals;
        vals.reserve(scale->size());
        for (double t : scale->points())
            vals.push_back(fn(t));
        return GridFunction(std::move(scale), std::move(vals));
    }

    const TimeScalePtr& scale() const { return scale_; }
    int derivative_order() const { return derivative_order_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Domain point underneath value index i.
    double point(std::size_t i) const { return scale_->point(i); }

    /// Value at an exact domain point (off-domain is a domain error).
    double value_at(double t) const {
        const std::size_t i = scale_->index_of(t);
        if (i >= values_.size())
            throw std::domain_error("point is outside this function's trimmed domain");
        return values_[i];
    }

private:
    TimeScalePtr scale_;
    std::vector<double> values_;
    int derivative_order_;
};

inline bool same_domain(const GridFunction& a, const GridFunction& b) {
    if (a.derivative_order() != b.derivative_order())
        return false;
    if (a.scale() == b.scale())
        return true;
    return a.scale()->points() == b.scale()->points();
}

namespace detail {

/// One forward-difference pass: out[i] = (v[i+1] - v[i]) / mu_i.
inline void delta_pass(const TimeScale& ts, std::vector<double>& v) {
    if (v.size() < 2)
        throw std::domain_error("delta derivative: domain too short");
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        v[i] = (v[i + 1] - v[i]) / ts.mu_at(i);
    v.pop_back();
}

/// Values of delta^j u for j = 0..max_order; stack[j] has u.size()-j entries.
inline std::vector<std::vector<double>> derivative_stack(const GridFunction& u, int max_order) {
    std::vector<std::vector<double>> stack;
    stack.reserve(static_cast<std::size_t>(max_order) + 1);
    stack.push_back(u.values());
    for (int j = 1; j <= max_order; ++j) {
        std::vector<double> next = stack.back();
        delta_pass(*u.scale(), next);
        stack.push_back(std::move(next));
    }
    return stack;
}

}  // namespace detail

/// j-fold delta derivative; the domain shrinks by one point per order.
inline GridFunction delta_derivative(const GridFunction& u, int order = 1) {
    if (order < 1)
        throw std::invalid_argument("delta derivative order must be >= 1");
    std::vector<double> v = u.values();
    for (int j = 0; j < order; ++j)
        detail::delta_pass(*u.scale(), v);
    return GridFunction(u.scale(), std::move(v), u.derivative_order() + order);
}

/// Delta integral over [a, b): the graininess-weighted left sum.
inline double delta_integral(const GridFunction& u, double a, double b) {
    const TimeScale& ts = *u.scale();
    const std::size_t ia = ts.index_of(a);
    const std::size_t ib = ts.index_of(b);
    if (ia > ib)
        throw std::domain_error("delta integral: a > b");
    if (ib > u.size())
        throw std::domain_error("delta integral: integrand not defined on [a, b)");
    double sum = 0.0;
    for (std::size_t i = ia; i < ib; ++i)
        sum += ts.mu_at(i) * u.value(i);
    return sum;
}

/// F(t) = integral of u from 0 to t, on the full grid. F(0) = 0.
inline GridFunction cumulative_delta_integral(const GridFunction& u) {
    if (u.derivative_order() != 0)
        throw std::invalid_argument("cumulative integral needs a full-domain function");
    const TimeScale& ts = *u.scale();
    std::vector<double> acc(ts.size(), 0.0);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        acc[i + 1] = acc[i] + ts.mu_at(i) * u.value(i);
    return GridFunction(u.scale(), std::move(acc));
}

inline double sup_norm(const GridFunction& u) {
    double m = 0.0;
    for (double v : u.values())
        m = std::max(m, std::abs(v));
    return m;
}

/// Norm of the solution space: max over derivative orders 0..n of the sup
/// norm of delta^j u, each over its own trimmed domain.
inline double cn_norm(const GridFunction& u, int n) {
    if (n < 0)
        throw std::invalid_argument("cn_norm needs n >= 0");
    if (u.size() < static_cast<std::size_t>(n) + 1)
        throw std::domain_error("cn_norm: domain too short for requested derivative order");
    std::vector<double> v = u.values();
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    for (int j = 1; j <= n; ++j) {
        detail::delta_pass(*u.scale(), v);
        for (double x : v)
            m = std::max(m, std::abs(x));
    }
    return m;
}

/// a + alpha * b (same domain required).
inline GridFunction add_scaled(const GridFunction& a, const GridFunction& b, double alpha) {
    if (!same_domain(a, b))
        throw std::invalid_argument("grid function arithmetic needs matching domains");
    std::vector<double> v = a.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] += alpha * b.value(i);
    return GridFunction(a.scale(), std::move(v), a.derivative_order());
}

inline GridFunction scaled(const GridFunction& a, double alpha) {
    std::vector<double> v = a.values();
    for (double& x : v)
        x *= alpha;
    return GridFunction(a.scale(), std::move(v), a.derivative_order());
}

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    if (!same_domain(a, b))
        throw std::invalid_argument("grid function comparison needs matching domains");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.value(i) - b.value(i)));
    return m;
}

}  // namespace tsbvp
