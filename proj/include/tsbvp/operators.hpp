#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsbvp/grid_function.hpp"
#include "tsbvp/problem.hpp"
#include "tsbvp/taylor.hpp"

namespace tsbvp {

/// The n+2 residual components of a candidate solution: one interior
/// residual per collocation point, then the n-1 boundary-condition
/// residuals, then u(sigma^{n-1}(0)) and u(T). A grid function solves the
/// problem exactly when every component vanishes.
struct ResidualBundle {
    std::vector<double> interior;  // on the collocation set, increasing t
    std::vector<double> boundary;  // n+1 values in the order above

    double max_abs() const {
        double m = 0.0;
        for (double v : interior)
            m = std::max(m, std::abs(v));
        for (double v : boundary)
            m = std::max(m, std::abs(v));
        return m;
    }

    /// interior followed by boundary; the square system's residual vector.
    std::vector<double> flatten() const {
        std::vector<double> out = interior;
        out.insert(out.end(), boundary.begin(), boundary.end());
        return out;
    }

    std::size_t component_count() const { return boundary.size() + 1; }
};

/// Evaluate all residual components of u.
inline ResidualBundle residual_bundle(const BvpProblem& p, const GridFunction& u) {
    p.validate();
    if (u.derivative_order() != 0)
        throw std::invalid_argument("residual needs a full-domain grid function");
    if (u.scale() != p.scale && u.scale()->points() != p.scale->points())
        throw std::invalid_argument("grid function lives on a different time scale");

    const TimeScale& ts = *p.scale;
    const std::size_t N = ts.size();
    const int n = p.order;
    const auto stack = detail::derivative_stack(u, n);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;

    ResidualBundle rb;
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (std::size_t i = static_cast<std::size_t>(n); i + 1 < N; ++i) {
        const std::size_t m = i - 1;  // rho(t_i)
        if (m >= stack[static_cast<std::size_t>(n)].size())
            throw std::domain_error(
                "collocation point needs a delta derivative past the trimmed domain "
                "(order > 2 on a purely discrete scale)");
        for (int j = 0; j < n; ++j)
            xs[static_cast<std::size_t>(j)] = stack[static_cast<std::size_t>(j)][m];
        rb.interior.push_back(sign * stack[static_cast<std::size_t>(n)][m] + p.f(ts.point(i), xs));
    }
    for (int j = 2; j <= n; ++j) {
        const int ord = n - j + 1;
        const std::size_t pt = static_cast<std::size_t>(j - 2);
        rb.boundary.push_back(stack[static_cast<std::size_t>(ord)][pt] -
                              p.g[static_cast<std::size_t>(n - j)](stack[0][pt]));
    }
    rb.boundary.push_back(stack[0][static_cast<std::size_t>(n - 1)]);
    rb.boundary.push_back(stack[0][N - 1]);
    return rb;
}

/// The residual bundle mapped through the Taylor-monomial kernel: one
/// full-grid function per component, each vanishing at t = 0.
struct IntegralBundle {
    std::vector<GridFunction> components;

    double max_cn_norm(int n) const {
        double m = 0.0;
        for (const auto& c : components)
            m = std::max(m, cn_norm(c, n));
        return m;
    }
};

/// Component j at t is (A / T^{n+1}) * sum over s in [0, t) of
/// mu(s) * h_n(t, sigma(s)) * w_j(s), where w_0 is the interior residual
/// extended by zero outside the collocation set and w_j (j >= 1) are the
/// constant boundary residuals.
inline IntegralBundle integral_operator(const BvpProblem& p, const GridFunction& u) {
    if (!p.params)
        throw std::invalid_argument("integral operator needs params (the constant A)");
    const double A = p.params->A;
    if (!(A > 0.0))
        throw std::invalid_argument("params.A must be positive");

    const ResidualBundle rb = residual_bundle(p, u);
    const TimeScale& ts = *p.scale;
    const std::size_t N = ts.size();
    const int n = p.order;

    std::vector<double> interior_ext(N, 0.0);
    for (std::size_t k = 0; k < rb.interior.size(); ++k)
        interior_ext[static_cast<std::size_t>(n) + k] = rb.interior[k];

    const double scale = A / std::pow(ts.horizon(), n + 1);
    const std::size_t comps = rb.component_count();
    std::vector<std::vector<double>> vals(comps, std::vector<double>(N, 0.0));
    for (std::size_t s = 0; s + 1 < N; ++s) {
        const double mu = ts.mu_at(s);
        const auto kernel = taylor_monomial_row(ts, n, s + 1);  // h_n(., sigma(s))
        for (std::size_t i = s + 1; i < N; ++i) {
            const double weight = mu * kernel[i];
            vals[0][i] += weight * interior_ext[s];
            for (std::size_t j = 1; j < comps; ++j)
                vals[j][i] += weight * rb.boundary[j - 1];
        }
    }

    IntegralBundle out;
    out.components.reserve(comps);
    for (auto& v : vals) {
        for (double& x : v)
            x *= scale;
        out.components.emplace_back(p.scale, std::move(v));
    }
    return out;
}

/// An expansive/compact operator pair; summing the parts componentwise
/// recovers the fixed-point map.
struct OperatorSplit {
    IntegralBundle expansion;
    IntegralBundle remainder;
};

/// T u = eta * u and S u = u - eta * u - eta * (integral operator of u),
/// broadcast over the bundle components. Fixed points of T + S have a
/// vanishing integral transform. Requires eta > 1 so that T is expansive.
inline OperatorSplit relaxation_split(const BvpProblem& p, const GridFunction& u, double eta) {
    if (!(eta > 1.0))
        throw std::domain_error("relaxation split needs eta > 1");
    IntegralBundle ib = integral_operator(p, u);
    OperatorSplit split;
    const GridFunction scaled_u = scaled(u, eta);
    const GridFunction residual_base = scaled(u, 1.0 - eta);
    for (auto& comp : ib.components) {
        split.expansion.components.push_back(scaled_u);
        split.remainder.components.push_back(add_scaled(residual_base, comp, -eta));
    }
    return split;
}

/// T1 v = (1 + m) v and S3 v = -|integral operator of v| - m v, broadcast
/// over the bundle components. T1 stretches every distance by 1 + m; fixed
/// points of T1 + S3 kill the integral transform's magnitude. Requires m > 0.
inline OperatorSplit cone_split(const BvpProblem& p, const GridFunction& v, double m) {
    if (!(m > 0.0))
        throw std::domain_error("cone split needs m > 0");
    IntegralBundle ib = integral_operator(p, v);
    OperatorSplit split;
    const GridFunction expanded = scaled(v, 1.0 + m);
    for (auto& comp : ib.components) {
        split.expansion.components.push_back(expanded);
        std::vector<double> s3(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            s3[i] = -std::abs(comp.value(i)) - m * v.value(i);
        split.remainder.components.emplace_back(p.scale, std::move(s3));
    }
    return split;
}

struct IterationStep {
    int iteration = 0;
    double update_norm = 0.0;
    double residual_inf = 0.0;
};

struct RelaxationResult {
    GridFunction terminal;
    std::vector<IterationStep> trace;
    bool converged = false;
    int iterations = 0;
};

/// Plain relaxation u <- u - eta * (first integral component), stopping when
/// the update norm drops below tol. Convergence is not guaranteed;
/// non-convergence is a reported outcome, never an error.
inline RelaxationResult relaxation_iterate(const BvpProblem& p, const GridFunction& u0,
                                           double eta, int max_iter, double tol) {
    if (!(eta > 0.0))
        throw std::domain_error("relaxation needs eta > 0");
    if (max_iter < 0 || !(tol > 0.0))
        throw std::invalid_argument("relaxation needs max_iter >= 0 and tol > 0");
    RelaxationResult result{u0, {}, false, 0};
    for (int it = 0; it <= max_iter; ++it) {
        const IntegralBundle ib = integral_operator(p, result.terminal);
        const GridFunction& first = ib.components[0];
        const double update_norm = eta * cn_norm(first, p.order);
        result.trace.push_back(
            {it, update_norm, residual_bundle(p, result.terminal).max_abs()});
        if (update_norm < tol) {
            result.converged = true;
            result.iterations = it;
            return result;
        }
        if (it == max_iter)
            break;
        result.terminal = add_scaled(result.terminal, first, -eta);
        result.iterations = it + 1;
    }
    return result;
}

/// Derived constants and the exclusion inequalities behind the three-shell
/// search: eta = 2*A*B1/(m*r) by default, the thresholds 1 + A*B1/(m*r) and
/// 1 + A*B1/(m*R), and the strict/ordered comparisons between them.
struct HypothesisBounds {
    double B1 = 0.0;
    double A = 0.0;
    double m = 0.0;
    double r = 0.0;
    double L = 0.0;
    double R = 0.0;
    double eta = 0.0;
    bool eta_defaulted = true;
    double threshold_r = 0.0;
    double threshold_R = 0.0;
    bool inner_exclusion_strict = false;  // threshold_r < 1 + eta
    bool outer_exclusion_ordered = false; // A*B1/(m*R) <= A*B1/(m*r)
    bool radii_ordered = false;           // r < L < R
    bool degenerate = false;              // B1 == 0 or eta == 0
    std::vector<std::string> violated;

    bool all_hold() const { return violated.empty() && !degenerate; }
};

inline HypothesisBounds hypothesis_report(const BvpProblem& p) {
    p.validate();
    if (!p.envelope)
        throw std::invalid_argument("hypothesis report needs the growth envelope");
    if (!p.params)
        throw std::invalid_argument("hypothesis report needs the radii parameters");
    const BallParams& bp = *p.params;
    if (!(bp.m > 0.0) || !(bp.A > 0.0))
        throw std::domain_error("m and A must be positive");

    HypothesisBounds hb;
    hb.B1 = growth_bound(*p.envelope);
    hb.A = bp.A;
    hb.m = bp.m;
    hb.r = bp.r;
    hb.L = bp.L;
    hb.R = bp.R;
    hb.radii_ordered = check_radii(bp);
    hb.eta_defaulted = !bp.eta.has_value();
    hb.eta = bp.eta.has_value() ? *bp.eta : 2.0 * bp.A * hb.B1 / (bp.m * bp.r);
    hb.threshold_r = 1.0 + bp.A * hb.B1 / (bp.m * bp.r);
    hb.threshold_R = 1.0 + bp.A * hb.B1 / (bp.m * bp.R);
    hb.inner_exclusion_strict = hb.threshold_r < 1.0 + hb.eta;
    hb.outer_exclusion_ordered =
        bp.A * hb.B1 / (bp.m * bp.R) <= bp.A * hb.B1 / (bp.m * bp.r);
    hb.degenerate = !(hb.B1 > 0.0) || !(hb.eta > 0.0);

    if (!(bp.r < bp.L))
        hb.violated.push_back("r < L");
    if (!(bp.L < bp.R))
        hb.violated.push_back("L < R");
    if (!hb.inner_exclusion_strict)
        hb.violated.push_back("1 + A*B1/(m*r) < 1 + eta");
    if (!hb.outer_exclusion_ordered)
        hb.violated.push_back("A*B1/(m*R) <= A*B1/(m*r)");
    return hb;
}

}  // namespace tsbvp
