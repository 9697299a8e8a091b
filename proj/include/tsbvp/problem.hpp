#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsbvp/growth.hpp"
#include "tsbvp/timescale.hpp"

namespace tsbvp {

/// An order-n dynamic boundary value problem on a finite time scale:
///
///   (-1)^n Delta^n u(rho(t)) + f(t, u(rho(t)), ..., Delta^{n-1} u(rho(t))) = 0
///   Delta^{n-j} u(sigma^{j-1}(0)) = g_{n-j}(u(sigma^{j-1}(0))),  j = 1..n-1
///   u(sigma^{n-1}(0)) = u(T) = 0
///
/// `f` takes (t, x_1..x_n) where x_j stands for Delta^{j-1} u(rho(t)).
/// All members are immutable in use; callables must be pure and thread-safe.
struct BvpProblem {
    TimeScalePtr scale;
    int order = 1;  // n
    std::function<double(double, std::span<const double>)> f;
    std::vector<std::function<double(double)>> g;  // g_1, ..., g_{n-1}
    std::optional<GrowthEnvelope> envelope;
    std::optional<BallParams> params;

    void validate() const {
        if (!scale)
            throw std::invalid_argument("problem needs a time scale");
        if (order < 1)
            throw std::invalid_argument("problem order must be >= 1");
        if (!(scale->horizon() > 1.0))
            throw std::invalid_argument("problem needs a horizon T > 1");
        if (scale->size() < static_cast<std::size_t>(order) + 1)
            throw std::invalid_argument("grid too short for this order (need n + 1 points)");
        if (!f)
            throw std::invalid_argument("problem needs an interior nonlinearity f");
        if (g.size() + 1 != static_cast<std::size_t>(order))
            throw std::invalid_argument("problem needs exactly n - 1 boundary nonlinearities");
        if (envelope && envelope->order != order)
            throw std::invalid_argument("envelope order does not match the problem order");
    }
};

/// The grid points where the dynamic equation is imposed:
/// { t : sigma^{n-1}(0) < t < T }, i.e. indices n..N-2. Together with the
/// n + 1 boundary conditions this makes the discrete system square.
inline std::vector<double> collocation_set(const BvpProblem& p) {
    p.validate();
    const TimeScale& ts = *p.scale;
    std::vector<double> pts;
    for (std::size_t i = static_cast<std::size_t>(p.order); i + 1 < ts.size(); ++i)
        pts.push_back(ts.point(i));
    return pts;
}

}  // namespace tsbvp
