#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tsbvp/timescale.hpp"

namespace tsbvp {

/// Values of the generalized Taylor monomial h_k(t, s) at every grid point t,
/// for a fixed s.
///
/// h_0 = 1 and h_{k+1}(t, s) is the delta integral of h_k(., s) from s to t.
/// For t < s the integral carries the signed convention (integral from s to t
/// equals minus the integral from t to s), which the prefix-sum form below
/// handles uniformly: at every level, H[m] = cum[m] - cum[s_index].
inline std::vector<double> taylor_monomial_row(const TimeScale& ts, int k, std::size_t s_index) {
    if (k < 0)
        throw std::invalid_argument("taylor monomial order must be nonnegative");
    if (s_index >= ts.size())
        throw std::domain_error("taylor monomial: s is not a grid index");
    const std::size_t n = ts.size();
    std::vector<double> h(n, 1.0);
    std::vector<double> cum(n + 1, 0.0);
    for (int level = 0; level < k; ++level) {
        for (std::size_t m = 0; m < n; ++m)
            cum[m + 1] = cum[m] + ts.mu_at(m) * h[m];
        const double base = cum[s_index];
        for (std::size_t m = 0; m < n; ++m)
            h[m] = cum[m] - base;
    }
    return h;
}

/// h_k(t, s) for grid points t and s.
inline double taylor_monomial(const TimeScale& ts, int k, double t, double s) {
    const std::size_t it = ts.index_of(t);
    const std::size_t is = ts.index_of(s);
    if (k == 0)
        return 1.0;
    if (it == is)
        return 0.0;
    return taylor_monomial_row(ts, k, is)[it];
}

}  // namespace tsbvp
