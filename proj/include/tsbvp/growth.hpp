#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsbvp/rng.hpp"
#include "tsbvp/timescale.hpp"

namespace tsbvp {

/// One power term of the interior envelope: coeff(t) * |x_j|^exponent.
struct InteriorTerm {
    std::function<double(double)> coeff;
    double exponent = 0.0;
};

/// One power term of a boundary envelope: coeff * |x|^exponent.
struct BoundaryTerm {
    double coeff = 0.0;
    double exponent = 0.0;
};

struct BoundaryEnvelope {
    double a0 = 0.0;
    std::vector<BoundaryTerm> terms;
};

/// Polynomial growth envelope for the interior nonlinearity f and the
/// boundary nonlinearities g_j, sharing the bound B: coefficients must stay
/// inside [0, B] and exponents must be nonnegative.
struct GrowthEnvelope {
    double B = 0.0;
    int order = 0;  // n
    std::function<double(double)> b0;
    std::vector<InteriorTerm> f_terms;       // exactly n entries
    std::vector<BoundaryEnvelope> g_terms;   // exactly n-1 entries

    void validate() const {
        if (order < 1)
            throw std::invalid_argument("envelope order must be >= 1");
        if (!(B >= 0.0))
            throw std::invalid_argument("envelope bound B must be nonnegative");
        if (!b0)
            throw std::invalid_argument("envelope needs b0");
        if (f_terms.size() != static_cast<std::size_t>(order))
            throw std::invalid_argument("envelope needs one interior term per derivative order");
        for (const auto& term : f_terms) {
            if (!term.coeff)
                throw std::invalid_argument("interior envelope term needs a coefficient");
            if (!(term.exponent >= 0.0))
                throw std::invalid_argument("envelope exponents must be nonnegative");
        }
        if (g_terms.size() + 1 != static_cast<std::size_t>(order))
            throw std::invalid_argument("envelope needs one boundary block per boundary condition");
        for (const auto& block : g_terms) {
            for (const auto& term : block.terms)
                if (!(term.exponent >= 0.0))
                    throw std::invalid_argument("envelope exponents must be nonnegative");
        }
    }
};

/// The combined growth bound: the larger of the interior bound
/// 2B + n*B^(n+1) and the per-boundary bounds 2B + sum_k B^(1+l_k).
/// With no boundary conditions (order 1) only the interior bound remains.
inline double growth_bound(const GrowthEnvelope& env) {
    env.validate();
    const double B = env.B;
    const int n = env.order;
    double best = 2.0 * B + n * std::pow(B, n + 1);
    for (const auto& block : env.g_terms) {
        double sum = 2.0 * B;
        for (const auto& term : block.terms)
            sum += std::pow(B, 1.0 + term.exponent);
        best = std::max(best, sum);
    }
    return best;
}

/// b0(t) + sum_j b_j(t) * |x_j|^{k_j}.
inline double interior_envelope(const GrowthEnvelope& env, double t, std::span<const double> xs) {
    if (xs.size() != env.f_terms.size())
        throw std::invalid_argument("interior envelope needs one argument per term");
    double sum = env.b0(t);
    for (std::size_t j = 0; j < xs.size(); ++j)
        sum += env.f_terms[j].coeff(t) * std::pow(std::abs(xs[j]), env.f_terms[j].exponent);
    return sum;
}

/// a0_j + sum_k a_kj * |x|^{l_k} for the j-th boundary condition (1-based).
inline double boundary_envelope(const GrowthEnvelope& env, int j, double x) {
    if (j < 1 || static_cast<std::size_t>(j) > env.g_terms.size())
        throw std::domain_error("boundary envelope index out of range");
    const auto& block = env.g_terms[static_cast<std::size_t>(j) - 1];
    double sum = block.a0;
    for (const auto& term : block.terms)
        sum += term.coeff * std::pow(std::abs(x), term.exponent);
    return sum;
}

/// Radii and operator constants for the shell search. `eta` defaults to
/// 2*A*B1/(m*r) when unset.
struct BallParams {
    double r = 0.0;
    double L = 0.0;
    double R = 0.0;
    double m = 0.0;
    double A = 0.0;
    std::optional<double> eta;
};

/// Strict radii ordering r < L < R. Nonpositive radii are a domain error;
/// a wrong ordering is a `false` result, not an error.
inline bool check_radii(const BallParams& p) {
    if (!(p.r > 0.0) || !(p.L > 0.0) || !(p.R > 0.0))
        throw std::domain_error("radii must be positive");
    return p.r < p.L && p.L < p.R;
}

struct GrowthSampler {
    double box_lo = -10.0;
    double box_hi = 10.0;
    int samples = 10000;
    std::uint64_t seed = 0;
};

struct GrowthWitness {
    std::string kind;       // "f", "g1", ..., "b0", "b1", ..., "a0_1", "a1_1", ...
    double t = 0.0;
    std::vector<double> x;
    double value = 0.0;
    double bound = 0.0;
};

/// Outcome of the sampling check. `pass` covers the envelope inequalities;
/// `side_pass` covers the coefficient side conditions 0 <= coeff <= B.
/// A pass is evidence from deterministic sampling, not a proof.
struct GrowthCheckReport {
    bool pass = false;
    double worst_margin = 0.0;
    std::optional<GrowthWitness> witness;
    bool side_pass = false;
    double side_worst_margin = 0.0;
    std::optional<GrowthWitness> side_witness;
    int samples = 0;
    std::uint64_t seed = 0;
    double box_lo = 0.0;
    double box_hi = 0.0;
};

/// Samples (t, x) over grid x box and checks |f| and |g_j| against the
/// envelope, plus the coefficient side conditions over the grid.
inline GrowthCheckReport check_growth(
    const TimeScale& ts, int order,
    const std::function<double(double, std::span<const double>)>& f,
    const std::vector<std::function<double(double)>>& g,
    const GrowthEnvelope& env, const GrowthSampler& sampler) {
    env.validate();
    if (env.order != order)
        throw std::invalid_argument("envelope order does not match the problem order");
    if (g.size() + 1 != static_cast<std::size_t>(order))
        throw std::invalid_argument("need one boundary nonlinearity per boundary condition");
    if (sampler.samples < 1 || !(sampler.box_hi > sampler.box_lo))
        throw std::invalid_argument("sampler needs samples >= 1 and a nonempty box");

    GrowthCheckReport report;
    report.samples = sampler.samples;
    report.seed = sampler.seed;
    report.box_lo = sampler.box_lo;
    report.box_hi = sampler.box_hi;
    report.worst_margin = std::numeric_limits<double>::infinity();
    report.side_worst_margin = std::numeric_limits<double>::infinity();

    const auto note = [](double margin, GrowthWitness w, double& worst,
                         std::optional<GrowthWitness>& witness) {
        if (margin < worst) {
            worst = margin;
            witness = std::move(w);
        }
    };

    Rng rng(sampler.seed);
    std::vector<double> xs(static_cast<std::size_t>(order));
    for (int k = 0; k < sampler.samples; ++k) {
        const double t = ts.point(static_cast<std::size_t>(rng.index(ts.size())));
        for (double& x : xs)
            x = rng.uniform(sampler.box_lo, sampler.box_hi);
        double fv = std::numeric_limits<double>::quiet_NaN();
        try {
            fv = f(t, xs);
        } catch (const std::exception&) {
        }
        const double bound = interior_envelope(env, t, xs);
        const double margin =
            std::isfinite(fv) ? bound - std::abs(fv) : -std::numeric_limits<double>::infinity();
        note(margin, GrowthWitness{"f", t, xs, fv, bound}, report.worst_margin, report.witness);

        for (std::size_t j = 0; j < g.size(); ++j) {
            const double xg = rng.uniform(sampler.box_lo, sampler.box_hi);
            double gv = std::numeric_limits<double>::quiet_NaN();
            try {
                gv = g[j](xg);
            } catch (const std::exception&) {
            }
            const double gbound = boundary_envelope(env, static_cast<int>(j) + 1, xg);
            const double gmargin = std::isfinite(gv)
                                       ? gbound - std::abs(gv)
                                       : -std::numeric_limits<double>::infinity();
            note(gmargin, GrowthWitness{"g" + std::to_string(j + 1), t, {xg}, gv, gbound},
                 report.worst_margin, report.witness);
        }
    }

    // Side conditions: 0 <= b_l(t) <= B over the grid, 0 <= a <= B.
    for (double t : ts.points()) {
        const auto check_coeff = [&](double value, const std::string& kind) {
            note(std::min(value, env.B - value), GrowthWitness{kind, t, {}, value, env.B},
                 report.side_worst_margin, report.side_witness);
        };
        check_coeff(env.b0(t), "b0");
        for (std::size_t j = 0; j < env.f_terms.size(); ++j)
            check_coeff(env.f_terms[j].coeff(t), "b" + std::to_string(j + 1));
    }
    for (std::size_t j = 0; j < env.g_terms.size(); ++j) {
        const auto& block = env.g_terms[j];
        note(std::min(block.a0, env.B - block.a0),
             GrowthWitness{"a0_" + std::to_string(j + 1), 0.0, {}, block.a0, env.B},
             report.side_worst_margin, report.side_witness);
        for (std::size_t k = 0; k < block.terms.size(); ++k) {
            const double a = block.terms[k].coeff;
            note(std::min(a, env.B - a),
                 GrowthWitness{"a" + std::to_string(k + 1) + "_" + std::to_string(j + 1), 0.0,
                               {}, a, env.B},
                 report.side_worst_margin, report.side_witness);
        }
    }

    report.pass = report.worst_margin >= 0.0;
    report.side_pass = report.side_worst_margin >= 0.0;
    if (report.pass)
        report.witness.reset();
    if (report.side_pass)
        report.side_witness.reset();
    return report;
}

}  // namespace tsbvp
