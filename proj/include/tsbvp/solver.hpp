#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tsbvp/operators.hpp"
#include "tsbvp/rng.hpp"

namespace tsbvp {

struct SolverConfig {
    double tol_residual = 1e-10;
    double tol_sign = 1e-9;
    int max_newton_iter = 50;
    double fd_step = 1e-7;  // relative forward-difference step
    int n_starts = 100;
    std::uint64_t seed = 0;
    double dedup_radius = 1e-6;
    double backtrack_factor = 0.5;
    int max_backtracks = 30;
    int threads = 1;  // execution knob only; results are independent of it

    void validate() const {
        if (!(tol_residual > 0.0) || !(tol_sign > 0.0) || !(fd_step > 0.0) ||
            !(dedup_radius > 0.0))
            throw std::invalid_argument("solver tolerances must be positive");
        if (max_newton_iter < 1 || n_starts < 1 || max_backtracks < 0)
            throw std::invalid_argument("solver iteration counts must be positive");
        if (!(backtrack_factor > 0.0) || !(backtrack_factor < 1.0))
            throw std::invalid_argument("backtracking factor must lie in (0, 1)");
    }
};

/// Norm shells from the radii r < L < R, all boundaries strict.
enum class Shell { U1, U2MinusU1, U3MinusU2, Outside };

inline const char* shell_name(Shell s) {
    switch (s) {
        case Shell::U1: return "U1";
        case Shell::U2MinusU1: return "U2_minus_U1";
        case Shell::U3MinusU2: return "U3_minus_U2";
        case Shell::Outside: return "outside";
    }
    return "outside";
}

inline Shell shell_of(double x_norm, const BallParams& params) {
    if (x_norm < params.r)
        return Shell::U1;
    if (x_norm < params.L)
        return Shell::U2MinusU1;
    if (x_norm < params.R)
        return Shell::U3MinusU2;
    return Shell::Outside;
}

enum class Sign { Negative, Zero, Positive };

inline const char* sign_name(Sign s) {
    switch (s) {
        case Sign::Negative: return "-";
        case Sign::Zero: return "0";
        case Sign::Positive: return "+";
    }
    return "0";
}

/// A verified candidate solution with its independently recomputed residual,
/// norm, per-point signs, and shell placement.
struct SolutionRecord {
    GridFunction u;
    double residual_inf = 0.0;
    double x_norm = 0.0;
    std::vector<Sign> sign_report;
    Shell shell = Shell::Outside;
    bool nonnegative = false;
};

struct NewtonResult {
    std::optional<SolutionRecord> record;
    int iterations = 0;
    double final_residual = std::numeric_limits<double>::quiet_NaN();
    std::string diagnostic;

    bool ok() const { return record.has_value(); }
};

/// The flattened residual vector: interior residuals in increasing t, then
/// the boundary-condition residuals, then u(sigma^{n-1}(0)) and u(T).
inline std::vector<double> assemble_residual(const BvpProblem& p, const GridFunction& u) {
    return residual_bundle(p, u).flatten();
}

namespace detail {

/// Partial-pivot Gaussian elimination on a row-major n x n matrix; solves
/// in place into b. Returns false on a zero or non-finite pivot.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double cand = std::abs(a[row * n + col]);
            if (cand > best) {
                best = cand;
                pivot = row;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best))
            return false;
        if (pivot != col) {
            for (std::size_t k = col; k < n; ++k)
                std::swap(a[pivot * n + k], a[col * n + k]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = a[row * n + col] * inv;
            if (factor == 0.0)
                continue;
            for (std::size_t k = col + 1; k < n; ++k)
                a[row * n + k] -= factor * a[col * n + k];
            b[row] -= factor * b[col];
        }
    }
    for (std::size_t row = n; row-- > 0;) {
        double sum = b[row];
        for (std::size_t k = row + 1; k < n; ++k)
            sum -= a[row * n + k] * b[k];
        b[row] = sum / a[row * n + row];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(b[i]))
            return false;
    return true;
}

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x))
            return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(x));
    }
    return m;
}

}  // namespace detail

/// Build a record for a solved grid function, recomputing the residual
/// through a fresh evaluation rather than trusting the solver's cached value.
inline SolutionRecord make_solution_record(const BvpProblem& p, const GridFunction& u,
                                           const SolverConfig& cfg, double cached_residual) {
    if (!p.params)
        throw std::invalid_argument("solution records need the radii parameters");
    SolutionRecord rec{u, 0.0, 0.0, {}, Shell::Outside, false};
    rec.residual_inf = residual_bundle(p, u).max_abs();
    if (std::abs(rec.residual_inf - cached_residual) >
        1e-12 * std::max(1.0, std::abs(cached_residual)))
        throw std::logic_error("residual recomputation does not match the solver's value");
    rec.x_norm = cn_norm(u, p.order);
    rec.shell = shell_of(rec.x_norm, *p.params);
    double min_value = std::numeric_limits<double>::infinity();
    for (double v : u.values()) {
        min_value = std::min(min_value, v);
        if (v < -cfg.tol_sign)
            rec.sign_report.push_back(Sign::Negative);
        else if (v > cfg.tol_sign)
            rec.sign_report.push_back(Sign::Positive);
        else
            rec.sign_report.push_back(Sign::Zero);
    }
    rec.nonnegative = min_value >= -cfg.tol_sign;
    return rec;
}

/// Damped Newton with a forward-difference Jacobian. Success means the
/// residual sup norm dropped below tol_residual within the iteration budget;
/// everything else is a failure with a diagnostic, never an exception.
inline NewtonResult newton_solve(const BvpProblem& p, const GridFunction& u0,
                                 const SolverConfig& cfg) {
    cfg.validate();
    p.validate();
    if (!p.params)
        throw std::invalid_argument("newton_solve needs the radii parameters");
    const std::size_t N = p.scale->size();
    if (u0.size() != N || u0.derivative_order() != 0)
        throw std::invalid_argument("newton_solve start must live on the full grid");

    const auto eval = [&](const std::vector<double>& x) {
        return assemble_residual(p, GridFunction(p.scale, x));
    };

    NewtonResult out;
    std::vector<double> x = u0.values();
    std::vector<double> r = eval(x);
    double rn = detail::inf_norm(r);

    for (int it = 0; it < cfg.max_newton_iter; ++it) {
        if (!std::isfinite(rn)) {
            out.diagnostic = "non-finite residual";
            out.final_residual = rn;
            return out;
        }
        if (rn < cfg.tol_residual)
            break;

        std::vector<double> jac(N * N);
        std::vector<double> xp = x;
        for (std::size_t i = 0; i < N; ++i) {
            const double h = cfg.fd_step * (1.0 + std::abs(x[i]));
            xp[i] = x[i] + h;
            const std::vector<double> rp = eval(xp);
            xp[i] = x[i];
            for (std::size_t row = 0; row < N; ++row)
                jac[row * N + i] = (rp[row] - r[row]) / h;
        }
        std::vector<double> step(N);
        for (std::size_t i = 0; i < N; ++i)
            step[i] = -r[i];
        if (!detail::solve_dense(jac, step, N)) {
            out.diagnostic = "singular Jacobian";
            out.iterations = it;
            out.final_residual = rn;
            return out;
        }

        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k <= cfg.max_backtracks; ++k) {
            std::vector<double> trial = x;
            for (std::size_t i = 0; i < N; ++i)
                trial[i] += lambda * step[i];
            const std::vector<double> rt = eval(trial);
            const double rtn = detail::inf_norm(rt);
            if (std::isfinite(rtn) && rtn < rn) {
                x = std::move(trial);
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lambda *= cfg.backtrack_factor;
        }
        if (!accepted) {
            out.diagnostic =
                "no residual decrease after step halvings (Jacobian ill-conditioned or singular)";
            out.iterations = it;
            out.final_residual = rn;
            return out;
        }
        out.iterations = it + 1;
    }

    out.final_residual = rn;
    if (!(rn < cfg.tol_residual)) {
        out.diagnostic = "iteration budget exhausted";
        return out;
    }
    out.record = make_solution_record(p, GridFunction(p.scale, x), cfg, rn);
    return out;
}

struct SearchStats {
    int starts = 0;
    int successes = 0;
    int failures = 0;
    int dedup_merges = 0;
};

struct SearchResult {
    std::vector<SolutionRecord> records;
    SearchStats stats;
};

namespace detail {

/// Start fields for the multistart search: the zero start plus random fields
/// scaled so their norms stratify [0, R]. Each start draws from its own
/// derived stream, so results do not depend on evaluation order.
inline std::vector<std::vector<double>> multistart_fields(const BvpProblem& p,
                                                          const SolverConfig& cfg) {
    const std::size_t N = p.scale->size();
    std::vector<std::vector<double>> starts;
    starts.reserve(static_cast<std::size_t>(cfg.n_starts));
    starts.emplace_back(N, 0.0);
    const double big_radius = p.params->R;
    for (int k = 1; k < cfg.n_starts; ++k) {
        Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(k)));
        std::vector<double> field(N);
        for (double& v : field)
            v = rng.uniform(-1.0, 1.0);
        const double target =
            big_radius * static_cast<double>(k) / static_cast<double>(cfg.n_starts - 1);
        const double norm = cn_norm(GridFunction(p.scale, field), p.order);
        if (norm > 0.0) {
            const double factor = target / norm;
            for (double& v : field)
                v *= factor;
        }
        starts.push_back(std::move(field));
    }
    return starts;
}

inline bool records_duplicate(const SolutionRecord& a, const SolutionRecord& b, double radius) {
    if (std::abs(a.x_norm - b.x_norm) >= radius)
        return false;
    return max_abs_diff(a.u, b.u) < radius;
}

}  // namespace detail

/// Deterministic multistart Newton search. Starts run independently (and may
/// run on several threads); merging happens in start-index order, so the
/// outcome never depends on scheduling. An empty record list is a valid,
/// reported outcome.
inline SearchResult multistart_search(const BvpProblem& p, const SolverConfig& cfg) {
    cfg.validate();
    p.validate();
    if (!p.params)
        throw std::invalid_argument("multistart search needs the radii parameters");

    const auto starts = detail::multistart_fields(p, cfg);
    std::vector<NewtonResult> outcomes(starts.size());

    int thread_count = cfg.threads <= 0
                           ? static_cast<int>(std::thread::hardware_concurrency())
                           : cfg.threads;
    thread_count = std::max(1, std::min<int>(thread_count, static_cast<int>(starts.size())));

    if (thread_count == 1) {
        for (std::size_t k = 0; k < starts.size(); ++k)
            outcomes[k] = newton_solve(p, GridFunction(p.scale, starts[k]), cfg);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        const auto worker = [&] {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= starts.size())
                    return;
                try {
                    outcomes[k] = newton_solve(p, GridFunction(p.scale, starts[k]), cfg);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int i = 0; i < thread_count; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
        if (error)
            std::rethrow_exception(error);
    }

    SearchResult result;
    result.stats.starts = static_cast<int>(starts.size());
    for (const auto& outcome : outcomes) {
        if (!outcome.ok()) {
            ++result.stats.failures;
            continue;
        }
        ++result.stats.successes;
        const SolutionRecord& rec = *outcome.record;
        bool merged = false;
        for (const auto& kept : result.records) {
            if (detail::records_duplicate(rec, kept, cfg.dedup_radius)) {
                ++result.stats.dedup_merges;
                merged = true;
                break;
            }
        }
        if (!merged)
            result.records.push_back(rec);
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const SolutionRecord& a, const SolutionRecord& b) {
                  if (a.x_norm != b.x_norm)
                      return a.x_norm < b.x_norm;
                  return a.u.values() < b.u.values();
              });
    return result;
}

}  // namespace tsbvp
