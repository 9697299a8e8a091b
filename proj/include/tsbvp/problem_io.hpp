#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tsbvp/expr.hpp"
#include "tsbvp/problem.hpp"
#include "tsbvp/report.hpp"
#include "tsbvp/solver.hpp"

namespace tsbvp {

/// Problem file or configuration error; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fully bound problem: the problem itself plus the solver and sampling
/// configuration, the source document, and its canonical form and hash.
struct LoadedProblem {
    BvpProblem problem;
    SolverConfig solver;
    GrowthSampler a1_check;
    Json document;
    std::string canonical;
    std::string hash;
    std::string name;
};

/// Canonical serialization: parse and re-dump with sorted keys and no
/// whitespace. Idempotent, so hashing it is stable across formatting.
inline std::string canonical_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text).dump();
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("problem file is not valid JSON: ") + e.what());
    }
}

inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace detail {

inline const Json& require_field(const Json& j, const std::string& key,
                                 const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError("missing field '" + key + "' in " + where);
    return *it;
}

inline double number_field(const Json& j, const std::string& where) {
    if (!j.is_number())
        throw ConfigError("expected a number in " + where);
    return j.get<double>();
}

/// Coefficients may be numbers or expression strings (of t, or constant).
inline std::function<double(double)> coefficient_of_t(const Json& j, const std::string& where) {
    if (j.is_number()) {
        const double v = j.get<double>();
        return [v](double) { return v; };
    }
    if (j.is_string()) {
        Expr e = [&] {
            try {
                return Expr::parse(j.get<std::string>());
            } catch (const ParseError& pe) {
                throw ConfigError("bad expression in " + where + ": " + pe.what());
            }
        }();
        for (const auto& var : e.free_variables())
            if (var != "t")
                throw ConfigError("coefficient in " + where + " may only use 't', got '" +
                                  var + "'");
        return [e](double t) {
            const std::pair<std::string_view, double> bindings[] = {{"t", t}};
            return e.eval(bindings);
        };
    }
    throw ConfigError("expected a number or expression string in " + where);
}

inline double constant_coefficient(const Json& j, const std::string& where) {
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        Expr e = Expr::parse(j.get<std::string>());
        if (!e.free_variables().empty())
            throw ConfigError("coefficient in " + where + " must be constant");
        return e.eval(std::span<const std::pair<std::string_view, double>>{});
    }
    throw ConfigError("expected a number or constant expression in " + where);
}

inline TimeScalePtr parse_timescale(const Json& spec) {
    const std::string kind = require_field(spec, "kind", "timescale").get<std::string>();
    try {
        if (kind == "explicit") {
            const Json& pts = require_field(spec, "points", "timescale");
            std::vector<double> points;
            for (const auto& p : pts)
                points.push_back(number_field(p, "timescale.points"));
            return TimeScale::from_points(std::move(points));
        }
        if (kind == "q_scale") {
            const double q = number_field(require_field(spec, "q", "timescale"), "timescale.q");
            const int k_max =
                static_cast<int>(number_field(require_field(spec, "K", "timescale"), "timescale.K"));
            return TimeScale::q_scale(q, k_max);
        }
        if (kind == "uniform") {
            const double h = number_field(require_field(spec, "h", "timescale"), "timescale.h");
            const double horizon =
                number_field(require_field(spec, "T", "timescale"), "timescale.T");
            return TimeScale::uniform(h, horizon);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad timescale: ") + e.what());
    }
    throw ConfigError("timescale.kind must be one of explicit | q_scale | uniform");
}

inline GrowthEnvelope parse_envelope(const Json& j, int order) {
    GrowthEnvelope env;
    env.order = order;
    env.B = number_field(require_field(j, "B", "envelope"), "envelope.B");
    const Json& ft = require_field(j, "f_terms", "envelope");
    env.b0 = coefficient_of_t(require_field(ft, "b0", "envelope.f_terms"), "envelope.f_terms.b0");
    const Json& terms = require_field(ft, "terms", "envelope.f_terms");
    if (!terms.is_array() || terms.size() != static_cast<std::size_t>(order))
        throw ConfigError("envelope.f_terms.terms must list exactly n terms");
    for (const auto& term : terms) {
        InteriorTerm it;
        it.coeff = coefficient_of_t(require_field(term, "b", "envelope.f_terms.terms"),
                                    "envelope.f_terms.terms.b");
        it.exponent =
            number_field(require_field(term, "k", "envelope.f_terms.terms"), "envelope terms.k");
        env.f_terms.push_back(std::move(it));
    }
    const Json& gt = require_field(j, "g_terms", "envelope");
    if (!gt.is_array() || gt.size() + 1 != static_cast<std::size_t>(order))
        throw ConfigError("envelope.g_terms must list exactly n - 1 blocks");
    for (const auto& block : gt) {
        BoundaryEnvelope be;
        be.a0 = constant_coefficient(require_field(block, "a0", "envelope.g_terms"),
                                     "envelope.g_terms.a0");
        for (const auto& term : require_field(block, "terms", "envelope.g_terms")) {
            BoundaryTerm bt;
            bt.coeff = constant_coefficient(require_field(term, "a", "envelope.g_terms.terms"),
                                            "envelope.g_terms.terms.a");
            bt.exponent = number_field(require_field(term, "l", "envelope.g_terms.terms"),
                                       "envelope terms.l");
            be.terms.push_back(bt);
        }
        env.g_terms.push_back(std::move(be));
    }
    try {
        env.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad envelope: ") + e.what());
    }
    return env;
}

inline BallParams parse_params(const Json& j, const GrowthEnvelope& env) {
    BallParams bp;
    bp.r = number_field(require_field(j, "r", "params"), "params.r");
    bp.L = number_field(require_field(j, "L", "params"), "params.L");
    bp.R = number_field(require_field(j, "R", "params"), "params.R");
    bp.m = number_field(require_field(j, "m", "params"), "params.m");
    if (j.contains("A")) {
        bp.A = number_field(j["A"], "params.A");
    } else {
        const double b1 = growth_bound(env);
        if (!(b1 > 0.0))
            throw ConfigError("params.A required when the growth bound is zero");
        bp.A = 1.0 / (10.0 * b1);
    }
    if (j.contains("eta"))
        bp.eta = number_field(j["eta"], "params.eta");
    if (!(bp.r > 0.0) || !(bp.L > 0.0) || !(bp.R > 0.0) || !(bp.m > 0.0) || !(bp.A > 0.0))
        throw ConfigError("params r, L, R, m, A must be positive");
    return bp;
}

inline SolverConfig parse_solver(const Json& j) {
    SolverConfig cfg;
    const auto get_num = [&](const char* key, double& out) {
        if (j.contains(key))
            out = number_field(j[key], std::string("solver.") + key);
    };
    const auto get_int = [&](const char* key, int& out) {
        if (j.contains(key))
            out = static_cast<int>(number_field(j[key], std::string("solver.") + key));
    };
    get_num("tol_residual", cfg.tol_residual);
    get_num("tol_sign", cfg.tol_sign);
    get_int("max_newton_iter", cfg.max_newton_iter);
    get_num("fd_step", cfg.fd_step);
    get_int("n_starts", cfg.n_starts);
    if (j.contains("seed"))
        cfg.seed = j["seed"].get<std::uint64_t>();
    get_num("dedup_radius", cfg.dedup_radius);
    get_num("backtrack_factor", cfg.backtrack_factor);
    get_int("max_backtracks", cfg.max_backtracks);
    get_int("threads", cfg.threads);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad solver config: ") + e.what());
    }
    return cfg;
}

/// Bind an interior expression over t, x1..xn. Evaluation errors at wild
/// arguments surface as NaN so the solver can backtrack.
inline std::function<double(double, std::span<const double>)> bind_interior(const Expr& e,
                                                                            int order) {
    std::vector<std::string> allowed{"t"};
    for (int j = 1; j <= order; ++j)
        allowed.push_back("x" + std::to_string(j));
    for (const auto& var : e.free_variables())
        if (std::find(allowed.begin(), allowed.end(), var) == allowed.end())
            throw ConfigError("f may only use t, x1..x" + std::to_string(order) + "; got '" +
                              var + "'");
    return [e, order](double t, std::span<const double> xs) {
        std::vector<std::pair<std::string_view, double>> bindings;
        bindings.reserve(static_cast<std::size_t>(order) + 1);
        static const std::vector<std::string> names = [] {
            std::vector<std::string> v;
            for (int j = 1; j <= 16; ++j)
                v.push_back("x" + std::to_string(j));
            return v;
        }();
        bindings.emplace_back("t", t);
        for (int j = 0; j < order; ++j)
            bindings.emplace_back(names[static_cast<std::size_t>(j)],
                                  xs[static_cast<std::size_t>(j)]);
        try {
            return e.eval(bindings);
        } catch (const EvalError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
}

inline std::function<double(double)> bind_boundary(const Expr& e) {
    for (const auto& var : e.free_variables())
        if (var != "x")
            throw ConfigError("g expressions may only use 'x'; got '" + var + "'");
    return [e](double x) {
        const std::pair<std::string_view, double> bindings[] = {{"x", x}};
        try {
            return e.eval(bindings);
        } catch (const EvalError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
}

}  // namespace detail

inline LoadedProblem parse_problem_text(const std::string& text, std::string name) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("problem file is not valid JSON: ") + e.what());
    }

    LoadedProblem lp;
    lp.document = doc;
    lp.canonical = canonical_json(text);
    lp.hash = fnv1a_hex(lp.canonical);
    lp.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>()
                                                              : std::move(name);

    BvpProblem& p = lp.problem;
    p.scale = detail::parse_timescale(detail::require_field(doc, "timescale", "problem"));
    p.order = static_cast<int>(
        detail::number_field(detail::require_field(doc, "n", "problem"), "n"));
    if (p.order < 1)
        throw ConfigError("n must be >= 1");

    const std::string f_text =
        detail::require_field(doc, "f", "problem").get<std::string>();
    Expr f_expr = [&] {
        try {
            return Expr::parse(f_text);
        } catch (const ParseError& pe) {
            throw ConfigError(std::string("bad expression in f: ") + pe.what());
        }
    }();
    p.f = detail::bind_interior(f_expr, p.order);

    if (p.order > 1) {
        const Json& g_list = detail::require_field(doc, "g", "problem");
        if (!g_list.is_array() || g_list.size() + 1 != static_cast<std::size_t>(p.order))
            throw ConfigError("g must list exactly n - 1 expressions");
        for (const auto& item : g_list) {
            Expr g_expr = [&] {
                try {
                    return Expr::parse(item.get<std::string>());
                } catch (const ParseError& pe) {
                    throw ConfigError(std::string("bad expression in g: ") + pe.what());
                }
            }();
            p.g.push_back(detail::bind_boundary(g_expr));
        }
    } else if (doc.contains("g") && !doc["g"].empty()) {
        throw ConfigError("g must be empty for order-1 problems");
    }

    p.envelope = detail::parse_envelope(detail::require_field(doc, "envelope", "problem"),
                                        p.order);
    p.params = detail::parse_params(detail::require_field(doc, "params", "problem"), *p.envelope);

    if (doc.contains("solver"))
        lp.solver = detail::parse_solver(doc["solver"]);
    if (doc.contains("a1_check")) {
        const Json& a1 = doc["a1_check"];
        if (a1.contains("box")) {
            if (!a1["box"].is_array() || a1["box"].size() != 2)
                throw ConfigError("a1_check.box must be [lo, hi]");
            lp.a1_check.box_lo = detail::number_field(a1["box"][0], "a1_check.box");
            lp.a1_check.box_hi = detail::number_field(a1["box"][1], "a1_check.box");
        }
        if (a1.contains("samples"))
            lp.a1_check.samples =
                static_cast<int>(detail::number_field(a1["samples"], "a1_check.samples"));
        if (a1.contains("seed"))
            lp.a1_check.seed = a1["seed"].get<std::uint64_t>();
    }

    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad problem: ") + e.what());
    }
    return lp;
}

inline LoadedProblem load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_text(buf.str(), path);
}

/// The bundled second-order example problem on the geometric scale
/// {0, 1, 4, 16, 64, 256}.
inline std::string builtin_example_text() {
    return R"json({
  "name": "bundled-example",
  "timescale": {"kind": "q_scale", "q": 4, "K": 4},
  "n": 2,
  "f": "1 + x1/(100*(1 + x1^2)) + x2/(10*(1 + x2^2 + x2^4))",
  "g": ["1/2 + x/(3*(1 + x^2 + x^4)) + x^2/(4*(1 + x^2))"],
  "envelope": {
    "B": 1,
    "f_terms": {"b0": "1", "terms": [{"b": "0.01", "k": 1}, {"b": "0.1", "k": 1}]},
    "g_terms": [{"a0": 0.5, "terms": [{"a": 0.3333333333333333, "l": 1}, {"a": 0.25, "l": 2}]}]
  },
  "params": {"m": 1050, "r": 4, "L": 5, "R": 10},
  "solver": {"n_starts": 100, "seed": 0}
}
)json";
}

inline LoadedProblem builtin_example() {
    return parse_problem_text(builtin_example_text(), "builtin-example");
}

/// Problem block common to every report; records the interior-extension
/// convention used by the integral operator alongside the identity data.
inline Json problem_summary(const LoadedProblem& lp) {
    Json j;
    j["name"] = lp.name;
    j["hash"] = lp.hash;
    j["n"] = lp.problem.order;
    j["grid_size"] = lp.problem.scale->size();
    j["T"] = lp.problem.scale->horizon();
    j["points"] = lp.problem.scale->points();
    j["interior_extension"] = "zero_outside_collocation";
    return j;
}

}  // namespace tsbvp
