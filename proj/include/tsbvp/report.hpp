#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "tsbvp/growth.hpp"
#include "tsbvp/operators.hpp"
#include "tsbvp/solver.hpp"

namespace tsbvp {

/// Machine reports are JSON documents with a fixed key order; the dump is
/// byte-stable for identical inputs.
using Json = nlohmann::ordered_json;

inline Json growth_witness_to_json(const GrowthWitness& w) {
    Json j;
    j["kind"] = w.kind;
    j["t"] = w.t;
    j["x"] = w.x;
    j["value"] = w.value;
    j["bound"] = w.bound;
    return j;
}

inline Json growth_check_to_json(const GrowthCheckReport& r) {
    Json j;
    j["hypothesis"] = "A1";
    j["status"] = r.pass && r.side_pass ? "pass" : "fail";
    j["sampling_based"] = true;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["box"] = Json::array({r.box_lo, r.box_hi});
    j["worst_margin"] = r.worst_margin;
    j["witness"] = r.witness ? growth_witness_to_json(*r.witness) : Json(nullptr);
    j["side_conditions"]["status"] = r.side_pass ? "pass" : "fail";
    j["side_conditions"]["worst_margin"] = r.side_worst_margin;
    j["side_conditions"]["witness"] =
        r.side_witness ? growth_witness_to_json(*r.side_witness) : Json(nullptr);
    return j;
}

inline Json radii_check_to_json(const BallParams& p, bool pass) {
    Json j;
    j["hypothesis"] = "A2";
    j["condition"] = "r < L < R";
    j["status"] = pass ? "pass" : "fail";
    j["r"] = p.r;
    j["L"] = p.L;
    j["R"] = p.R;
    return j;
}

inline Json bounds_to_json(const HypothesisBounds& hb) {
    Json j;
    j["B1"] = hb.B1;
    j["A"] = hb.A;
    j["m"] = hb.m;
    j["r"] = hb.r;
    j["L"] = hb.L;
    j["R"] = hb.R;
    j["eta"] = hb.eta;
    j["eta_defaulted"] = hb.eta_defaulted;
    j["threshold_r"] = hb.threshold_r;
    j["threshold_R"] = hb.threshold_R;
    j["inner_exclusion_strict"] = hb.inner_exclusion_strict;
    j["outer_exclusion_ordered"] = hb.outer_exclusion_ordered;
    j["radii_ordered"] = hb.radii_ordered;
    j["degenerate"] = hb.degenerate;
    j["violated"] = hb.violated;
    return j;
}

inline Json record_to_json(const SolutionRecord& rec) {
    Json j;
    j["values"] = rec.u.values();
    j["residual_inf"] = rec.residual_inf;
    j["x_norm"] = rec.x_norm;
    j["shell"] = shell_name(rec.shell);
    j["nonnegative"] = rec.nonnegative;
    Json signs = Json::array();
    for (Sign s : rec.sign_report)
        signs.push_back(sign_name(s));
    j["sign_report"] = signs;
    return j;
}

inline Json search_to_json(const SearchResult& result) {
    Json j;
    Json records = Json::array();
    int u1 = 0, u2 = 0, u3 = 0, outside = 0;
    for (const auto& rec : result.records) {
        records.push_back(record_to_json(rec));
        switch (rec.shell) {
            case Shell::U1: ++u1; break;
            case Shell::U2MinusU1: ++u2; break;
            case Shell::U3MinusU2: ++u3; break;
            case Shell::Outside: ++outside; break;
        }
    }
    j["records"] = records;
    j["shell_counts"]["U1"] = u1;
    j["shell_counts"]["U2_minus_U1"] = u2;
    j["shell_counts"]["U3_minus_U2"] = u3;
    j["shell_counts"]["outside"] = outside;
    j["stats"]["starts"] = result.stats.starts;
    j["stats"]["successes"] = result.stats.successes;
    j["stats"]["failures"] = result.stats.failures;
    j["stats"]["dedup_merges"] = result.stats.dedup_merges;
    return j;
}

inline Json relaxation_to_json(const RelaxationResult& r, double eta, int max_iter, double tol) {
    Json j;
    j["eta"] = eta;
    j["max_iter"] = max_iter;
    j["tol"] = tol;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    Json trace = Json::array();
    for (const auto& step : r.trace) {
        Json s;
        s["iteration"] = step.iteration;
        s["update_norm"] = step.update_norm;
        s["residual_inf"] = step.residual_inf;
        trace.push_back(s);
    }
    j["trace"] = trace;
    j["terminal"]["values"] = r.terminal.values();
    return j;
}

namespace detail {

inline bool all_scalars(const Json& j) {
    for (const auto& item : j)
        if (item.is_structured())
            return false;
    return true;
}

inline void render_lines(const Json& j, const std::string& path, std::ostream& os) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            const std::string child = path.empty() ? key : path + "." + key;
            render_lines(value, child, os);
        }
        return;
    }
    if (j.is_array()) {
        if (all_scalars(j)) {
            os << path << ": " << j.dump() << "\n";
            return;
        }
        for (std::size_t i = 0; i < j.size(); ++i)
            render_lines(j[i], path + "[" + std::to_string(i) + "]", os);
        return;
    }
    os << path << ": " << j.dump() << "\n";
}

}  // namespace detail

/// Flat human rendering: one "dotted.path: value" line per leaf, so every
/// number in the machine report appears verbatim in the human report.
inline void render_human(const Json& j, std::ostream& os) {
    detail::render_lines(j, "", os);
}

inline std::string machine_text(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace tsbvp
