#pragma once

#include "cohortscope/core.hpp"
#include "cohortscope/microenv.hpp"
#include "cohortscope/outlier.hpp"
#include "cohortscope/query.hpp"
#include "cohortscope/stats.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

// JSON encodings shared by the HTTP API and the CLI. Types appear as display
// labels; every number is finite. Dunn scores equal to the sentinel carry
// "sentinel": true next to them (heatmaps list sentinel cells instead).

namespace cohortscope::serialize {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

inline double finite(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return 0.0;
    return v > 0 ? stats::kDunnSentinel : -stats::kDunnSentinel;
}

inline bool is_sentinel(double v) { return std::abs(v) >= stats::kDunnSentinel; }

inline void put_score(json& obj, double score) {
    obj["score"] = finite(score);
    if (is_sentinel(score)) obj["sentinel"] = true;
}

inline json labels(const TypeSet& types, const CellTypeCatalog& catalog) {
    json out = json::array();
    for (TypeId t : types) out.push_back(catalog.label(t));
    return out;
}

inline json summary(const Project& p) {
    json cohorts = json::object();
    for (Role r : {Role::A, Role::B}) {
        const auto& c = p.cohort(r);
        json samples = json::array();
        std::size_t cells = 0;
        for (const auto& sid : c.sample_ids) {
            const auto n = p.sample(sid).size();
            cells += n;
            samples.push_back({{"id", sid}, {"cells", n}});
        }
        cohorts[to_string(r)] = {{"label", c.label}, {"sample_count", c.sample_ids.size()},
                                 {"cell_count", cells}, {"samples", std::move(samples)}};
    }
    return {{"cohorts", std::move(cohorts)},
            {"types", p.catalog.labels()},
            {"type_count", p.type_count()},
            {"radius", p.radius},
            {"cell_count", p.cell_count()}};
}

inline json subject(const stats::Subject& s, const CellTypeCatalog& catalog) {
    if (const auto* types = std::get_if<TypeSet>(&s)) return {{"types", labels(*types, catalog)}};
    return {{"query", to_json(std::get<MicroQuery>(s), catalog)}};
}

/// A subject on the wire: an array of labels (type set), an object with
/// "center" (MicroQuery), or {"types": [...]} / {"query": {...}}.
inline stats::Subject parse_subject(const json& j, const CellTypeCatalog& catalog) {
    if (j.is_array()) {
        auto set = parse_label_list(j, catalog, "subject");
        if (set.empty()) throw ArgumentError("subject type set is empty", "subject");
        return set;
    }
    if (j.is_object()) {
        if (j.contains("center")) return parse_query(j, catalog);
        if (auto t = j.find("types"); t != j.end() && j.size() == 1) return parse_subject(*t, catalog);
        if (auto q = j.find("query"); q != j.end() && j.size() == 1) return parse_query(*q, catalog);
    }
    if (j.is_string()) return TypeSet{catalog.resolve(j.get<std::string>(), "subject")};
    throw ArgumentError("subject must be a list of type labels or a microenvironment query", "subject");
}

inline json distribution(const stats::DistributionPair& d, const CellTypeCatalog& catalog) {
    json values = json::object();
    for (Role r : {Role::A, Role::B}) {
        json arr = json::array();
        for (const auto& v : d.values(r)) arr.push_back({{"sample", v.sample_id}, {"value", finite(v.value)}});
        values[to_string(r)] = std::move(arr);
    }
    return {{"subject", subject(d.subject, catalog)}, {"mode", stats::to_string(d.mode)}, {"values", std::move(values)}};
}

inline json density(const stats::DensityCurve& c) {
    json grid = json::array(), dens = json::array();
    for (double x : c.grid) grid.push_back(finite(x));
    for (double y : c.density) dens.push_back(finite(y));
    return {{"grid", std::move(grid)}, {"density", std::move(dens)}, {"bandwidth", finite(c.bandwidth)}};
}

inline json outliers(const outlier::OutlierReport& r, const CellTypeCatalog& catalog) {
    json cohorts = json::object();
    for (Role role : {Role::A, Role::B}) {
        const auto& c = r.cohort(role);
        json vals = json::array();
        for (const auto& v : c.values)
            vals.push_back({{"sample", v.sample_id}, {"value", finite(v.value)}, {"flag", outlier::to_string(v.flag)}});
        cohorts[to_string(role)] = {
            {"fences",
             {{"q1", finite(c.fences.q1)}, {"q3", finite(c.fences.q3)}, {"iqr", finite(c.fences.iqr)},
              {"low", finite(c.fences.low)}, {"high", finite(c.fences.high)}}},
            {"values", std::move(vals)}};
    }
    return {{"subject", subject(r.subject, catalog)}, {"mode", stats::to_string(r.mode)}, {"cohorts", std::move(cohorts)}};
}

inline json heatmap(const microenv::HeatmapResult& h, const CellTypeCatalog& catalog) {
    json rows = json::array();
    json sentinels = json::array();
    for (std::size_t i = 0; i < h.types; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < h.types; ++j) {
            const double v = h.at(static_cast<TypeId>(i), static_cast<TypeId>(j));
            row.push_back(finite(v));
            if (is_sentinel(v)) sentinels.push_back({i, j});
        }
        rows.push_back(std::move(row));
    }
    json out = {{"variant", microenv::to_string(h.variant)},
                {"labels", catalog.labels()},
                {"values", std::move(rows)},
                {"max_abs", finite(h.max_abs)}};
    if (h.metric) out["metric"] = stats::to_string(*h.metric);
    if (!sentinels.empty()) {
        out["sentinel_cells"] = std::move(sentinels);
        out["sentinel"] = true;
    }
    return out;
}

inline json ranking(const std::vector<stats::RankedSubject>& ranked, const CellTypeCatalog& catalog) {
    json out = json::array();
    for (const auto& r : ranked) {
        json e = {{"types", labels(r.subject, catalog)}};
        if (r.subject.size() == 1) {
            e["type"] = catalog.label(r.subject.front());
            e["type_id"] = r.subject.front();
        }
        put_score(e, r.score);
        out.push_back(std::move(e));
    }
    return out;
}

inline json remaining(const std::vector<microenv::RemainingPlot>& plots, const CellTypeCatalog& catalog) {
    json out = json::array();
    for (const auto& p : plots) {
        json e = {{"extension", p.extension ? json(catalog.label(*p.extension)) : json(nullptr)},
                  {"query", to_json(p.query, catalog)},
                  {"distribution", distribution(p.pair, catalog)}};
        put_score(e, p.score);
        out.push_back(std::move(e));
    }
    return out;
}

inline json error(const std::string& message, const std::string& field = {}) {
    json e = {{"error", message}};
    if (!field.empty()) e["field"] = field;
    return e;
}

}  // namespace cohortscope::serialize
