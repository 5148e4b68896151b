#pragma once

#include "cohortscope/core.hpp"
#include "cohortscope/neighborhood.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>
#include <vector>

// =============================================================================
// FILE: cohortscope/query.hpp
// BRIEF: Microenvironment queries: center types (any of), environment types
//        (all of), optional exclusivity (no other neighbor types allowed)
// =============================================================================

namespace cohortscope {

/// Sorted, duplicate-free set of type ids.
using TypeSet = std::vector<TypeId>;

inline TypeSet make_type_set(std::vector<TypeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

struct MicroQuery {
    TypeSet center;
    TypeSet env;
    bool exclusive = false;

    MicroQuery() = default;
    MicroQuery(std::vector<TypeId> c, std::vector<TypeId> e, bool excl = false)
        : center(make_type_set(std::move(c))), env(make_type_set(std::move(e))), exclusive(excl) {}

    friend bool operator==(const MicroQuery&, const MicroQuery&) = default;
};

struct MatchResult {
    std::size_t count = 0;
    std::vector<CellIndex> cells;  // ascending sample position
};

namespace query_detail {

inline void check(const MicroQuery& q, std::size_t type_count) {
    if (q.center.empty()) throw ArgumentError("query center must name at least one type", "center");
    for (TypeId t : q.center)
        if (t >= type_count) throw ArgumentError("query center type out of range", "center");
    for (TypeId t : q.env)
        if (t >= type_count) throw ArgumentError("query environment type out of range", "env");
}

/// Evaluates `q` over every cell of one sample; `emit(c)` receives matches.
template <typename Emit>
void for_each_match(const Sample& sample, const SampleNeighborhoods& nb, const MicroQuery& q,
                    std::size_t type_count, Emit&& emit) {
    std::vector<char> is_center(type_count, 0);
    for (TypeId t : q.center) is_center[t] = 1;
    const std::size_t n = sample.cells.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_center[sample.cells[i].type_id]) continue;
        const auto c = static_cast<CellIndex>(i);
        std::uint32_t covered = 0;
        bool ok = true;
        for (TypeId t : q.env) {
            const auto k = nb.type_count(c, t);
            if (k == 0) {
                ok = false;
                break;
            }
            covered += k;
        }
        if (ok && q.exclusive && covered != nb.degree(c)) ok = false;
        if (ok) emit(c);
    }
}

}  // namespace query_detail

/// Cells of `sample` matching `q`. A cell matches when its type is in
/// `q.center`, every type of `q.env` occurs among its neighbors and, for
/// exclusive queries, no neighbor has a type outside `q.env`.
inline MatchResult count_matches(const Sample& sample, const SampleNeighborhoods& nb, const MicroQuery& q,
                                 std::size_t type_count) {
    query_detail::check(q, type_count);
    MatchResult r;
    query_detail::for_each_match(sample, nb, q, type_count, [&](CellIndex c) { r.cells.push_back(c); });
    r.count = r.cells.size();
    return r;
}

inline MatchResult count_matches(const Project& project, const NeighborhoodIndex& index,
                                 const std::string& sample_id, const MicroQuery& q) {
    return count_matches(project.sample(sample_id), index.sample(sample_id), q, project.type_count());
}

/// Match count only; no id list is materialized.
inline std::size_t match_count(const Sample& sample, const SampleNeighborhoods& nb, const MicroQuery& q,
                               std::size_t type_count) {
    query_detail::check(q, type_count);
    std::size_t n = 0;
    query_detail::for_each_match(sample, nb, q, type_count, [&](CellIndex) { ++n; });
    return n;
}

inline std::vector<std::string> matched_ids(const Sample& sample, const MatchResult& r) {
    std::vector<std::string> ids;
    ids.reserve(r.cells.size());
    for (CellIndex c : r.cells) ids.push_back(sample.cells[c].cell_id);
    return ids;
}

// Wire form: {"center": [<label>...], "env": [<label>...], "exclusive": <bool>}

inline TypeSet parse_label_list(const nlohmann::json& j, const CellTypeCatalog& catalog, const char* field) {
    if (!j.is_array()) throw ArgumentError(std::string("'") + field + "' must be an array of type labels", field);
    std::vector<TypeId> ids;
    for (const auto& v : j) {
        if (!v.is_string()) throw ArgumentError(std::string("'") + field + "' must contain only strings", field);
        ids.push_back(catalog.resolve(v.get<std::string>(), field));
    }
    return make_type_set(std::move(ids));
}

inline MicroQuery parse_query(const nlohmann::json& j, const CellTypeCatalog& catalog) {
    if (!j.is_object()) throw ArgumentError("query must be a JSON object", "query");
    for (const auto& [key, _] : j.items())
        if (key != "center" && key != "env" && key != "exclusive" && key != "mode" && key != "metric")
            throw ArgumentError("unexpected query field '" + key + "'", key);
    auto c = j.find("center");
    if (c == j.end()) throw ArgumentError("query lacks 'center'", "center");
    MicroQuery q;
    q.center = parse_label_list(*c, catalog, "center");
    if (q.center.empty()) throw ArgumentError("query center must name at least one type", "center");
    if (auto e = j.find("env"); e != j.end()) q.env = parse_label_list(*e, catalog, "env");
    if (auto x = j.find("exclusive"); x != j.end()) {
        if (!x->is_boolean()) throw ArgumentError("'exclusive' must be a boolean", "exclusive");
        q.exclusive = x->get<bool>();
    }
    return q;
}

inline nlohmann::json to_json(const MicroQuery& q, const CellTypeCatalog& catalog) {
    nlohmann::json center = nlohmann::json::array(), env = nlohmann::json::array();
    for (TypeId t : q.center) center.push_back(catalog.label(t));
    for (TypeId t : q.env) env.push_back(catalog.label(t));
    return {{"center", std::move(center)}, {"env", std::move(env)}, {"exclusive", q.exclusive}};
}

}  // namespace cohortscope
