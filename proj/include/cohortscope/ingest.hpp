#pragma once

#include "cohortscope/core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// =============================================================================
// FILE: cohortscope/ingest.hpp
// BRIEF: Project loading, validation and writing
//
// On-disk layout:
//   project.json     {"radius", "types", "cohorts": {"A": {...}, "B": {...}}, "outlines"?}
//   <sample>.csv     header cell_id,x,y,type ; type is a catalog label
//   <outline>.json   {<cell_id>: [[x,y],...], ...}
// Relative paths inside project.json resolve against its directory.
// =============================================================================

namespace cohortscope::ingest {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read file '" + path.string() + "'", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write file '" + path.string() + "'", path.string());
    out << data;
    if (!out) throw IngestError("write failed for '" + path.string() + "'", path.string());
}

inline double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw IngestError(where + ": '" + std::string(s) + "' is not a number", where);
    if (!std::isfinite(v)) throw IngestError(where + ": coordinate is not finite", where);
    return v;
}

/// Splits CSV text into records. Handles quoted fields with doubled quotes.
inline std::vector<std::vector<std::string>> split_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"': quoted = true; any = true; break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            any = true;
            break;
        case '\r': break;
        case '\n':
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
            break;
        default: field += c; any = true;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline const ordered_json& require(const ordered_json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw IngestError("missing field '" + path + "'", path);
    return *it;
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

inline std::string safe_file_stem(const std::string& id) {
    std::string out;
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

}  // namespace detail

/// Parses one cell table. Types are resolved against `catalog`.
inline Sample parse_cell_table(std::string_view csv, const std::string& sample_id,
                               const CellTypeCatalog& catalog) {
    auto rows = detail::split_csv(csv);
    const std::string where = "sample '" + sample_id + "'";
    if (rows.empty()) throw IngestError(where + ": cell table is empty", "samples." + sample_id);

    const auto& header = rows.front();
    auto trim = [](std::string s) {
        while (!s.empty() && s.back() == ' ') s.pop_back();
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        return s;
    };
    int col_id = -1, col_x = -1, col_y = -1, col_type = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto h = trim(header[i]);
        if (h == "cell_id") col_id = static_cast<int>(i);
        else if (h == "x") col_x = static_cast<int>(i);
        else if (h == "y") col_y = static_cast<int>(i);
        else if (h == "type") col_type = static_cast<int>(i);
    }
    for (auto [col, name] : {std::pair{col_id, "cell_id"}, {col_x, "x"}, {col_y, "y"}, {col_type, "type"}}) {
        if (col < 0)
            throw IngestError(where + ": cell table header lacks column '" + name + "'", name);
    }
    const auto width = static_cast<std::size_t>(std::max({col_id, col_x, col_y, col_type})) + 1;

    Sample sample;
    sample.sample_id = sample_id;
    sample.cells.reserve(rows.size() - 1);
    std::unordered_map<std::string, TypeId> by_label;
    for (std::size_t t = catalog.size(); t-- > 0;) by_label[catalog.labels()[t]] = static_cast<TypeId>(t);
    std::unordered_set<std::string> seen;
    seen.reserve(rows.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string line = where + " line " + std::to_string(r + 1);
        if (row.size() < width) throw IngestError(line + ": expected at least 4 columns", "cells");
        CellRecord c;
        c.cell_id = trim(row[col_id]);
        if (c.cell_id.empty()) throw IngestError(line + ": empty cell_id", "cell_id");
        c.x = detail::parse_double(row[col_x], "x");
        c.y = detail::parse_double(row[col_y], "y");
        auto type = by_label.find(trim(row[col_type]));
        if (type == by_label.end())
            throw IngestError(line + ": unknown cell type label '" + trim(row[col_type]) + "'", "type");
        c.type_id = type->second;
        if (!seen.insert(c.cell_id).second)
            throw IngestError("duplicate cell_id '" + c.cell_id + "' in sample '" + sample_id + "'",
                              "cell_id");
        sample.cells.push_back(std::move(c));
    }
    if (sample.cells.empty()) throw IngestError(where + ": no cells", "samples." + sample_id);
    return sample;
}

/// Attaches outlines from an outline geometry document; every cell needs one.
inline void attach_outlines(Sample& sample, const nlohmann::json& doc) {
    const std::string where = "outlines." + sample.sample_id;
    if (!doc.is_object()) throw IngestError(where + ": expected an object", where);
    std::vector<Polygon> outlines(sample.cells.size());
    std::vector<bool> have(sample.cells.size(), false);
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < sample.cells.size(); ++i) pos.emplace(sample.cells[i].cell_id, i);
    for (const auto& [cell_id, verts] : doc.items()) {
        auto it = pos.find(cell_id);
        if (it == pos.end())
            throw IngestError(where + ": outline for unknown cell '" + cell_id + "'", where);
        if (!verts.is_array()) throw IngestError(where + "." + cell_id + ": expected an array", where);
        Polygon poly;
        for (const auto& v : verts) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw IngestError(where + "." + cell_id + ": vertices must be [x,y] pairs", where);
            poly.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        outlines[it->second] = std::move(poly);
        have[it->second] = true;
    }
    for (std::size_t i = 0; i < have.size(); ++i)
        if (!have[i])
            throw IngestError(where + ": missing outline for cell '" + sample.cells[i].cell_id + "'",
                              where);
    sample.outlines = std::move(outlines);
}

/// Checks every Project invariant; throws IngestError on the first violation.
inline void validate(const Project& p) {
    if (!(p.radius > 0.0) || !std::isfinite(p.radius))
        throw IngestError("radius must be positive", "radius");
    if (p.catalog.empty()) throw IngestError("cell type catalog is empty", "types");
    if (p.cohort_a.role != Role::A || p.cohort_b.role != Role::B)
        throw IngestError("cohorts must have roles A and B", "cohorts");

    std::set<std::string> assigned;
    for (const Cohort* c : {&p.cohort_a, &p.cohort_b}) {
        const std::string key = std::string("cohorts.") + to_string(c->role);
        if (c->sample_ids.empty()) throw IngestError("cohort " + std::string(to_string(c->role)) + " has no samples", key + ".samples");
        for (const auto& id : c->sample_ids) {
            if (!assigned.insert(id).second)
                throw IngestError("sample '" + id + "' is assigned to both cohorts", key + ".samples");
            if (!p.samples.contains(id))
                throw IngestError("sample '" + id + "' has no cell table", key + ".samples");
        }
    }
    const auto types = p.catalog.size();
    for (const auto& [id, s] : p.samples) {
        if (!assigned.contains(id)) throw IngestError("sample '" + id + "' belongs to no cohort", "samples");
        if (s.sample_id != id) throw IngestError("sample key '" + id + "' does not match its id", "samples");
        if (s.cells.empty()) throw IngestError("sample '" + id + "' has no cells", "samples");
        if (s.has_outlines() && s.outlines.size() != s.cells.size())
            throw IngestError("sample '" + id + "' outlines do not cover every cell", "outlines");
        std::unordered_set<std::string> ids;
        ids.reserve(s.cells.size());
        for (const auto& c : s.cells) {
            if (!ids.insert(c.cell_id).second)
                throw IngestError("duplicate cell_id '" + c.cell_id + "' in sample '" + id + "'", "cell_id");
            if (!std::isfinite(c.x) || !std::isfinite(c.y))
                throw IngestError("cell '" + c.cell_id + "' in sample '" + id + "' has a non-finite position", "x");
            if (c.type_id >= types)
                throw IngestError("cell '" + c.cell_id + "' in sample '" + id + "' has an unknown type", "type");
        }
    }
}

/// Builds a Project from a parsed config document. Relative file paths
/// resolve against `base_dir`.
inline Project load_project(const ordered_json& config, const fs::path& base_dir = {}) {
    if (!config.is_object()) throw IngestError("project config must be a JSON object", "config");

    Project p;
    const auto& radius = detail::require(config, "radius", "radius");
    if (!radius.is_number()) throw IngestError("field 'radius' must be a number", "radius");
    p.radius = radius.get<double>();
    if (!(p.radius > 0.0) || !std::isfinite(p.radius)) throw IngestError("radius must be positive", "radius");

    const auto& types = detail::require(config, "types", "types");
    if (!types.is_array() || types.empty())
        throw IngestError("field 'types' must be a non-empty array of labels", "types");
    std::vector<std::string> labels;
    for (const auto& t : types) {
        if (!t.is_string()) throw IngestError("field 'types' must contain only strings", "types");
        labels.push_back(t.get<std::string>());
    }
    p.catalog = CellTypeCatalog(std::move(labels));

    const auto& cohorts = detail::require(config, "cohorts", "cohorts");
    if (!cohorts.is_object()) throw IngestError("field 'cohorts' must be an object", "cohorts");
    for (const auto& [key, _] : cohorts.items())
        if (key != "A" && key != "B") throw IngestError("unknown cohort role '" + key + "'", "cohorts." + key);

    std::map<std::string, fs::path> tables;
    for (Role role : {Role::A, Role::B}) {
        const std::string key = std::string("cohorts.") + to_string(role);
        const auto& c = detail::require(cohorts, to_string(role), key);
        if (!c.is_object()) throw IngestError("field '" + key + "' must be an object", key);
        Cohort& cohort = role == Role::A ? p.cohort_a : p.cohort_b;
        cohort.role = role;
        const auto& label = detail::require(c, "label", key + ".label");
        if (!label.is_string()) throw IngestError("field '" + key + ".label' must be a string", key + ".label");
        cohort.label = label.get<std::string>();
        const auto& samples = detail::require(c, "samples", key + ".samples");
        if (!samples.is_object() || samples.empty())
            throw IngestError("field '" + key + ".samples' must be a non-empty object", key + ".samples");
        for (const auto& [sid, path] : samples.items()) {
            if (!path.is_string())
                throw IngestError("field '" + key + ".samples." + sid + "' must be a path", key + ".samples." + sid);
            if (tables.contains(sid))
                throw IngestError("sample '" + sid + "' is assigned to both cohorts", key + ".samples");
            tables.emplace(sid, detail::resolve(base_dir, path.get<std::string>()));
            cohort.sample_ids.push_back(sid);
        }
    }

    for (const auto& [sid, path] : tables) {
        auto text = detail::read_file(path);
        p.samples.emplace(sid, parse_cell_table(text, sid, p.catalog));
    }

    if (auto it = config.find("outlines"); it != config.end() && !it->is_null()) {
        if (!it->is_object()) throw IngestError("field 'outlines' must be an object", "outlines");
        for (const auto& [sid, path] : it->items()) {
            if (!path.is_string()) throw IngestError("field 'outlines." + sid + "' must be a path", "outlines." + sid);
            auto sit = p.samples.find(sid);
            if (sit == p.samples.end())
                throw IngestError("outlines given for unknown sample '" + sid + "'", "outlines." + sid);
            auto file = detail::resolve(base_dir, path.get<std::string>());
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(detail::read_file(file));
            } catch (const nlohmann::json::parse_error& e) {
                throw IngestError("outline file '" + file.string() + "' is not valid JSON", "outlines." + sid);
            }
            attach_outlines(sit->second, doc);
        }
    }

    validate(p);
    return p;
}

inline Project load_project(const fs::path& config_path) {
    if (!fs::exists(config_path))
        throw IngestError("project config '" + config_path.string() + "' does not exist", config_path.string());
    ordered_json config;
    try {
        config = ordered_json::parse(detail::read_file(config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestError("project config is not valid JSON: " + std::string(e.what()), "config");
    }
    return load_project(config, config_path.parent_path());
}

inline std::string write_cell_table(const Sample& s, const CellTypeCatalog& catalog) {
    std::string out = "cell_id,x,y,type\n";
    for (const auto& c : s.cells) {
        out += detail::csv_escape(c.cell_id);
        out += ',';
        out += detail::format_double(c.x);
        out += ',';
        out += detail::format_double(c.y);
        out += ',';
        out += detail::csv_escape(catalog.label(c.type_id));
        out += '\n';
    }
    return out;
}

/// Writes `p` under `dir` (created if needed) and returns the config path.
/// Loading the result yields a Project equal to `p`.
inline fs::path write_project(const Project& p, const fs::path& dir) {
    validate(p);
    fs::create_directories(dir / "cells");
    ordered_json config;
    config["radius"] = p.radius;
    config["types"] = p.catalog.labels();
    ordered_json outlines = ordered_json::object();
    std::set<std::string> stems;
    for (const Cohort* c : {&p.cohort_a, &p.cohort_b}) {
        ordered_json cj;
        cj["label"] = c->label;
        cj["samples"] = ordered_json::object();
        for (const auto& sid : c->sample_ids) {
            const auto& s = p.sample(sid);
            auto stem = detail::safe_file_stem(sid);
            for (int k = 1; !stems.insert(stem).second; ++k)
                stem = detail::safe_file_stem(sid) + "~" + std::to_string(k);
            const std::string rel = "cells/" + stem + ".csv";
            detail::write_file(dir / rel, write_cell_table(s, p.catalog));
            cj["samples"][sid] = rel;
            if (s.has_outlines()) {
                fs::create_directories(dir / "outlines");
                ordered_json doc = ordered_json::object();
                for (std::size_t i = 0; i < s.cells.size(); ++i) {
                    ordered_json poly = ordered_json::array();
                    for (const auto& v : s.outlines[i]) poly.push_back({v.x, v.y});
                    doc[s.cells[i].cell_id] = std::move(poly);
                }
                const std::string orel = "outlines/" + stem + ".json";
                detail::write_file(dir / orel, doc.dump());
                outlines[sid] = orel;
            }
        }
        config["cohorts"][to_string(c->role)] = std::move(cj);
    }
    if (!outlines.empty()) config["outlines"] = std::move(outlines);
    const auto path = dir / "project.json";
    detail::write_file(path, config.dump(2) + "\n");
    return path;
}

}  // namespace cohortscope::ingest
