#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// =============================================================================
// FILE: cohortscope/core.hpp
// BRIEF: Domain types shared by every module: cells, samples, cohorts, projects
// =============================================================================

namespace cohortscope {

using TypeId = std::uint32_t;
using CellIndex = std::uint32_t;

/// Base error for everything the engine reports. `field()` names the offending
/// input field when one is known (config key, query member, file path).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, std::string field = {})
        : std::runtime_error(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed or inconsistent project input.
class IngestError : public Error {
public:
    using Error::Error;
};

/// A caller asked for something that does not exist (sample, cell, label).
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Arguments that violate an operation's precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

using Polygon = std::vector<Point>;

struct CellRecord {
    std::string cell_id;
    double x = 0.0;  // micrometres
    double y = 0.0;  // micrometres
    TypeId type_id = 0;

    friend bool operator==(const CellRecord&, const CellRecord&) = default;
};

/// Ordered cell-type labels; the position is the type id.
class CellTypeCatalog {
public:
    CellTypeCatalog() = default;
    explicit CellTypeCatalog(std::vector<std::string> labels) : labels_(std::move(labels)) {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i].empty())
                throw IngestError("type label " + std::to_string(i) + " is empty", "types");
        }
    }

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    const std::string& label(TypeId id) const { return labels_.at(id); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// First type carrying `label` (labels may repeat).
    std::optional<TypeId> find(const std::string& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return static_cast<TypeId>(i);
        return std::nullopt;
    }

    TypeId resolve(const std::string& label, const std::string& field = "type") const {
        if (auto id = find(label)) return *id;
        throw NotFoundError("unknown cell type label '" + label + "'", field);
    }

    friend bool operator==(const CellTypeCatalog&, const CellTypeCatalog&) = default;

private:
    std::vector<std::string> labels_;
};

struct Sample {
    std::string sample_id;
    std::vector<CellRecord> cells;
    /// Either empty or one polygon per cell, parallel to `cells`.
    std::vector<Polygon> outlines;

    std::size_t size() const noexcept { return cells.size(); }
    bool has_outlines() const noexcept { return !outlines.empty(); }

    std::optional<CellIndex> find_cell(const std::string& id) const {
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (cells[i].cell_id == id) return static_cast<CellIndex>(i);
        return std::nullopt;
    }

    friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Role { A, B };

inline const char* to_string(Role r) { return r == Role::A ? "A" : "B"; }
inline Role other(Role r) { return r == Role::A ? Role::B : Role::A; }

struct Cohort {
    std::string label;
    Role role = Role::A;
    std::vector<std::string> sample_ids;  // config order

    friend bool operator==(const Cohort&, const Cohort&) = default;
};

/// Two cohorts of samples sharing one cell-type catalog and one
/// microenvironment radius. Immutable once loaded.
struct Project {
    CellTypeCatalog catalog;
    Cohort cohort_a;
    Cohort cohort_b;
    std::map<std::string, Sample> samples;
    double radius = 0.0;  // micrometres, centroid to centroid

    const Cohort& cohort(Role r) const { return r == Role::A ? cohort_a : cohort_b; }
    std::size_t type_count() const noexcept { return catalog.size(); }

    const Sample& sample(const std::string& id) const {
        auto it = samples.find(id);
        if (it == samples.end()) throw NotFoundError("unknown sample '" + id + "'", "sample");
        return it->second;
    }

    std::size_t cell_count() const {
        std::size_t n = 0;
        for (const auto& [id, s] : samples) n += s.size();
        return n;
    }

    /// Same data with cohort roles exchanged (labels travel with their samples).
    Project swapped() const {
        Project p = *this;
        std::swap(p.cohort_a, p.cohort_b);
        p.cohort_a.role = Role::A;
        p.cohort_b.role = Role::B;
        return p;
    }

    friend bool operator==(const Project&, const Project&) = default;
};

}  // namespace cohortscope
