#pragma once

#include "cohortscope/core.hpp"
#include "cohortscope/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

// =============================================================================
// FILE: cohortscope/synth.hpp
// BRIEF: Seeded synthetic two-cohort projects with planted effects
//
// Cells are placed uniformly in a square sized so the expected number of
// neighbors per cell is `mean_neighbors`. Planted effects:
//   enrichment      - a type's sampling weight is multiplied by `fold` in one cohort
//   colocalization  - in one cohort, each center-type cell receives, with
//                     probability `strength`, a distinct partner cell moved to
//                     within half the radius of it (until partners run out)
//   outlier         - one sample's share of a type is forced to `fraction`
// Type counts are drawn before colocalization moves cells, so colocalization
// never changes abundances.
// =============================================================================

namespace cohortscope::synth {

struct Enrichment {
    TypeId type = 0;
    Role cohort = Role::A;
    double fold = 2.0;
};

struct Colocalization {
    TypeId center = 0;
    TypeId partner = 1;
    Role cohort = Role::A;
    double strength = 0.5;  // probability in [0, 1]
};

struct PlantedOutlier {
    TypeId type = 0;
    Role cohort = Role::A;
    std::size_t sample = 0;  // position within the cohort
    double fraction = 0.2;
};

struct SynthSpec {
    std::string label_a = "Cohort A";
    std::string label_b = "Cohort B";
    std::size_t samples_a = 13;
    std::size_t samples_b = 7;
    std::size_t cells_min = 2678;
    std::size_t cells_max = 23774;
    std::size_t types = 12;
    std::vector<std::string> type_labels;  // optional, defaults to type_01..type_T
    std::vector<double> type_weights;      // optional relative base shares
    double radius = 20.0;
    double mean_neighbors = 10.0;
    double composition_jitter = 0.1;  // log-normal sd of per-sample type weights
    std::vector<Enrichment> enrichments;
    std::vector<Colocalization> colocalizations;
    std::vector<PlantedOutlier> outliers;
    bool outlines = false;
};

class InfeasibleSpec : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

inline void check(const SynthSpec& s) {
    auto fail = [](const std::string& what, const std::string& field) { throw InfeasibleSpec(what, field); };
    if (s.samples_a == 0 || s.samples_b == 0) fail("each cohort needs at least one sample", "samples");
    if (s.cells_min == 0 || s.cells_min > s.cells_max) fail("cell range must satisfy 1 <= min <= max", "cells");
    if (s.types == 0) fail("at least one cell type is required", "types");
    if (!s.type_labels.empty() && s.type_labels.size() != s.types) fail("type_labels must have one label per type", "type_labels");
    if (!s.type_weights.empty()) {
        if (s.type_weights.size() != s.types) fail("type_weights must have one weight per type", "type_weights");
        for (double w : s.type_weights)
            if (!(w > 0.0) || !std::isfinite(w)) fail("type weights must be positive", "type_weights");
    }
    if (!(s.radius > 0.0) || !std::isfinite(s.radius)) fail("radius must be positive", "radius");
    if (!(s.mean_neighbors > 0.0) || !std::isfinite(s.mean_neighbors)) fail("mean_neighbors must be positive", "mean_neighbors");
    if (!(s.composition_jitter >= 0.0) || !std::isfinite(s.composition_jitter)) fail("composition_jitter must be >= 0", "composition_jitter");

    std::set<TypeId> planted;
    for (const auto& e : s.enrichments) {
        if (e.type >= s.types) fail("enriched type " + std::to_string(e.type) + " exceeds the type count", "enrichments");
        if (!(e.fold > 0.0) || !std::isfinite(e.fold)) fail("enrichment fold must be positive", "enrichments");
        planted.insert(e.type);
    }
    for (const auto& c : s.colocalizations) {
        if (c.center >= s.types || c.partner >= s.types) fail("colocalized pair exceeds the type count", "colocalizations");
        if (!(c.strength >= 0.0 && c.strength <= 1.0)) fail("colocalization strength must be in [0, 1]", "colocalizations");
        planted.insert(c.center);
        planted.insert(c.partner);
    }
    for (const auto& o : s.outliers) {
        if (o.type >= s.types) fail("outlier type exceeds the type count", "outliers");
        const auto n = o.cohort == Role::A ? s.samples_a : s.samples_b;
        if (o.sample >= n) fail("outlier sample index exceeds the cohort size", "outliers");
        if (!(o.fraction >= 0.0 && o.fraction <= 1.0)) fail("outlier fraction must be in [0, 1]", "outliers");
    }
    if (planted.size() > s.types) fail("more planted types than cell types", "types");
}

inline std::string default_type_label(std::size_t t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "type_%02zu", t + 1);
    return buf;
}

inline std::string sample_label(Role r, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02zu", to_string(r), k + 1);
    return buf;
}

/// Deterministic for a fixed (spec, seed) on a given standard library.
inline Project generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
    check(spec);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Project p;
    std::vector<std::string> labels = spec.type_labels;
    if (labels.empty())
        for (std::size_t t = 0; t < spec.types; ++t) labels.push_back(default_type_label(t));
    p.catalog = CellTypeCatalog(std::move(labels));
    p.radius = spec.radius;
    p.cohort_a = {spec.label_a, Role::A, {}};
    p.cohort_b = {spec.label_b, Role::B, {}};

    for (Role role : {Role::A, Role::B}) {
        const auto count = role == Role::A ? spec.samples_a : spec.samples_b;
        Cohort& cohort = role == Role::A ? p.cohort_a : p.cohort_b;
        for (std::size_t k = 0; k < count; ++k) {
            Sample s;
            s.sample_id = sample_label(role, k);
            const auto n = std::uniform_int_distribution<std::size_t>(spec.cells_min, spec.cells_max)(rng);

            std::vector<double> weights(spec.types);
            for (std::size_t t = 0; t < spec.types; ++t) {
                const double base = spec.type_weights.empty() ? 1.0 : spec.type_weights[t];
                weights[t] = base * std::exp(spec.composition_jitter * gauss(rng));
            }
            for (const auto& e : spec.enrichments)
                if (e.cohort == role) weights[e.type] *= e.fold;
            for (const auto& o : spec.outliers) {
                if (o.cohort != role || o.sample != k) continue;
                double rest = 0.0;
                for (std::size_t t = 0; t < spec.types; ++t)
                    if (t != o.type) rest += weights[t];
                if (spec.types == 1 || o.fraction >= 1.0) {
                    std::fill(weights.begin(), weights.end(), 0.0);
                    weights[o.type] = 1.0;
                } else {
                    weights[o.type] = rest * o.fraction / (1.0 - o.fraction);
                }
            }
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

            const double side = std::sqrt(static_cast<double>(n) * std::numbers::pi * spec.radius * spec.radius /
                                          spec.mean_neighbors);
            s.cells.resize(n);
            std::vector<std::vector<std::size_t>> by_type(spec.types);
            for (std::size_t i = 0; i < n; ++i) {
                auto& c = s.cells[i];
                c.cell_id = "c" + std::to_string(i);
                c.type_id = static_cast<TypeId>(pick(rng));
                c.x = unit(rng) * side;
                c.y = unit(rng) * side;
                by_type[c.type_id].push_back(i);
            }

            for (const auto& col : spec.colocalizations) {
                if (col.cohort != role) continue;
                auto partners = by_type[col.partner];
                std::shuffle(partners.begin(), partners.end(), rng);
                std::size_t next = 0;
                for (std::size_t anchor : by_type[col.center]) {
                    if (unit(rng) >= col.strength) continue;
                    while (next < partners.size() && partners[next] == anchor) ++next;
                    if (next == partners.size()) break;
                    const std::size_t i = partners[next++];
                    const double r = 0.5 * spec.radius * std::sqrt(unit(rng));
                    const double a = 2.0 * std::numbers::pi * unit(rng);
                    s.cells[i].x = s.cells[anchor].x + r * std::cos(a);
                    s.cells[i].y = s.cells[anchor].y + r * std::sin(a);
                }
            }

            if (spec.outlines) {
                const double rr = 0.3 * spec.radius;
                for (const auto& c : s.cells) {
                    Polygon poly;
                    for (int v = 0; v < 6; ++v) {
                        const double a = std::numbers::pi / 3.0 * v;
                        poly.push_back({c.x + rr * std::cos(a), c.y + rr * std::sin(a)});
                    }
                    s.outlines.push_back(std::move(poly));
                }
            }
            cohort.sample_ids.push_back(s.sample_id);
            p.samples.emplace(s.sample_id, std::move(s));
        }
    }
    ingest::validate(p);
    return p;
}

// JSON form used by `cohortscope synth --spec`. Every key is optional:
// {"cohorts": {"A": {"label", "samples"}, "B": {...}}, "cells": [min, max],
//  "types": <count>, "type_labels": [...], "type_weights": [...], "radius",
//  "mean_neighbors", "composition_jitter", "outlines": <bool>,
//  "enrichments": [{"type", "cohort", "fold"}],
//  "colocalizations": [{"center", "partner", "cohort", "strength"}],
//  "outliers": [{"type", "cohort", "sample", "fraction"}]}
// Type references are 0-based indices or labels from type_labels.

inline SynthSpec parse_spec(const nlohmann::json& j) {
    auto fail = [](const std::string& what, const std::string& field) -> void { throw InfeasibleSpec(what, field); };
    if (!j.is_object()) fail("synthetic spec must be a JSON object", "spec");
    SynthSpec s;
    try {
        if (auto c = j.find("cohorts"); c != j.end()) {
            if (auto a = c->find("A"); a != c->end()) {
                s.label_a = a->value("label", s.label_a);
                s.samples_a = a->value("samples", s.samples_a);
            }
            if (auto b = c->find("B"); b != c->end()) {
                s.label_b = b->value("label", s.label_b);
                s.samples_b = b->value("samples", s.samples_b);
            }
        }
        if (auto c = j.find("cells"); c != j.end()) {
            if (!c->is_array() || c->size() != 2) fail("'cells' must be [min, max]", "cells");
            s.cells_min = (*c)[0].get<std::size_t>();
            s.cells_max = (*c)[1].get<std::size_t>();
        }
        s.types = j.value("types", s.types);
        s.type_labels = j.value("type_labels", s.type_labels);
        if (!s.type_labels.empty() && !j.contains("types")) s.types = s.type_labels.size();
        s.type_weights = j.value("type_weights", s.type_weights);
        s.radius = j.value("radius", s.radius);
        s.mean_neighbors = j.value("mean_neighbors", s.mean_neighbors);
        s.composition_jitter = j.value("composition_jitter", s.composition_jitter);
        s.outlines = j.value("outlines", s.outlines);

        auto type_ref = [&](const nlohmann::json& v, const char* field) -> TypeId {
            if (v.is_number_unsigned()) return v.get<TypeId>();
            if (v.is_string())
                for (std::size_t t = 0; t < s.type_labels.size(); ++t)
                    if (s.type_labels[t] == v.get<std::string>()) return static_cast<TypeId>(t);
            throw InfeasibleSpec(std::string("unknown type reference in '") + field + "'", field);
        };
        auto role = [](const nlohmann::json& v) {
            const auto r = v.get<std::string>();
            if (r == "A") return Role::A;
            if (r == "B") return Role::B;
            throw InfeasibleSpec("cohort must be \"A\" or \"B\"", "cohort");
        };
        for (const auto& e : j.value("enrichments", nlohmann::json::array()))
            s.enrichments.push_back({type_ref(e.at("type"), "enrichments"), role(e.value("cohort", nlohmann::json("A"))),
                                     e.value("fold", 2.0)});
        for (const auto& c : j.value("colocalizations", nlohmann::json::array()))
            s.colocalizations.push_back({type_ref(c.at("center"), "colocalizations"),
                                         type_ref(c.at("partner"), "colocalizations"),
                                         role(c.value("cohort", nlohmann::json("A"))), c.value("strength", 0.5)});
        for (const auto& o : j.value("outliers", nlohmann::json::array()))
            s.outliers.push_back({type_ref(o.at("type"), "outliers"), role(o.value("cohort", nlohmann::json("A"))),
                                  o.value("sample", std::size_t{0}), o.value("fraction", 0.2)});
    } catch (const nlohmann::json::exception& e) {
        throw InfeasibleSpec(std::string("malformed synthetic spec: ") + e.what(), "spec");
    }
    check(s);
    return s;
}

/// Default-sized spec (13 + 7 samples, 12 types) with one type enriched and
/// one co-localized pair planted in cohort A.
/// Sparse neighborhoods keep the co-localized pair from being masked by the
/// enriched type's whole heatmap row.
inline SynthSpec builtin_spec() {
    SynthSpec s;
    s.mean_neighbors = 3.0;
    s.enrichments = {{2, Role::A, 1.8}};
    s.colocalizations = {{5, 8, Role::A, 1.0}};
    return s;
}

}  // namespace cohortscope::synth
