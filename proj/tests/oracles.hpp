#pragma once

// Brute-force reference implementations used only by tests. They follow the
// textbook definitions directly and share no code with the library paths
// they check (apart from the plain data types).

#include "cohortscope/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

namespace oracle {

using namespace cohortscope;

/// All-pairs neighbor lists, ascending by cell position.
inline std::vector<std::vector<CellIndex>> neighbors(const Sample& s, double radius) {
    const std::size_t n = s.cells.size();
    std::vector<std::vector<CellIndex>> out(n);
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dx = s.cells[i].x - s.cells[j].x;
            const double dy = s.cells[i].y - s.cells[j].y;
            if (dx * dx + dy * dy <= r2) out[i].push_back(static_cast<CellIndex>(j));
        }
    }
    return out;
}

/// Set of neighbor types for every cell.
inline std::vector<std::set<TypeId>> present_types(const Sample& s, const std::vector<std::vector<CellIndex>>& nb) {
    std::vector<std::set<TypeId>> out(s.cells.size());
    for (std::size_t i = 0; i < s.cells.size(); ++i)
        for (CellIndex j : nb[i]) out[i].insert(s.cells[j].type_id);
    return out;
}

/// Per-cell query evaluation from explicit neighbor type sets.
inline std::vector<CellIndex> matches(const Sample& s, const std::vector<std::set<TypeId>>& present,
                                      const std::set<TypeId>& center, const std::set<TypeId>& env, bool exclusive) {
    std::vector<CellIndex> out;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        if (!center.count(s.cells[i].type_id)) continue;
        const auto& p = present[i];
        bool ok = std::includes(p.begin(), p.end(), env.begin(), env.end());
        if (exclusive)
            for (TypeId t : p)
                if (!env.count(t)) ok = false;
        if (ok) out.push_back(static_cast<CellIndex>(i));
    }
    return out;
}

inline std::vector<CellIndex> matches(const Sample& s, const std::vector<std::vector<CellIndex>>& nb,
                                      const std::set<TypeId>& center, const std::set<TypeId>& env, bool exclusive) {
    return matches(s, present_types(s, nb), center, env, exclusive);
}

/// Silhouette from the definition with explicit labels over all points.
inline double silhouette(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<std::pair<double, int>> pts;
    for (double v : a) pts.push_back({v, 0});
    for (double v : b) pts.push_back({v, 1});
    double total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double same = 0, other = 0;
        int n_same = 0, n_other = 0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            const double d = std::fabs(pts[i].first - pts[j].first);
            if (pts[j].second == pts[i].second) {
                same += d;
                ++n_same;
            } else {
                other += d;
                ++n_other;
            }
        }
        const double ai = n_same ? same / n_same : 0.0;
        const double bi = other / n_other;
        const double m = std::max(ai, bi);
        total += m > 0 ? (bi - ai) / m : 0.0;
    }
    return total / static_cast<double>(pts.size());
}

/// Dunn from all pairwise distances.
inline double dunn(const std::vector<double>& a, const std::vector<double>& b) {
    double inter = INFINITY, diam = 0;
    for (double x : a)
        for (double y : b) inter = std::min(inter, std::fabs(x - y));
    for (const auto* c : {&a, &b})
        for (double x : *c)
            for (double y : *c) diam = std::max(diam, std::fabs(x - y));
    if (diam > 0) return inter / diam;
    return inter > 0 ? 1e12 : 0.0;
}

/// Gaussian mixture density at x with bandwidth h.
inline double gaussian_mixture(const std::vector<double>& values, double h, double x) {
    double s = 0;
    for (double v : values) s += std::exp(-(x - v) * (x - v) / (2 * h * h)) / (h * std::sqrt(2 * std::numbers::pi));
    return s / static_cast<double>(values.size());
}

}  // namespace oracle
