#pragma once

#include "cohortscope/core.hpp"
#include "cohortscope/neighborhood.hpp"
#include "cohortscope/query.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// =============================================================================
// FILE: cohortscope/stats.hpp
// BRIEF: Per-sample abundance, cohort distributions, density estimates,
//        cohort separability scores and subject ranking
// =============================================================================

namespace cohortscope::stats {

enum class AbundanceMode { absolute, relative };
enum class Metric { silhouette, dunn };

/// Returned by dunn when both cohorts have zero spread but do not overlap.
inline constexpr double kDunnSentinel = 1e12;

inline const char* to_string(AbundanceMode m) { return m == AbundanceMode::absolute ? "absolute" : "relative"; }
inline const char* to_string(Metric m) { return m == Metric::silhouette ? "silhouette" : "dunn"; }

inline AbundanceMode parse_mode(std::string_view s) {
    if (s == "absolute") return AbundanceMode::absolute;
    if (s == "relative") return AbundanceMode::relative;
    throw ArgumentError("mode must be 'absolute' or 'relative'", "mode");
}

inline Metric parse_metric(std::string_view s) {
    if (s == "silhouette") return Metric::silhouette;
    if (s == "dunn") return Metric::dunn;
    throw ArgumentError("metric must be 'silhouette' or 'dunn'", "metric");
}

/// What a distribution counts: a set of cell types, or cells matching a
/// microenvironment query.
using Subject = std::variant<TypeSet, MicroQuery>;

struct SampleValue {
    std::string sample_id;
    double value = 0.0;

    friend bool operator==(const SampleValue&, const SampleValue&) = default;
};

struct DistributionPair {
    Subject subject;
    AbundanceMode mode = AbundanceMode::absolute;
    std::vector<SampleValue> values_a;
    std::vector<SampleValue> values_b;

    const std::vector<SampleValue>& values(Role r) const { return r == Role::A ? values_a : values_b; }

    std::vector<double> raw(Role r) const {
        std::vector<double> out;
        for (const auto& v : values(r)) out.push_back(v.value);
        return out;
    }

    friend bool operator==(const DistributionPair&, const DistributionPair&) = default;
};

struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
};

inline double abundance(const Sample& sample, const TypeSet& types, AbundanceMode mode) {
    if (types.empty()) throw ArgumentError("abundance needs at least one cell type", "types");
    std::size_t count = 0;
    for (const auto& c : sample.cells)
        if (std::binary_search(types.begin(), types.end(), c.type_id)) ++count;
    if (mode == AbundanceMode::absolute) return static_cast<double>(count);
    return static_cast<double>(count) / static_cast<double>(sample.cells.size());
}

/// Abundance of cells matching `q`; relative mode divides by all cells of the sample.
inline double abundance(const Sample& sample, const SampleNeighborhoods& nb, const MicroQuery& q,
                        std::size_t type_count, AbundanceMode mode) {
    const auto count = static_cast<double>(match_count(sample, nb, q, type_count));
    return mode == AbundanceMode::absolute ? count : count / static_cast<double>(sample.cells.size());
}

/// One value per sample of each cohort. MicroQuery subjects need `index`.
inline DistributionPair distribution(const Project& project, const NeighborhoodIndex* index,
                                     const Subject& subject, AbundanceMode mode) {
    DistributionPair pair{subject, mode, {}, {}};
    for (Role role : {Role::A, Role::B}) {
        auto& out = role == Role::A ? pair.values_a : pair.values_b;
        for (const auto& sid : project.cohort(role).sample_ids) {
            const auto& sample = project.sample(sid);
            double v = 0.0;
            if (const auto* types = std::get_if<TypeSet>(&subject)) {
                for (TypeId t : *types)
                    if (t >= project.type_count()) throw ArgumentError("type id out of range", "types");
                v = abundance(sample, *types, mode);
            } else {
                if (index == nullptr)
                    throw ArgumentError("microenvironment subjects need a neighborhood index", "subject");
                v = abundance(sample, index->sample(sid), std::get<MicroQuery>(subject), project.type_count(), mode);
            }
            out.push_back({sid, v});
        }
    }
    return pair;
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position p*(n-1)).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ArgumentError("quantile of empty data", "values");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Silverman's rule, h = 0.9 * min(sd, IQR/1.34) * n^(-1/5).
/// When the robust spread is zero but sd is not, sd alone is used; when both
/// vanish, h = max(1e-3, 1e-3*|value|).
inline double silverman_bandwidth(std::span<const double> values) {
    if (values.empty()) throw ArgumentError("bandwidth of empty data", "values");
    const auto n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) return std::max(1e-3, 1e-3 * std::abs(values.front()));
    return 0.9 * spread * std::pow(n, -0.2);
}

/// Gaussian kernel density estimate on a uniform grid over
/// [min - 4h, max + 4h]. The grid has at least `grid_size` points and is
/// refined so consecutive points are no more than h/4 apart (capped at
/// 65537 points).
inline DensityCurve kde(std::span<const double> values, std::size_t grid_size = 256) {
    if (values.empty()) throw ArgumentError("kde needs at least one value", "values");
    for (double v : values)
        if (!std::isfinite(v)) throw ArgumentError("kde input must be finite", "values");
    const double h = silverman_bandwidth(values);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it - 4.0 * h;
    const double hi = *hi_it + 4.0 * h;

    const double needed = (hi - lo) / (h / 4.0);
    std::size_t points = std::max<std::size_t>(grid_size, 2);
    if (needed - 1e-6 > static_cast<double>(points - 1))
        points = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(needed - 1e-6)) + 1, 65537);

    DensityCurve curve;
    curve.bandwidth = h;
    curve.grid.resize(points);
    curve.density.resize(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t k = 0; k < points; ++k) {
        const double x = lo + step * static_cast<double>(k);
        double sum = 0.0;
        for (double v : values) {
            const double u = (x - v) / h;
            sum += std::exp(-0.5 * u * u);
        }
        curve.grid[k] = x;
        curve.density[k] = sum * norm;
    }
    return curve;
}

inline double trapezoid(const DensityCurve& c) {
    double area = 0.0;
    for (std::size_t k = 1; k < c.grid.size(); ++k)
        area += 0.5 * (c.density[k] + c.density[k - 1]) * (c.grid[k] - c.grid[k - 1]);
    return area;
}

/// Mean silhouette width with the two cohorts as clusters and |x - y| as the
/// distance. A point alone in its cohort has a = 0; s = 0 when a = b = 0.
inline double silhouette(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("silhouette needs values in both cohorts", "values");
    auto mean_distance = [](double x, std::span<const double> to, bool skip_self) {
        double sum = 0.0;
        for (double y : to) sum += std::abs(x - y);
        const auto n = static_cast<double>(to.size()) - (skip_self ? 1.0 : 0.0);
        return n > 0.0 ? sum / n : 0.0;
    };
    // Per-cohort partial sums keep the result bit-identical under a swap.
    auto accumulate = [&](std::span<const double> own, std::span<const double> others) {
        double total = 0.0;
        for (double x : own) {
            const double intra = mean_distance(x, own, true);
            const double inter = mean_distance(x, others, false);
            const double denom = std::max(intra, inter);
            total += denom > 0.0 ? (inter - intra) / denom : 0.0;
        }
        return total;
    };
    return (accumulate(a, b) + accumulate(b, a)) / static_cast<double>(a.size() + b.size());
}

/// Smallest cross-cohort distance over the largest cohort diameter.
inline double dunn(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("dunn needs values in both cohorts", "values");
    const auto [a_lo, a_hi] = std::minmax_element(a.begin(), a.end());
    const auto [b_lo, b_hi] = std::minmax_element(b.begin(), b.end());
    const double diameter = std::max(*a_hi - *a_lo, *b_hi - *b_lo);

    std::vector<double> sb(b.begin(), b.end());
    std::sort(sb.begin(), sb.end());
    double separation = std::numeric_limits<double>::infinity();
    for (double x : a) {
        auto it = std::lower_bound(sb.begin(), sb.end(), x);
        if (it != sb.end()) separation = std::min(separation, *it - x);
        if (it != sb.begin()) separation = std::min(separation, x - *std::prev(it));
    }
    if (diameter > 0.0) return separation / diameter;
    return separation > 0.0 ? kDunnSentinel : 0.0;
}

inline double separability(std::span<const double> a, std::span<const double> b, Metric metric) {
    return metric == Metric::silhouette ? silhouette(a, b) : dunn(a, b);
}

inline double separability(const DistributionPair& pair, Metric metric) {
    const auto a = pair.raw(Role::A);
    const auto b = pair.raw(Role::B);
    return separability(a, b, metric);
}

struct RankedSubject {
    TypeSet subject;
    double score = 0.0;
};

/// Subjects by descending separability; ties keep catalog order of each
/// subject's first (lowest) type, then input order.
inline std::vector<RankedSubject> rank_subjects(const Project& project, const std::vector<TypeSet>& subjects,
                                                Metric metric, AbundanceMode mode) {
    std::vector<RankedSubject> ranked;
    ranked.reserve(subjects.size());
    for (const auto& s : subjects) {
        const auto set = make_type_set(s);
        ranked.push_back({set, separability(distribution(project, nullptr, set, mode), metric)});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedSubject& x, const RankedSubject& y) {
        if (x.score != y.score) return x.score > y.score;
        const TypeId fx = x.subject.empty() ? 0 : x.subject.front();
        const TypeId fy = y.subject.empty() ? 0 : y.subject.front();
        return fx < fy;
    });
    return ranked;
}

/// Every singleton type {0}, {1}, ... in catalog order.
inline std::vector<TypeSet> singleton_subjects(const CellTypeCatalog& catalog) {
    std::vector<TypeSet> out;
    for (std::size_t t = 0; t < catalog.size(); ++t) out.push_back({static_cast<TypeId>(t)});
    return out;
}

/// Type ids whose label contains `query` (ASCII case-insensitive) first, then
/// the rest; both groups keep catalog order.
inline std::vector<TypeId> search_types(const CellTypeCatalog& catalog, std::string_view query) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return out;
    };
    const auto needle = lower(query);
    std::vector<TypeId> hits, rest;
    for (std::size_t t = 0; t < catalog.size(); ++t) {
        const bool hit = !needle.empty() && lower(catalog.label(static_cast<TypeId>(t))).find(needle) != std::string::npos;
        (hit ? hits : rest).push_back(static_cast<TypeId>(t));
    }
    hits.insert(hits.end(), rest.begin(), rest.end());
    return hits;
}

}  // namespace cohortscope::stats
