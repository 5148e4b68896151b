#pragma once

#include "cohortscope/core.hpp"
#include "cohortscope/neighborhood.hpp"
#include "cohortscope/query.hpp"
#include "cohortscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

// =============================================================================
// FILE: cohortscope/microenv.hpp
// BRIEF: Pairwise co-localization frequencies, cohort difference heatmaps and
//        query extension ("remaining") plots
// =============================================================================

namespace cohortscope::microenv {

/// Row-major T x T table. Entry (i, j) is the share of type-j cells among all
/// neighbor slots of type-i center cells, pooled over a cohort.
struct FrequencyMatrix {
    std::size_t types = 0;
    std::vector<double> values;
    std::vector<bool> empty_rows;  // true when type-i centers had no neighbors at all

    double at(TypeId i, TypeId j) const { return values[i * types + j]; }
};

inline FrequencyMatrix frequency_matrix(const Project& project, const NeighborhoodIndex& index, Role role) {
    const std::size_t t = project.type_count();
    std::vector<std::uint64_t> slots(t * t, 0);
    std::vector<std::uint64_t> row_total(t, 0);
    for (const auto& sid : project.cohort(role).sample_ids) {
        const auto& sample = project.sample(sid);
        const auto& nb = index.sample(sid);
        for (std::size_t c = 0; c < sample.cells.size(); ++c) {
            const TypeId center = sample.cells[c].type_id;
            const auto types = nb.types_of(static_cast<CellIndex>(c));
            const auto counts = nb.counts_of(static_cast<CellIndex>(c));
            for (std::size_t k = 0; k < types.size(); ++k) {
                slots[center * t + types[k]] += counts[k];
                row_total[center] += counts[k];
            }
        }
    }
    FrequencyMatrix f{t, std::vector<double>(t * t, 0.0), std::vector<bool>(t, false)};
    for (std::size_t i = 0; i < t; ++i) {
        if (row_total[i] == 0) {
            f.empty_rows[i] = true;
            continue;
        }
        for (std::size_t j = 0; j < t; ++j)
            f.values[i * t + j] = static_cast<double>(slots[i * t + j]) / static_cast<double>(row_total[i]);
    }
    return f;
}

enum class HeatmapVariant { difference, metric };

inline const char* to_string(HeatmapVariant v) { return v == HeatmapVariant::difference ? "difference" : "metric"; }

struct HeatmapResult {
    HeatmapVariant variant = HeatmapVariant::difference;
    std::optional<stats::Metric> metric;
    std::size_t types = 0;
    std::vector<double> values;  // row-major; row = center type, column = neighbor type
    double max_abs = 0.0;        // colormap anchor

    double at(TypeId i, TypeId j) const { return values[i * types + j]; }
};

namespace detail {
inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
}  // namespace detail

/// D = F(cohort A) - F(cohort B), entrywise.
inline HeatmapResult difference_heatmap(const Project& project, const NeighborhoodIndex& index) {
    const auto fa = frequency_matrix(project, index, Role::A);
    const auto fb = frequency_matrix(project, index, Role::B);
    HeatmapResult h{HeatmapVariant::difference, std::nullopt, fa.types, std::vector<double>(fa.values.size()), 0.0};
    for (std::size_t k = 0; k < h.values.size(); ++k) h.values[k] = fa.values[k] - fb.values[k];
    h.max_abs = detail::max_abs(h.values);
    return h;
}

/// Per-sample relative abundance of the pair query {i}|{j} for every ordered
/// pair, as [sample][i*T+j]. Equivalent to evaluating each pair query through
/// count_matches, computed in a single pass over the cells.
inline std::vector<std::vector<double>> pair_abundances(const Project& project, const NeighborhoodIndex& index,
                                                        const std::vector<std::string>& sample_ids) {
    const std::size_t t = project.type_count();
    std::vector<std::vector<double>> out;
    out.reserve(sample_ids.size());
    for (const auto& sid : sample_ids) {
        const auto& sample = project.sample(sid);
        const auto& nb = index.sample(sid);
        std::vector<std::uint64_t> counts(t * t, 0);
        for (std::size_t c = 0; c < sample.cells.size(); ++c) {
            const TypeId center = sample.cells[c].type_id;
            for (TypeId j : nb.types_of(static_cast<CellIndex>(c))) ++counts[center * t + j];
        }
        std::vector<double> rel(t * t);
        const auto total = static_cast<double>(sample.cells.size());
        for (std::size_t k = 0; k < rel.size(); ++k) rel[k] = static_cast<double>(counts[k]) / total;
        out.push_back(std::move(rel));
    }
    return out;
}

/// Signed separability heatmap. Entry (i, j) scores how well the relative
/// abundance of {i}|{j} separates the cohorts, signed by which cohort has the
/// larger mean. Negative silhouettes count as no separation.
inline HeatmapResult metric_heatmap(const Project& project, const NeighborhoodIndex& index, stats::Metric metric) {
    const std::size_t t = project.type_count();
    const auto pa = pair_abundances(project, index, project.cohort_a.sample_ids);
    const auto pb = pair_abundances(project, index, project.cohort_b.sample_ids);
    HeatmapResult h{HeatmapVariant::metric, metric, t, std::vector<double>(t * t, 0.0), 0.0};
    std::vector<double> a(pa.size()), b(pb.size());
    for (std::size_t k = 0; k < t * t; ++k) {
        double sum_a = 0.0, sum_b = 0.0;
        for (std::size_t s = 0; s < pa.size(); ++s) sum_a += a[s] = pa[s][k];
        for (std::size_t s = 0; s < pb.size(); ++s) sum_b += b[s] = pb[s][k];
        const double diff = sum_a / static_cast<double>(a.size()) - sum_b / static_cast<double>(b.size());
        if (diff == 0.0) continue;
        double score = stats::separability(a, b, metric);
        if (metric == stats::Metric::silhouette) score = std::max(score, 0.0);
        h.values[k] = diff > 0.0 ? score : -score;
    }
    h.max_abs = detail::max_abs(h.values);
    return h;
}

inline HeatmapResult heatmap(const Project& project, const NeighborhoodIndex& index, HeatmapVariant variant,
                             stats::Metric metric = stats::Metric::silhouette) {
    return variant == HeatmapVariant::difference ? difference_heatmap(project, index)
                                                 : metric_heatmap(project, index, metric);
}

struct RemainingPlot {
    std::optional<TypeId> extension;  // nullopt is the exclusive ("None") entry
    MicroQuery query;
    stats::DistributionPair pair;
    double score = 0.0;
};

/// Candidate refinements of `query`: the exclusive variant plus one
/// non-exclusive extension per type not yet in the environment, ordered by
/// descending separability. Ties keep catalog order with the exclusive entry
/// first.
inline std::vector<RemainingPlot> remaining_plots(const Project& project, const NeighborhoodIndex& index,
                                                  const MicroQuery& query, stats::AbundanceMode mode,
                                                  stats::Metric metric) {
    query_detail::check(query, project.type_count());
    std::vector<RemainingPlot> out;
    auto add = [&](std::optional<TypeId> ext, MicroQuery q) {
        auto pair = stats::distribution(project, &index, q, mode);
        const double score = stats::separability(pair, metric);
        out.push_back({ext, std::move(q), std::move(pair), score});
    };
    add(std::nullopt, MicroQuery(query.center, query.env, true));
    for (std::size_t t = 0; t < project.type_count(); ++t) {
        const auto id = static_cast<TypeId>(t);
        if (std::binary_search(query.env.begin(), query.env.end(), id)) continue;
        auto env = query.env;
        env.push_back(id);
        add(id, MicroQuery(query.center, std::move(env), false));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RemainingPlot& x, const RemainingPlot& y) { return x.score > y.score; });
    return out;
}

}  // namespace cohortscope::microenv
