#pragma once

#include "cohortscope/microenv.hpp"
#include "cohortscope/neighborhood.hpp"
#include "cohortscope/outlier.hpp"
#include "cohortscope/serialize.hpp"
#include "cohortscope/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <string>

namespace cohortscope::report {

struct ReportOptions {
    stats::Metric metric = stats::Metric::silhouette;
    stats::AbundanceMode mode = stats::AbundanceMode::relative;
    std::size_t top = 5;
};

/// Full comparison: summary, singleton ranking under both metrics (ordered by
/// `options.metric`), both heatmap variants and outlier reports for the top
/// ranked singletons. Contains nothing time- or host-dependent.
inline nlohmann::json build(const Project& project, const NeighborhoodIndex& index, const ReportOptions& options) {
    using nlohmann::json;
    const auto& catalog = project.catalog;
    const auto subjects = stats::singleton_subjects(catalog);
    const auto primary = stats::rank_subjects(project, subjects, options.metric, options.mode);
    const auto secondary_metric =
        options.metric == stats::Metric::silhouette ? stats::Metric::dunn : stats::Metric::silhouette;
    const auto secondary = stats::rank_subjects(project, subjects, secondary_metric, options.mode);
    std::map<TypeSet, double> secondary_score;
    for (const auto& r : secondary) secondary_score[r.subject] = r.score;

    json table = json::array();
    for (std::size_t k = 0; k < primary.size(); ++k) {
        const auto& r = primary[k];
        const TypeId t = r.subject.front();
        json row = {{"rank", k + 1}, {"type", catalog.label(t)}, {"type_id", t}};
        const double sil = options.metric == stats::Metric::silhouette ? r.score : secondary_score[r.subject];
        const double dunn = options.metric == stats::Metric::dunn ? r.score : secondary_score[r.subject];
        row["silhouette"] = serialize::finite(sil);
        row["dunn"] = serialize::finite(dunn);
        if (serialize::is_sentinel(dunn)) row["dunn_sentinel"] = true;
        table.push_back(std::move(row));
    }

    json outliers = json::array();
    const auto top = std::min(options.top, primary.size());
    for (std::size_t k = 0; k < top; ++k) {
        const auto pair = stats::distribution(project, &index, primary[k].subject, options.mode);
        outliers.push_back(serialize::outliers(outlier::flag_outliers(pair), catalog));
    }

    return {{"tool", {{"name", "cohortscope"}, {"version", serialize::kVersion}}},
            {"parameters",
             {{"metric", stats::to_string(options.metric)},
              {"mode", stats::to_string(options.mode)},
              {"top", options.top},
              {"radius", project.radius}}},
            {"project", serialize::summary(project)},
            {"ranking", std::move(table)},
            {"heatmaps",
             {{"difference", serialize::heatmap(microenv::difference_heatmap(project, index), catalog)},
              {"metric", serialize::heatmap(microenv::metric_heatmap(project, index, options.metric), catalog)}}},
            {"outliers", std::move(outliers)}};
}

}  // namespace cohortscope::report
