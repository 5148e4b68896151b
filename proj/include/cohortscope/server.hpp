#pragma once

#include "cohortscope/ingest.hpp"
#include "cohortscope/microenv.hpp"
#include "cohortscope/neighborhood.hpp"
#include "cohortscope/outlier.hpp"
#include "cohortscope/query.hpp"
#include "cohortscope/serialize.hpp"
#include "cohortscope/stats.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

// =============================================================================
// FILE: cohortscope/server.hpp
// BRIEF: JSON API over one loaded project
//
//   POST /project                      load a project config, build the index
//   GET  /distributions?subject&mode&grid
//   GET  /heatmap?variant&metric
//   POST /query                        MicroQuery (+ optional mode, metric)
//   GET  /samples/{id}/geometry?highlight
//   GET  /rank?metric&mode
//
// `Api` maps requests to (status, body) without any networking so it can be
// driven directly; `install_routes` binds it to an httplib server (see
// http.hpp).
// =============================================================================

namespace cohortscope::server {

using json = nlohmann::json;
using Params = std::map<std::string, std::string>;

struct Response {
    int status = 200;
    std::string body;
};

/// Loaded project plus its index. Never modified after construction.
struct Snapshot {
    Project project;
    NeighborhoodIndex index;
    std::uint64_t revision = 0;
};

/// Readers take a snapshot under a shared lock; loading swaps in a fully
/// built snapshot under the exclusive lock.
class Session {
public:
    std::shared_ptr<const Snapshot> snapshot() const {
        std::shared_lock lock(mutex_);
        return current_;
    }

    std::uint64_t load(Project project) {
        auto index = build_index(project);
        std::unique_lock lock(mutex_);
        auto next = std::make_shared<Snapshot>(Snapshot{std::move(project), std::move(index), ++revision_});
        current_ = std::move(next);
        return current_->revision;
    }

    stats::Metric metric = stats::Metric::silhouette;
    stats::AbundanceMode mode = stats::AbundanceMode::relative;

private:
    mutable std::shared_mutex mutex_;
    std::shared_ptr<const Snapshot> current_;
    std::uint64_t revision_ = 0;
};

class Api {
public:
    explicit Api(Session& session, std::filesystem::path base_dir = {})
        : session_(session), base_dir_(std::move(base_dir)) {}

    Response post_project(const std::string& body) {
        return guard([&] {
            ingest::ordered_json config;
            try {
                config = ingest::ordered_json::parse(body);
            } catch (const nlohmann::json::parse_error&) {
                return error(400, "request body is not valid JSON", "config");
            }
            auto project = ingest::load_project(config, base_dir_);
            const auto revision = session_.load(std::move(project));
            auto snap = session_.snapshot();
            return ok({{"project", serialize::summary(snap->project)}, {"revision", revision}});
        });
    }

    Response get_distributions(const Params& params) {
        return guard([&] {
            auto snap = require_project();
            if (!snap) return no_project();
            const auto& catalog = snap->project.catalog;
            const auto subject = serialize::parse_subject(json_param(params, "subject", true), catalog);
            const auto mode = mode_param(params);
            std::size_t grid = 256;
            if (auto it = params.find("grid"); it != params.end()) grid = parse_count(it->second, "grid");
            const auto pair = stats::distribution(snap->project, &snap->index, subject, mode);
            const auto a = pair.raw(Role::A);
            const auto b = pair.raw(Role::B);
            return ok({{"revision", snap->revision},
                       {"distribution", serialize::distribution(pair, catalog)},
                       {"density", {{"A", serialize::density(stats::kde(a, grid))},
                                    {"B", serialize::density(stats::kde(b, grid))}}},
                       {"outliers", serialize::outliers(outlier::flag_outliers(pair), catalog)}});
        });
    }

    Response get_heatmap(const Params& params) {
        return guard([&] {
            auto snap = require_project();
            if (!snap) return no_project();
            auto variant = microenv::HeatmapVariant::difference;
            if (auto it = params.find("variant"); it != params.end()) {
                if (it->second == "metric") variant = microenv::HeatmapVariant::metric;
                else if (it->second != "difference")
                    throw ArgumentError("variant must be 'difference' or 'metric'", "variant");
            }
            const auto metric = metric_param(params);
            const auto h = microenv::heatmap(snap->project, snap->index, variant, metric);
            auto body = serialize::heatmap(h, snap->project.catalog);
            body["revision"] = snap->revision;
            return ok(body);
        });
    }

    Response post_query(const std::string& body) {
        return guard([&] {
            auto snap = require_project();
            if (!snap) return no_project();
            json req;
            try {
                req = json::parse(body);
            } catch (const nlohmann::json::parse_error&) {
                return error(400, "request body is not valid JSON", "query");
            }
            const auto& project = snap->project;
            const auto q = parse_query(req, project.catalog);
            const auto mode = req.contains("mode") ? stats::parse_mode(string_field(req, "mode")) : session_.mode;
            const auto metric =
                req.contains("metric") ? stats::parse_metric(string_field(req, "metric")) : session_.metric;

            const auto pair = stats::distribution(project, &snap->index, q, mode);
            json matches = json::object();
            for (Role r : {Role::A, Role::B}) {
                for (const auto& sid : project.cohort(r).sample_ids) {
                    const auto& sample = project.sample(sid);
                    matches[sid] = matched_ids(sample, count_matches(project, snap->index, sid, q));
                }
            }
            const auto rest = microenv::remaining_plots(project, snap->index, q, mode, metric);
            json out = {{"revision", snap->revision},
                        {"query", to_json(q, project.catalog)},
                        {"metric", stats::to_string(metric)},
                        {"distribution", serialize::distribution(pair, project.catalog)},
                        {"matches", std::move(matches)},
                        {"remaining", serialize::remaining(rest, project.catalog)}};
            serialize::put_score(out, stats::separability(pair, metric));
            return ok(out);
        });
    }

    Response get_geometry(const std::string& sample_id, const Params& params) {
        return guard([&] {
            auto snap = require_project();
            if (!snap) return no_project();
            const auto& project = snap->project;
            auto it = project.samples.find(sample_id);
            if (it == project.samples.end()) return error(404, "unknown sample '" + sample_id + "'", "sample");
            const auto& sample = it->second;

            std::vector<char> highlighted(sample.size(), 0);
            const auto highlight = json_param(params, "highlight", false);
            const bool empty = highlight.is_null() || (highlight.is_array() && highlight.empty());
            if (!empty) {
                const auto subject = serialize::parse_subject(highlight, project.catalog);
                if (const auto* types = std::get_if<TypeSet>(&subject)) {
                    for (std::size_t c = 0; c < sample.size(); ++c)
                        highlighted[c] = std::binary_search(types->begin(), types->end(), sample.cells[c].type_id);
                } else {
                    const auto m = count_matches(sample, snap->index.sample(sample_id), std::get<MicroQuery>(subject),
                                                 project.type_count());
                    for (CellIndex c : m.cells) highlighted[c] = 1;
                }
            }

            json cells = json::array();
            for (std::size_t c = 0; c < sample.size(); ++c) {
                const auto& cell = sample.cells[c];
                json e = {{"cell_id", cell.cell_id},
                          {"type_id", cell.type_id},
                          {"type", project.catalog.label(cell.type_id)},
                          {"centroid", {cell.x, cell.y}},
                          {"highlighted", highlighted[c] != 0}};
                if (sample.has_outlines()) {
                    json poly = json::array();
                    for (const auto& v : sample.outlines[c]) poly.push_back({v.x, v.y});
                    e["outline"] = std::move(poly);
                }
                cells.push_back(std::move(e));
            }
            return ok({{"revision", snap->revision}, {"sample", sample_id}, {"cells", std::move(cells)}});
        });
    }

    Response get_rank(const Params& params) {
        return guard([&] {
            auto snap = require_project();
            if (!snap) return no_project();
            const auto metric = metric_param(params);
            const auto mode = mode_param(params);
            const auto ranked = stats::rank_subjects(snap->project, stats::singleton_subjects(snap->project.catalog),
                                                     metric, mode);
            return ok({{"revision", snap->revision},
                       {"metric", stats::to_string(metric)},
                       {"mode", stats::to_string(mode)},
                       {"ranking", serialize::ranking(ranked, snap->project.catalog)}});
        });
    }

    /// Dispatch by method and path; used by the HTTP binding and tests.
    Response handle(const std::string& method, const std::string& path, const Params& params,
                    const std::string& body) {
        if (method == "POST" && path == "/project") return post_project(body);
        if (method == "POST" && path == "/query") return post_query(body);
        if (method == "GET" && path == "/distributions") return get_distributions(params);
        if (method == "GET" && path == "/heatmap") return get_heatmap(params);
        if (method == "GET" && path == "/rank") return get_rank(params);
        const std::string prefix = "/samples/", suffix = "/geometry";
        if (method == "GET" && path.starts_with(prefix) && path.ends_with(suffix) &&
            path.size() > prefix.size() + suffix.size())
            return get_geometry(path.substr(prefix.size(), path.size() - prefix.size() - suffix.size()), params);
        return error(404, "no route for " + method + " " + path);
    }

    Session& session() { return session_; }

private:
    template <typename F>
    Response guard(F&& f) {
        try {
            return f();
        } catch (const IngestError& e) {
            return error(400, e.what(), e.field());
        } catch (const Error& e) {
            return error(400, e.what(), e.field());
        } catch (const nlohmann::json::exception& e) {
            return error(400, e.what());
        }
    }

    std::shared_ptr<const Snapshot> require_project() const { return session_.snapshot(); }

    static Response ok(const json& body) { return {200, body.dump()}; }
    static Response error(int status, const std::string& message, const std::string& field = {}) {
        return {status, serialize::error(message, field).dump()};
    }
    static Response no_project() { return error(409, "no project loaded", "project"); }

    static json json_param(const Params& params, const char* name, bool required) {
        auto it = params.find(name);
        if (it == params.end() || it->second.empty()) {
            if (required) throw ArgumentError(std::string("missing query parameter '") + name + "'", name);
            return nullptr;
        }
        try {
            return json::parse(it->second);
        } catch (const nlohmann::json::parse_error&) {
            throw ArgumentError(std::string("parameter '") + name + "' is not valid JSON", name);
        }
    }

    static std::string string_field(const json& j, const char* name) {
        const auto& v = j.at(name);
        if (!v.is_string()) throw ArgumentError(std::string("'") + name + "' must be a string", name);
        return v.get<std::string>();
    }

    static std::size_t parse_count(const std::string& s, const char* name) {
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || v < 2 || v > 65537)
            throw ArgumentError(std::string("'") + name + "' must be an integer in [2, 65537]", name);
        return v;
    }

    stats::AbundanceMode mode_param(const Params& params) const {
        auto it = params.find("mode");
        return it == params.end() ? session_.mode : stats::parse_mode(it->second);
    }

    stats::Metric metric_param(const Params& params) const {
        auto it = params.find("metric");
        return it == params.end() ? session_.metric : stats::parse_metric(it->second);
    }

    Session& session_;
    std::filesystem::path base_dir_;
};

}  // namespace cohortscope::server
