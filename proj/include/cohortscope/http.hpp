#pragma once

#include "cohortscope/server.hpp"

#include <httplib.h>

#include <filesystem>
#include <string>

namespace cohortscope::server {

inline Params to_params(const httplib::Request& req) {
    Params p;
    for (const auto& [k, v] : req.params) p.emplace(k, v);
    return p;
}

inline void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
}

/// Registers every API route on `http`. Static UI assets, when `ui_dir`
/// exists, are served under /ui.
inline void install_routes(httplib::Server& http, Api& api, const std::filesystem::path& ui_dir = {}) {
    http.Post("/project", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.post_project(req.body));
    });
    http.Post("/query", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.post_query(req.body));
    });
    http.Get("/distributions", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.get_distributions(to_params(req)));
    });
    http.Get("/heatmap", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.get_heatmap(to_params(req)));
    });
    http.Get("/rank", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.get_rank(to_params(req)));
    });
    http.Get(R"(/samples/([^/]+)/geometry)", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.get_geometry(req.matches[1], to_params(req)));
    });
    if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) http.set_mount_point("/ui", ui_dir.string());
    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) {
            res.set_content(serialize::error("no route for " + req.method + " " + req.path).dump(),
                            "application/json");
        }
    });
}

}  // namespace cohortscope::server
