#include "cohortscope/cli.hpp"
#include "cohortscope/http.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int run_serve(const std::string& bind, int port, const std::string& project, const std::string& ui_dir,
              const std::string& metric, const std::string& mode) {
    using namespace cohortscope;
    server::Session session;
    try {
        session.metric = stats::parse_metric(metric);
        session.mode = stats::parse_mode(mode);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kArgumentError;
    }
    if (!project.empty()) {
        try {
            const auto revision = session.load(ingest::load_project(std::filesystem::path(project)));
            std::cerr << "loaded " << project << " (revision " << revision << ")\n";
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cli::kInputError;
        }
    }
    server::Api api(session, std::filesystem::current_path());
    httplib::Server http;
    server::install_routes(http, api, ui_dir);
    std::cerr << "listening on " << bind << ':' << port << '\n';
    if (!http.listen(bind, port)) {
        std::cerr << "error: cannot listen on " << bind << ':' << port << '\n';
        return cli::kInputError;
    }
    return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace cohortscope;
    CLI::App app{"Two-cohort comparison of cell-typed spatial tissue samples"};
    app.set_version_flag("--version", serialize::kVersion);
    app.require_subcommand(1);

    cli::ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Write a full JSON comparison report");
    report_cmd->add_option("--project", report.project, "Project config (project.json)")->required();
    report_cmd->add_option("--metric", report.metric, "silhouette | dunn")->capture_default_str();
    report_cmd->add_option("--mode", report.mode, "absolute | relative")->capture_default_str();
    report_cmd->add_option("--top", report.top, "Outlier sections for the top-k ranked types")->capture_default_str();
    report_cmd->add_option("--out", report.out, "Output file (default: stdout)");

    cli::QueryArgs query;
    auto* query_cmd = app.add_subcommand("query", "Per-sample counts of one microenvironment query as CSV");
    query_cmd->add_option("--project", query.project, "Project config (project.json)")->required();
    query_cmd->add_option("--query", query.query, R"(Query JSON, e.g. {"center":["A"],"env":["B"],"exclusive":false})")
        ->required();
    query_cmd->add_option("--mode", query.mode, "absolute | relative")->capture_default_str();

    cli::SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic project on disk");
    synth_cmd->add_option("--spec", synth.spec, "Generator spec JSON, or 'builtin' for the built-in spec")->required();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();

    std::string bind = "127.0.0.1", project, ui_dir, metric = "silhouette", mode = "relative";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Run the JSON HTTP API");
    serve_cmd->add_option("--bind", bind, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", port, "TCP port")->capture_default_str();
    serve_cmd->add_option("--project", project, "Project config to load at startup");
    serve_cmd->add_option("--ui", ui_dir, "Directory of static UI assets served under /ui");
    serve_cmd->add_option("--metric", metric, "Default metric: silhouette | dunn")->capture_default_str();
    serve_cmd->add_option("--mode", mode, "Default mode: absolute | relative")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kOk : cli::kArgumentError;
    }

    if (*report_cmd) return cli::cmd_report(report, std::cout, std::cerr);
    if (*query_cmd) return cli::cmd_query(query, std::cout, std::cerr);
    if (*synth_cmd) return cli::cmd_synth(synth, std::cout, std::cerr);
    if (*serve_cmd) return run_serve(bind, port, project, ui_dir, metric, mode);
    return cli::kArgumentError;
}
