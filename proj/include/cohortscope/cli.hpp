#pragma once

#include "cohortscope/ingest.hpp"
#include "cohortscope/neighborhood.hpp"
#include "cohortscope/query.hpp"
#include "cohortscope/report.hpp"
#include "cohortscope/stats.hpp"
#include "cohortscope/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

// Batch commands behind the `cohortscope` executable. Each returns the process
// exit code: 0 success, 1 input error, 2 argument error.

namespace cohortscope::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kArgumentError = 2;

struct ReportArgs {
    std::string project;
    std::string metric = "silhouette";
    std::string mode = "relative";
    std::size_t top = 5;
    std::string out;  // empty = stdout
};

struct QueryArgs {
    std::string project;
    std::string query;
    std::string mode = "absolute";
};

struct SynthArgs {
    std::string spec;  // JSON file, or "builtin" for the built-in 13+7 sample spec
    std::uint64_t seed = 1;
    std::string out_dir;
};

inline int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    report::ReportOptions options;
    try {
        options.metric = stats::parse_metric(args.metric);
        options.mode = stats::parse_mode(args.mode);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kArgumentError;
    }
    options.top = args.top;
    try {
        const auto project = ingest::load_project(std::filesystem::path(args.project));
        const auto index = build_index(project);
        const auto text = report::build(project, index, options).dump(2) + "\n";
        if (args.out.empty()) {
            out << text;
        } else {
            std::ofstream file(args.out, std::ios::binary | std::ios::trunc);
            if (!file || !(file << text)) {
                err << "error: cannot write report to '" << args.out << "'\n";
                return kInputError;
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kOk;
}

inline int cmd_query(const QueryArgs& args, std::ostream& out, std::ostream& err) {
    stats::AbundanceMode mode{};
    nlohmann::json wire;
    try {
        mode = stats::parse_mode(args.mode);
        wire = nlohmann::json::parse(args.query);
    } catch (const nlohmann::json::parse_error&) {
        err << "error: --query is not valid JSON\n";
        return kArgumentError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kArgumentError;
    }
    Project project;
    try {
        project = ingest::load_project(std::filesystem::path(args.project));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    MicroQuery q;
    try {
        q = parse_query(wire, project.catalog);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kArgumentError;
    }
    const auto index = build_index(project);
    const auto pair = stats::distribution(project, &index, q, mode);
    for (Role r : {Role::A, Role::B})
        for (const auto& v : pair.values(r)) out << v.sample_id << ',' << ingest::detail::format_double(v.value) << '\n';
    return kOk;
}

inline int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    synth::SynthSpec spec;
    try {
        if (args.spec == "builtin") {
            spec = synth::builtin_spec();
        } else {
            std::ifstream in(args.spec);
            if (!in) {
                err << "error: cannot read spec '" << args.spec << "'\n";
                return kInputError;
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error&) {
                err << "error: spec '" << args.spec << "' is not valid JSON\n";
                return kArgumentError;
            }
            spec = synth::parse_spec(j);
        }
        const auto project = synth::generate_synthetic(spec, args.seed);
        const auto path = ingest::write_project(project, args.out_dir);
        out << path.string() << '\n';
    } catch (const synth::InfeasibleSpec& e) {
        err << "error: infeasible spec: " << e.what() << '\n';
        return kArgumentError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kOk;
}

}  // namespace cohortscope::cli
