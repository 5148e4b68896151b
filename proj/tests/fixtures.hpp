#pragma once

#include "cohortscope/cohortscope.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace fixtures {

using namespace cohortscope;

/// c1=(0,0,A), c2=(1,0,B), c3=(3,0,A) in sample S1 (cohort A); S2 in cohort B
/// holds a lone A cell. Radius 1.5.
inline Project three_cell() {
    Project p;
    p.catalog = CellTypeCatalog({"A", "B"});
    p.radius = 1.5;
    Sample s1{"S1", {{"c1", 0, 0, 0}, {"c2", 1, 0, 1}, {"c3", 3, 0, 0}}, {}};
    Sample s2{"S2", {{"d1", 0, 0, 0}}, {}};
    p.samples.emplace("S1", s1);
    p.samples.emplace("S2", s2);
    p.cohort_a = {"first", Role::A, {"S1"}};
    p.cohort_b = {"second", Role::B, {"S2"}};
    return p;
}

/// Random project: uniform points, types and radius drawn from `rng`.
inline Project random_project(std::mt19937_64& rng, std::size_t max_cells = 2000, std::size_t max_types = 20,
                              std::size_t samples_per_cohort = 3) {
    std::uniform_int_distribution<std::size_t> n_types(1, max_types);
    const std::size_t types = n_types(rng);
    std::vector<std::string> labels;
    for (std::size_t t = 0; t < types; ++t) labels.push_back("t" + std::to_string(t));
    Project p;
    p.catalog = CellTypeCatalog(labels);
    p.radius = std::uniform_real_distribution<double>(0.5, 30.0)(rng);
    std::uniform_int_distribution<TypeId> pick_type(0, static_cast<TypeId>(types - 1));
    for (Role r : {Role::A, Role::B}) {
        Cohort& c = r == Role::A ? p.cohort_a : p.cohort_b;
        c.role = r;
        c.label = to_string(r);
        for (std::size_t k = 0; k < samples_per_cohort; ++k) {
            Sample s;
            s.sample_id = std::string(to_string(r)) + std::to_string(k);
            const auto n = std::uniform_int_distribution<std::size_t>(1, max_cells)(rng);
            const double side = std::uniform_real_distribution<double>(10.0, 400.0)(rng);
            std::uniform_real_distribution<double> coord(0.0, side);
            for (std::size_t i = 0; i < n; ++i) {
                // Snap some coordinates to a lattice so exact-radius ties occur.
                double x = coord(rng), y = coord(rng);
                if (i % 7 == 0) {
                    x = std::round(x / p.radius) * p.radius;
                    y = std::round(y);
                }
                s.cells.push_back({"c" + std::to_string(i), x, y, pick_type(rng)});
            }
            c.sample_ids.push_back(s.sample_id);
            p.samples.emplace(s.sample_id, std::move(s));
        }
    }
    return p;
}

/// Random query over `types` types.
inline MicroQuery random_query(std::mt19937_64& rng, std::size_t types) {
    std::uniform_int_distribution<TypeId> pick(0, static_cast<TypeId>(types - 1));
    std::uniform_int_distribution<int> center_n(1, std::min<int>(3, static_cast<int>(types)));
    std::uniform_int_distribution<int> env_n(0, std::min<int>(3, static_cast<int>(types)));
    std::vector<TypeId> center, env;
    for (int i = center_n(rng); i > 0; --i) center.push_back(pick(rng));
    for (int i = env_n(rng); i > 0; --i) env.push_back(pick(rng));
    return MicroQuery(center, env, std::bernoulli_distribution(0.5)(rng));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("cohortscope-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace fixtures
