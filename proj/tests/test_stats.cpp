#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace cohortscope;
using namespace cohortscope::stats;

namespace {

Sample aab() {
    return {"S", {{"1", 0, 0, 0}, {"2", 0, 0, 0}, {"3", 0, 0, 1}}, {}};
}

std::vector<double> random_values(std::mt19937_64& rng) {
    const auto n = std::uniform_int_distribution<int>(1, 40)(rng);
    const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
    std::vector<double> v;
    std::normal_distribution<double> g(std::uniform_real_distribution<double>(-50, 50)(rng),
                                       std::uniform_real_distribution<double>(0.01, 20)(rng));
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < n; ++i) {
        switch (kind) {
        case 0: v.push_back(g(rng)); break;
        case 1: v.push_back(u(rng)); break;
        case 2: v.push_back(u(rng) < 0.5 ? g(rng) : g(rng) + 100); break;
        default: v.push_back(std::floor(u(rng) * 5)); break;  // heavy ties
        }
    }
    return v;
}

}  // namespace

TEST(Abundance, CountsAndFractions) {
    const auto s = aab();
    EXPECT_EQ(abundance(s, {0}, AbundanceMode::absolute), 2.0);
    EXPECT_EQ(abundance(s, {0, 1}, AbundanceMode::relative), 1.0);
    EXPECT_DOUBLE_EQ(abundance(s, {1}, AbundanceMode::relative), 1.0 / 3.0);
    EXPECT_THROW(abundance(s, {}, AbundanceMode::absolute), ArgumentError);
}

TEST(Abundance, RelativeSingletonsSumToOne) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 5; ++k) {
        const auto p = fixtures::random_project(rng, 500, 15, 2);
        for (const auto& [id, s] : p.samples) {
            double sum = 0;
            for (std::size_t t = 0; t < p.type_count(); ++t)
                sum += abundance(s, {static_cast<TypeId>(t)}, AbundanceMode::relative);
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
    }
}

TEST(Abundance, ColdCohortMacrophageOutlierReplica) {
    synth::SynthSpec spec;
    spec.cells_min = 2678;
    spec.cells_max = 6000;
    spec.type_weights = std::vector<double>(12, 1.0);
    spec.type_weights[4] = 0.3;  // macrophages are rare
    spec.outliers = {{4, Role::B, 2, 0.18}};
    const auto p = synth::generate_synthetic(spec, 7);
    const auto pair = distribution(p, nullptr, TypeSet{4}, AbundanceMode::relative);
    for (std::size_t k = 0; k < pair.values_b.size(); ++k) {
        if (k == 2) EXPECT_GT(pair.values_b[k].value, 0.16);
        else EXPECT_LE(pair.values_b[k].value, 0.05) << pair.values_b[k].sample_id;
    }
}

TEST(Distribution, AggregateIsSumOfMembers) {
    std::mt19937_64 rng(2);
    const auto p = fixtures::random_project(rng, 400, 6, 3);
    for (auto mode : {AbundanceMode::absolute, AbundanceMode::relative}) {
        const auto all = distribution(p, nullptr, TypeSet{0, 1, 2}, mode);
        for (Role r : {Role::A, Role::B}) {
            for (std::size_t k = 0; k < all.values(r).size(); ++k) {
                double sum = 0;
                for (TypeId t : {0u, 1u, 2u})
                    if (t < p.type_count()) sum += distribution(p, nullptr, TypeSet{t}, mode).values(r)[k].value;
                EXPECT_NEAR(all.values(r)[k].value, sum, 1e-12);
            }
        }
    }
}

TEST(Distribution, CohortSwapSwapsValues) {
    std::mt19937_64 rng(4);
    const auto p = fixtures::random_project(rng, 300, 4, 3);
    const auto q = p.swapped();
    const auto idx = build_index(p);
    const auto idx_q = build_index(q);
    const Subject subjects[] = {TypeSet{0}, MicroQuery({0}, {0}, false)};
    for (const auto& s : subjects) {
        const auto a = distribution(p, &idx, s, AbundanceMode::relative);
        const auto b = distribution(q, &idx_q, s, AbundanceMode::relative);
        EXPECT_EQ(a.values_a, b.values_b);
        EXPECT_EQ(a.values_b, b.values_a);
    }
}

TEST(Distribution, MicroQueryOnFixture) {
    const auto p = fixtures::three_cell();
    const auto idx = build_index(p);
    const auto d = distribution(p, &idx, MicroQuery({0}, {1}), AbundanceMode::absolute);
    ASSERT_EQ(d.values_a.size(), 1u);
    EXPECT_EQ(d.values_a[0], (SampleValue{"S1", 1.0}));
    EXPECT_EQ(d.values_b[0], (SampleValue{"S2", 0.0}));
    EXPECT_THROW(distribution(p, nullptr, MicroQuery({0}, {1}), AbundanceMode::absolute), ArgumentError);
}

TEST(Kde, SingleValuePeak) {
    const std::vector<double> v{3.25};
    const auto c = kde(v, 257);
    const double h = c.bandwidth;
    EXPECT_EQ(h, std::max(1e-3, 1e-3 * 3.25));
    EXPECT_NEAR(c.grid[128], 3.25, 1e-12);
    EXPECT_NEAR(c.density[128], 1.0 / (h * std::sqrt(2 * std::numbers::pi)), 1e-9);
    EXPECT_EQ(*std::max_element(c.density.begin(), c.density.end()), c.density[128]);
}

TEST(Kde, SilvermanBandwidth) {
    // sd = 1.8708..., IQR = 2.5 -> IQR/1.34 = 1.8657 is the smaller spread
    const std::vector<double> v{1, 2, 3, 4, 5, 6};
    const double expected = 0.9 * (2.5 / 1.34) * std::pow(6.0, -0.2);
    EXPECT_NEAR(silverman_bandwidth(v), expected, 1e-15);
    // IQR = 0 but sd > 0 falls back to sd
    const std::vector<double> w{1, 1, 1, 1, 1, 9};
    const double sd = std::sqrt((5 * std::pow(1 - 7.0 / 3, 2) + std::pow(9 - 7.0 / 3, 2)) / 5);
    EXPECT_NEAR(silverman_bandwidth(w), 0.9 * sd * std::pow(6.0, -0.2), 1e-12);
    EXPECT_THROW(kde(std::vector<double>{}), ArgumentError);
}

TEST(Kde, BimodalMatchesClosedForm) {
    const std::vector<double> v{0, 0, 0, 10, 10, 10};
    const auto c = kde(v, 512);
    std::vector<double> maxima;
    for (std::size_t k = 1; k + 1 < c.grid.size(); ++k) {
        EXPECT_NEAR(c.density[k], oracle::gaussian_mixture(v, c.bandwidth, c.grid[k]), 1e-12);
        if (c.density[k] > c.density[k - 1] && c.density[k] >= c.density[k + 1]) maxima.push_back(c.grid[k]);
    }
    ASSERT_EQ(maxima.size(), 2u);
    EXPECT_NEAR(maxima[0], 0.0, 0.2);
    EXPECT_NEAR(maxima[1], 10.0, 0.2);
}

TEST(Kde, NormalizedAndTranslationEquivariant) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 200; ++k) {
        const auto v = random_values(rng);
        const auto c = kde(v, 256);
        const double area = trapezoid(c);
        EXPECT_GE(area, 0.99);
        EXPECT_LE(area, 1.01);
        EXPECT_NEAR(c.grid.front(), *std::min_element(v.begin(), v.end()) - 4 * c.bandwidth, 1e-9);

        const double shift = std::uniform_real_distribution<double>(-100, 100)(rng);
        auto w = v;
        for (auto& x : w) x += shift;
        const auto d = kde(w, 256);
        if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end()) continue;  // degenerate h
        ASSERT_EQ(c.grid.size(), d.grid.size());
        EXPECT_NEAR(c.bandwidth, d.bandwidth, 1e-9);
        for (std::size_t i = 0; i < c.grid.size(); ++i) {
            EXPECT_NEAR(c.grid[i] + shift, d.grid[i], 1e-9);
            EXPECT_NEAR(c.density[i], d.density[i], 1e-9);
        }
    }
}

TEST(Separability, FrozenExamples) {
    const std::vector<double> a{1, 2}, b{8, 9};
    EXPECT_NEAR(silhouette(a, b), 0.85641, 1e-5);
    EXPECT_NEAR(oracle::silhouette(a, b), 0.85641, 1e-5);
    EXPECT_EQ(dunn(a, b), 6.0);
    EXPECT_EQ(silhouette(std::vector<double>{0, 0}, std::vector<double>{10, 10}), 1.0);
}

TEST(Separability, DegenerateConventions) {
    EXPECT_EQ(silhouette(std::vector<double>{4}, std::vector<double>{4}), 0.0);
    EXPECT_EQ(silhouette(std::vector<double>{1}, std::vector<double>{4}), 1.0);
    EXPECT_EQ(dunn(std::vector<double>{2, 2}, std::vector<double>{2}), 0.0);
    EXPECT_EQ(dunn(std::vector<double>{2, 2}, std::vector<double>{3, 3}), kDunnSentinel);
    EXPECT_THROW(silhouette(std::vector<double>{}, std::vector<double>{1}), ArgumentError);
}

TEST(Separability, AgreesWithBruteForceAndIsBounded) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 300; ++k) {
        const auto a = random_values(rng), b = random_values(rng);
        const double s = silhouette(a, b), d = dunn(a, b);
        EXPECT_NEAR(s, oracle::silhouette(a, b), 1e-12);
        EXPECT_NEAR(d, oracle::dunn(a, b), 1e-12 * std::max(1.0, d));
        EXPECT_GE(s, -1.0);
        EXPECT_LE(s, 1.0);
        EXPECT_GE(d, 0.0);
    }
}

TEST(Separability, ScaleInvariance) {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 100; ++k) {
        auto a = random_values(rng), b = random_values(rng);
        const double s = silhouette(a, b), d = dunn(a, b);
        const double scale = std::uniform_real_distribution<double>(0.01, 100)(rng);
        const double offset = std::uniform_real_distribution<double>(-10, 10)(rng);
        for (auto* v : {&a, &b})
            for (auto& x : *v) x = scale * x + offset;
        EXPECT_NEAR(silhouette(a, b), s, 1e-9);
        if (d < kDunnSentinel) {
            EXPECT_NEAR(dunn(a, b), d, 1e-9 * std::max(1.0, d));
        }
    }
}

TEST(Rank, PlantedTypeFirstUnderBothMetrics) {
    synth::SynthSpec spec;
    spec.cells_min = 1000;
    spec.cells_max = 3000;
    spec.enrichments = {{7, Role::A, 2.0}};
    const auto p = synth::generate_synthetic(spec, 42);
    for (auto metric : {Metric::silhouette, Metric::dunn}) {
        const auto ranked = rank_subjects(p, singleton_subjects(p.catalog), metric, AbundanceMode::relative);
        EXPECT_EQ(ranked.front().subject, TypeSet{7}) << to_string(metric);
        for (const auto& r : ranked)
            EXPECT_EQ(r.score, separability(distribution(p, nullptr, r.subject, AbundanceMode::relative), metric));
    }
}

TEST(Rank, TiesKeepCatalogOrderAndOutputIsPermutation) {
    auto p = fixtures::three_cell();
    p.samples["S2"] = p.samples["S1"];
    p.samples["S2"].sample_id = "S2";
    std::vector<TypeSet> subjects{{1}, {0}, {0, 1}};
    const auto ranked = rank_subjects(p, subjects, Metric::silhouette, AbundanceMode::absolute);
    ASSERT_EQ(ranked.size(), 3u);
    EXPECT_EQ(ranked[0].subject, TypeSet{0});
    EXPECT_EQ(ranked[1].subject, (TypeSet{0, 1}));
    EXPECT_EQ(ranked[2].subject, TypeSet{1});
    for (const auto& r : ranked) EXPECT_EQ(r.score, 0.0);
}

TEST(Search, SubstringMatchesFirst) {
    CellTypeCatalog c({"B-cell", "Tumor-prolif", "t-cell", "TUMOR-dorm"});
    EXPECT_EQ(search_types(c, "tumor"), (std::vector<TypeId>{1, 3, 0, 2}));
    EXPECT_EQ(search_types(c, ""), (std::vector<TypeId>{0, 1, 2, 3}));
    EXPECT_EQ(search_types(c, "xyz"), (std::vector<TypeId>{0, 1, 2, 3}));
    EXPECT_EQ(search_types(c, "CELL"), (std::vector<TypeId>{0, 2, 1, 3}));
}
