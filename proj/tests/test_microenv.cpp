#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cohortscope;
using namespace cohortscope::microenv;
using stats::AbundanceMode;
using stats::Metric;

namespace {

constexpr TypeId A = 0, B = 1;

/// Copy of `p` whose cohort B holds renamed copies of cohort A's samples.
Project identical_cohorts(const Project& p) {
    Project q = p;
    for (const auto& sid : p.cohort_b.sample_ids) q.samples.erase(sid);
    q.cohort_b.sample_ids.clear();
    for (const auto& sid : p.cohort_a.sample_ids) {
        Sample s = p.sample(sid);
        s.sample_id = "copy_" + sid;
        q.cohort_b.sample_ids.push_back(s.sample_id);
        q.samples.emplace(s.sample_id, std::move(s));
    }
    return q;
}

}  // namespace

TEST(CountMatches, ThreeCellFixture) {
    const auto p = fixtures::three_cell();
    const auto idx = build_index(p);
    auto ids = [&](MicroQuery q) { return matched_ids(p.sample("S1"), count_matches(p, idx, "S1", q)); };
    using V = std::vector<std::string>;
    EXPECT_EQ(ids(MicroQuery({A}, {B}, false)), V{"c1"});
    EXPECT_EQ(ids(MicroQuery({A}, {B}, true)), V{"c1"});
    EXPECT_EQ(ids(MicroQuery({A}, {A, B}, false)), V{});
    EXPECT_EQ(ids(MicroQuery({A}, {}, true)), V{"c3"});
    EXPECT_EQ(ids(MicroQuery({A}, {}, false)), (V{"c1", "c3"}));
    EXPECT_EQ(ids(MicroQuery({A, B}, {}, false)), (V{"c1", "c2", "c3"}));
    EXPECT_THROW(count_matches(p, idx, "S1", MicroQuery({}, {B})), ArgumentError);
    EXPECT_THROW(count_matches(p, idx, "S1", MicroQuery({5}, {B})), ArgumentError);
}

TEST(CountMatches, AgreesWithPerCellOracle) {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 10; ++k) {
        const auto p = fixtures::random_project(rng, 800, 6, 2);
        const auto idx = build_index(p);
        for (const auto& [sid, sample] : p.samples) {
            const auto nb = oracle::neighbors(sample, p.radius);
            for (int qn = 0; qn < 25; ++qn) {
                const auto q = fixtures::random_query(rng, p.type_count());
                const auto expected = oracle::matches(sample, nb, {q.center.begin(), q.center.end()},
                                                      {q.env.begin(), q.env.end()}, q.exclusive);
                const auto got = count_matches(p, idx, sid, q);
                ASSERT_EQ(got.cells, expected);
                ASSERT_EQ(got.count, expected.size());
            }
        }
    }
}

TEST(CountMatches, MonotoneExclusiveBoundAndCenterAdditive) {
    std::mt19937_64 rng(32);
    const auto p = fixtures::random_project(rng, 1500, 5, 2);
    const auto idx = build_index(p);
    const auto t = p.type_count();
    for (const auto& [sid, sample] : p.samples) {
        const auto& nb = idx.sample(sid);
        for (int k = 0; k < 50; ++k) {
            const auto q = fixtures::random_query(rng, t);
            const auto base = match_count(sample, nb, MicroQuery(q.center, q.env, false), t);
            EXPECT_LE(match_count(sample, nb, MicroQuery(q.center, q.env, true), t), base);
            auto env = q.env;
            env.push_back(static_cast<TypeId>(rng() % t));
            EXPECT_LE(match_count(sample, nb, MicroQuery(q.center, env, false), t), base);
        }
        for (TypeId i = 0; i < t; ++i)
            for (TypeId j = i + 1; j < t; ++j) {
                const auto env = std::vector<TypeId>{static_cast<TypeId>(rng() % t)};
                EXPECT_EQ(match_count(sample, nb, MicroQuery({i, j}, env), t),
                          match_count(sample, nb, MicroQuery({i}, env), t) + match_count(sample, nb, MicroQuery({j}, env), t));
            }
    }
}

TEST(FrequencyMatrix, ThreeCellFixture) {
    const auto p = fixtures::three_cell();
    const auto idx = build_index(p);
    const auto f = frequency_matrix(p, idx, Role::A);
    EXPECT_EQ(f.at(A, B), 1.0);
    EXPECT_EQ(f.at(A, A), 0.0);
    EXPECT_EQ(f.at(B, A), 1.0);
    EXPECT_EQ(f.at(B, B), 0.0);
    EXPECT_FALSE(f.empty_rows[A]);

    const auto fb = frequency_matrix(p, idx, Role::B);  // lone isolated A cell, no B cells
    EXPECT_TRUE(fb.empty_rows[A]);
    EXPECT_TRUE(fb.empty_rows[B]);
    for (double v : fb.values) EXPECT_EQ(v, 0.0);
}

TEST(FrequencyMatrix, RowsSumToOne) {
    std::mt19937_64 rng(33);
    for (int k = 0; k < 10; ++k) {
        const auto p = fixtures::random_project(rng, 600, 12, 2);
        const auto idx = build_index(p);
        for (Role r : {Role::A, Role::B}) {
            const auto f = frequency_matrix(p, idx, r);
            for (TypeId i = 0; i < f.types; ++i) {
                double sum = 0;
                for (TypeId j = 0; j < f.types; ++j) sum += f.at(i, j);
                if (f.empty_rows[i]) EXPECT_EQ(sum, 0.0);
                else EXPECT_NEAR(sum, 1.0, 1e-9);
            }
        }
    }
}

TEST(Heatmap, DifferenceArithmetic) {
    // Cohort B: five clustered A cells plus one B cell inside every A's radius.
    // Each A center has 4 A slots and 1 B slot, so F_B[A][B] = 5/25.
    Project p = fixtures::three_cell();
    Sample s{"S2", {}, {}};
    for (int i = 0; i < 5; ++i) s.cells.push_back({"a" + std::to_string(i), 0.0, 0.1 * i, A});
    s.cells.push_back({"b", 0.5, 0.2, B});
    p.samples["S2"] = s;
    const auto idx = build_index(p);
    const auto fb = frequency_matrix(p, idx, Role::B);
    EXPECT_DOUBLE_EQ(fb.at(A, B), 0.2);
    const auto d = difference_heatmap(p, idx);
    EXPECT_DOUBLE_EQ(d.at(A, B), 0.8);
    EXPECT_EQ(d.variant, HeatmapVariant::difference);
}

TEST(Heatmap, IdenticalCohortsAndSwap) {
    std::mt19937_64 rng(34);
    for (int k = 0; k < 5; ++k) {
        const auto p = fixtures::random_project(rng, 500, 6, 3);
        const auto idx = build_index(p);
        const auto q = p.swapped();
        const auto idx_q = build_index(q);
        const auto d = difference_heatmap(p, idx), dq = difference_heatmap(q, idx_q);
        for (std::size_t i = 0; i < d.values.size(); ++i) EXPECT_EQ(dq.values[i], -d.values[i]);
        for (auto metric : {Metric::silhouette, Metric::dunn}) {
            const auto m = metric_heatmap(p, idx, metric), mq = metric_heatmap(q, idx_q, metric);
            for (std::size_t i = 0; i < m.values.size(); ++i) EXPECT_EQ(mq.values[i], -m.values[i]);
        }

        const auto same = identical_cohorts(p);
        const auto idx_s = build_index(same);
        for (double v : difference_heatmap(same, idx_s).values) EXPECT_EQ(v, 0.0);
        for (double v : metric_heatmap(same, idx_s, Metric::silhouette).values) EXPECT_EQ(v, 0.0);
        for (double v : metric_heatmap(same, idx_s, Metric::dunn).values) EXPECT_EQ(v, 0.0);
    }
}

TEST(Heatmap, MetricEntriesMatchQueryRoute) {
    std::mt19937_64 rng(35);
    const auto p = fixtures::random_project(rng, 400, 4, 4);
    const auto idx = build_index(p);
    const auto h = metric_heatmap(p, idx, Metric::silhouette);
    for (TypeId i = 0; i < p.type_count(); ++i)
        for (TypeId j = 0; j < p.type_count(); ++j) {
            const auto pair = stats::distribution(p, &idx, MicroQuery({i}, {j}), AbundanceMode::relative);
            const auto a = pair.raw(Role::A), b = pair.raw(Role::B);
            const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
            const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
            const double score = std::max(0.0, stats::silhouette(a, b));
            const double expected = ma > mb ? score : ma < mb ? -score : 0.0;
            EXPECT_DOUBLE_EQ(h.at(i, j), expected) << i << "," << j;
        }
}

TEST(Heatmap, PlantedPairDominatesMetricVariant) {
    synth::SynthSpec spec;
    spec.cells_min = 1500;
    spec.cells_max = 4000;
    spec.mean_neighbors = 4;
    spec.colocalizations = {{3, 9, Role::A, 1.0}};
    const auto p = synth::generate_synthetic(spec, 5);
    const auto idx = build_index(p);
    const auto h = metric_heatmap(p, idx, Metric::silhouette);
    const double planted = h.at(3, 9);
    EXPECT_GT(planted, 0.0);
    for (TypeId j = 0; j < p.type_count(); ++j) EXPECT_LE(h.at(3, j), planted);
}

TEST(Remaining, EntriesAndBounds) {
    std::mt19937_64 rng(36);
    auto p = fixtures::random_project(rng, 600, 4, 3);
    while (p.type_count() != 4) p = fixtures::random_project(rng, 600, 4, 3);
    const auto idx = build_index(p);
    const MicroQuery base({0}, {1}, false);
    const auto plots = remaining_plots(p, idx, base, AbundanceMode::absolute, Metric::silhouette);
    ASSERT_EQ(plots.size(), 4u);
    int none = 0;
    std::set<TypeId> exts;
    const auto base_pair = stats::distribution(p, &idx, base, AbundanceMode::absolute);
    for (std::size_t k = 0; k < plots.size(); ++k) {
        const auto& e = plots[k];
        if (!e.extension) {
            ++none;
            EXPECT_TRUE(e.query.exclusive);
            EXPECT_EQ(e.query.env, base.env);
        } else {
            exts.insert(*e.extension);
            EXPECT_FALSE(e.query.exclusive);
        }
        for (Role r : {Role::A, Role::B})
            for (std::size_t s = 0; s < base_pair.values(r).size(); ++s)
                EXPECT_LE(e.pair.values(r)[s].value, base_pair.values(r)[s].value);
        if (k > 0) {
            EXPECT_GE(plots[k - 1].score, e.score);
        }
        EXPECT_EQ(e.score, stats::separability(e.pair, Metric::silhouette));
    }
    EXPECT_EQ(none, 1);
    EXPECT_EQ(exts, (std::set<TypeId>{0, 2, 3}));
}

TEST(Remaining, TiesKeepCatalogOrderWithNoneFirst) {
    auto p = fixtures::three_cell();
    p.samples["S2"] = p.samples["S1"];
    p.samples["S2"].sample_id = "S2";
    const auto idx = build_index(p);
    const auto plots = remaining_plots(p, idx, MicroQuery({A}, {}), AbundanceMode::absolute, Metric::silhouette);
    ASSERT_EQ(plots.size(), 3u);
    EXPECT_FALSE(plots[0].extension.has_value());
    EXPECT_EQ(plots[1].extension, A);
    EXPECT_EQ(plots[2].extension, B);
}
