#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "pathvote/query_graph.hpp"

using namespace pathvote;

namespace {

Labeling two_even_groups(int n, std::uint64_t seed) {
    return make_labeling(n, 2, {n / 2, n - n / 2}, seed);
}

}  // namespace

TEST(PairIndexing, UnrankCoversAllPairsOnce) {
    const int n = 23;
    std::set<std::pair<int, int>> seen;
    for (long long idx = 0; idx < pair_count(n); ++idx) {
        auto [a, b] = unrank_pair(idx, n);
        ASSERT_LT(a, b);
        ASSERT_GE(a, 0);
        ASSERT_LT(b, n);
        ASSERT_TRUE(seen.emplace(a, b).second);
    }
    EXPECT_EQ(static_cast<long long>(seen.size()), pair_count(n));
}

TEST(SamplingPlanType, Validation) {
    EXPECT_THROW(SamplingPlan::bernoulli(1.5), std::invalid_argument);
    EXPECT_THROW(SamplingPlan::bernoulli(-0.1), std::invalid_argument);
    EXPECT_THROW(SamplingPlan::fixed_count(-1), std::invalid_argument);
}

TEST(Sampling, FixedCountAtPairCountIsComplete) {
    Labeling lab = two_even_groups(5, 1);
    QueryGraph g = sample_query_graph(lab, NoiseSpec::sign_flip(0.1),
                                      SamplingPlan::fixed_count(10), 7);
    EXPECT_EQ(g.edge_count(), 10);
    for (int x = 0; x < 5; ++x)
        for (int y = x + 1; y < 5; ++y) EXPECT_TRUE(g.has_edge(x, y));
}

TEST(Sampling, FixedCountIsExactForEverySeed) {
    Labeling lab = two_even_groups(60, 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        QueryGraph g = sample_query_graph(lab, NoiseSpec::sign_flip(0.1),
                                          SamplingPlan::fixed_count(400), seed);
        ASSERT_EQ(g.edge_count(), 400);
    }
}

TEST(Sampling, FixedCountOverPairCountThrows) {
    Labeling lab = two_even_groups(5, 1);
    EXPECT_THROW(sample_query_graph(lab, NoiseSpec::sign_flip(0.1),
                                    SamplingPlan::fixed_count(11), 7),
                 std::invalid_argument);
}

TEST(Sampling, BernoulliZeroIsEmpty) {
    Labeling lab = two_even_groups(100, 3);
    QueryGraph g = sample_query_graph(lab, NoiseSpec::sign_flip(0.1),
                                      SamplingPlan::bernoulli(0.0), 7);
    EXPECT_EQ(g.edge_count(), 0);
}

TEST(Sampling, BernoulliMeanEdgeCount) {
    Labeling lab = two_even_groups(200, 4);
    const double p = 0.3;
    const double expected = p * pair_count(200);  // 5970
    double total = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s)
        total += sample_query_graph(lab, NoiseSpec::sign_flip(0.1),
                                    SamplingPlan::bernoulli(p), 1000 + s)
                     .edge_count();
    double mean = total / seeds;
    double sigma_mean =
        std::sqrt(pair_count(200) * p * (1 - p) / static_cast<double>(seeds));
    EXPECT_NEAR(mean, expected, 3 * sigma_mean);
}

TEST(Sampling, DeterministicGivenSeed) {
    Labeling lab = two_even_groups(80, 5);
    QueryGraph a = sample_query_graph(lab, NoiseSpec::sign_flip(0.2),
                                      SamplingPlan::bernoulli(0.2), 42);
    QueryGraph b = sample_query_graph(lab, NoiseSpec::sign_flip(0.2),
                                      SamplingPlan::bernoulli(0.2), 42);
    EXPECT_EQ(a.sorted_edges(), b.sorted_edges());
}

TEST(Sampling, ResponsesComeFromTheOracle) {
    Labeling lab = two_even_groups(40, 6);
    NoiseSpec noise = NoiseSpec::sign_flip(0.0);
    QueryGraph g = sample_query_graph(lab, noise, SamplingPlan::bernoulli(0.5), 9);
    for (const auto& [a, b, v] : g.sorted_edges())
        EXPECT_EQ(v, lab.same_group(a, b) ? 1 : -1);
}

// Positive-sign subgraph of the balanced two-cluster model: within-cluster
// pairs keep their edge with probability p(1-q) = p(1/2 + c), cross-cluster
// with probability p q. Checked as empirical densities.
TEST(Sampling, PlantedPartitionDensities) {
    const int n = 300;
    const double p = 0.4, q = 0.2;
    Labeling lab = two_even_groups(n, 7);
    long long within_pos = 0, within_all = 0, cross_pos = 0, cross_all = 0;
    for (int s = 0; s < 10; ++s) {
        QueryGraph g = sample_query_graph(lab, NoiseSpec::sign_flip(q),
                                          SamplingPlan::bernoulli(p), 50 + s);
        for (int x = 0; x < n; ++x)
            for (int y = x + 1; y < n; ++y) {
                bool same = lab.same_group(x, y);
                (same ? within_all : cross_all) += 1;
                if (g.has_edge(x, y) && g.value(x, y) == 1)
                    (same ? within_pos : cross_pos) += 1;
            }
    }
    const double c = 0.5 - q;
    double within_rate = static_cast<double>(within_pos) / within_all;
    double cross_rate = static_cast<double>(cross_pos) / cross_all;
    double sigma_w = std::sqrt(p * (0.5 + c) / within_all);
    double sigma_x = std::sqrt(p * q / cross_all);
    EXPECT_NEAR(within_rate, p * (0.5 + c), 4 * sigma_w);  // = p(1-q)
    EXPECT_NEAR(cross_rate, p * q, 4 * sigma_x);
}

TEST(GraphStructure, AddEdgeValidation) {
    QueryGraph g(5, 2, NoiseModel::sign_flip);
    g.add_edge(0, 1, 1);
    EXPECT_THROW(g.add_edge(0, 1, -1), std::invalid_argument);  // duplicate
    EXPECT_THROW(g.add_edge(1, 0, 1), std::invalid_argument);   // same pair
    EXPECT_THROW(g.add_edge(2, 2, 1), std::invalid_argument);   // self loop
    EXPECT_THROW(g.add_edge(0, 9, 1), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 2, 3), std::invalid_argument);   // bad sign
}

TEST(GraphStructure, ModularOrientationConvention) {
    QueryGraph g(4, 5, NoiseModel::modular_pm);
    g.add_edge(2, 1, 3);  // stored for (1,2) as 5-3=2
    EXPECT_EQ(g.value(1, 2), 2);
    EXPECT_EQ(g.value(2, 1), 3);
    g.add_edge(0, 3, 0);
    EXPECT_EQ(g.value(3, 0), 0);  // zero negates to zero
}

TEST(GraphStructure, NeighborsAreSortedAfterFinalize) {
    QueryGraph g(6, 2, NoiseModel::sign_flip);
    g.add_edge(5, 0, 1);
    g.add_edge(3, 0, -1);
    g.add_edge(0, 4, 1);
    g.finalize();
    EXPECT_EQ(g.neighbors(0), (std::vector<int>{3, 4, 5}));
    EXPECT_EQ(g.degree(0), 3);
}

TEST(Budget, NoiselessLimit) {
    const int n = 1000;
    long long b = query_budget(n, 0.5);
    EXPECT_EQ(b, static_cast<long long>(std::ceil(20.0 * n * std::log(n))));
}

TEST(Budget, FrozenReferenceValue) {
    // n = 1e4, c = 0.45: L = ln(1e4)/ln(ln(1e4)) = 4.1481913138...,
    // ceil(20 * 1e4 * ln(1e4) * 0.9^(-L)) = 2851784 (independently computed
    // with 50-digit arithmetic).
    BudgetReport rep = query_budget_report(10000, 0.45);
    EXPECT_NEAR(rep.length_scale, 4.1481913138017059, 1e-12);
    EXPECT_EQ(rep.budget, 2851784);
    EXPECT_FALSE(rep.clamped);
}

TEST(Budget, ClampsToPairCount) {
    BudgetReport rep = query_budget_report(50, 0.05);
    EXPECT_TRUE(rep.clamped);
    EXPECT_EQ(rep.budget, pair_count(50));
}

TEST(Budget, DomainErrors) {
    EXPECT_THROW(query_budget(2, 0.3), std::invalid_argument);
    EXPECT_THROW(query_budget(100, 0.0), std::invalid_argument);
    EXPECT_THROW(query_budget(100, 0.6), std::invalid_argument);
    EXPECT_THROW(query_budget(100, 0.3, -1.0), std::invalid_argument);
}

TEST(DegreeCheck, EmptyAndCompleteGraphs) {
    QueryGraph empty(7, 2, NoiseModel::sign_flip);
    DegreeReport rep = check_min_degree(empty, 1);
    EXPECT_EQ(rep.min_degree, 0);
    EXPECT_EQ(rep.violating.size(), 7u);

    Labeling lab = two_even_groups(10, 1);
    QueryGraph complete = sample_query_graph(
        lab, NoiseSpec::sign_flip(0.0), SamplingPlan::fixed_count(45), 3);
    DegreeReport rep2 = check_min_degree(complete, 9);
    EXPECT_EQ(rep2.min_degree, 9);
    EXPECT_TRUE(rep2.violating.empty());
}

TEST(DegreeCheck, TypicalDensityKeepsDegreesHigh) {
    const int n = 500;
    const double p = 40.0 * std::log(n) / n;
    const double threshold = 5.0 * std::log(n);
    Labeling lab = two_even_groups(n, 2);
    int violations = 0;
    for (int s = 0; s < 20; ++s) {
        QueryGraph g = sample_query_graph(lab, NoiseSpec::sign_flip(0.1),
                                          SamplingPlan::bernoulli(p), 900 + s);
        if (!check_min_degree(g, threshold).violating.empty()) ++violations;
    }
    EXPECT_LE(violations, 1);  // expect ~0 at this density
}

TEST(Serialization, RoundTripsBothVariants) {
    Labeling lab = make_labeling(30, 3, {}, 8);
    for (NoiseSpec noise :
         {NoiseSpec::sign_flip(0.2), NoiseSpec::modular_pm(0.2)}) {
        QueryGraph g = sample_query_graph(lab, noise,
                                          SamplingPlan::bernoulli(0.3), 11);
        std::stringstream ss;
        write_graph(ss, g);
        QueryGraph back = read_graph(ss);
        EXPECT_EQ(back.n(), g.n());
        EXPECT_EQ(back.k(), g.k());
        EXPECT_EQ(back.variant(), g.variant());
        EXPECT_EQ(back.sorted_edges(), g.sorted_edges());
    }
}

TEST(Serialization, RejectsGarbage) {
    std::stringstream empty("");
    EXPECT_THROW(read_graph(empty), std::invalid_argument);
    std::stringstream bad_header("abc def\n");
    EXPECT_THROW(read_graph(bad_header), std::invalid_argument);
    std::stringstream bad_edge("5 2 sign_flip\n0 1 x\n");
    EXPECT_THROW(read_graph(bad_edge), std::invalid_argument);
}
