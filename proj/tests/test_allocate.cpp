#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "epsopt/allocate.hpp"
#include "oracles.hpp"

using namespace epsopt;

namespace {
AllocationProblem problem(const std::vector<double>& probs, std::int64_t budget, std::size_t k = 2) {
    AllocationProblem p;
    for (std::size_t g = 0; g < probs.size(); ++g) p.groups.push_back({"g" + std::to_string(g), probs[g]});
    p.total_budget = budget;
    p.num_treatments = k;
    return p;
}
}  // namespace

TEST(Allocate, Examples) {
    EXPECT_EQ(integer_allocation(problem({0.5, 0.5}, 20)), (std::vector<std::int64_t>{5, 5}));
    EXPECT_EQ(integer_allocation(problem({0.8, 0.2}, 200)), (std::vector<std::int64_t>{72, 28}));
    const auto c = continuous_allocation(problem({0.8, 0.2}, 200));
    EXPECT_NEAR(c[0] / c[1], std::cbrt(16.0), 1e-12);
    EXPECT_NEAR(c[0] + c[1], 100.0, 1e-12);
    EXPECT_THROW(integer_allocation(problem({0.5, 0.5}, 3)), std::invalid_argument);
    EXPECT_EQ(problem({1.0}, 7, 3).dropped_units(), 1);
}

TEST(Allocate, MatchesExhaustiveSplit) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.02, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t groups = 2 + gen() % 2;
        std::vector<double> probs(groups);
        double s = 0;
        for (auto& p : probs) s += (p = u(gen));
        for (auto& p : probs) p /= s;
        double check = 0;
        for (std::size_t g = 0; g + 1 < groups; ++g) check += probs[g];
        probs.back() = 1.0 - check;
        const std::size_t k = 2 + gen() % 3;
        const std::int64_t budget = static_cast<std::int64_t>(k * groups + gen() % 150);
        const auto p = problem(probs, budget, k);
        const auto got = integer_allocation(p);
        const auto want = oracle::exhaustive_allocation(probs, p.per_treatment_budget());
        EXPECT_NEAR(oracle::allocation_value(probs, got), oracle::allocation_value(probs, want), 1e-13);
        EXPECT_EQ(std::accumulate(got.begin(), got.end(), std::int64_t{0}), p.per_treatment_budget());
    }
}

TEST(Allocate, LargerGroupsGetMore) {
    const auto n = integer_allocation(problem({0.1, 0.2, 0.3, 0.4}, 2000, 2));
    EXPECT_TRUE(std::is_sorted(n.begin(), n.end()));
    const auto c = continuous_allocation(problem({0.1, 0.2, 0.3, 0.4}, 2000, 2));
    EXPECT_LE(allocation_objective(std::vector<CovariateGroup>{{"a", .1}, {"b", .2}, {"c", .3}, {"d", .4}}, c),
              allocation_objective(std::vector<CovariateGroup>{{"a", .1}, {"b", .2}, {"c", .3}, {"d", .4}},
                                   std::vector<double>{250, 250, 250, 250}));
}
