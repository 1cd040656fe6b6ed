#include <gtest/gtest.h>

#include "epsopt/exact.hpp"
#include "epsopt/normal.hpp"
#include "oracles.hpp"

using namespace epsopt;

TEST(Normal, QuantileMatchesBisection) {
    EXPECT_NEAR(inverse_normal_cdf(0.95), 1.644854, 5e-7);
    EXPECT_NEAR(upper_critical_value(0.05), 1.6448536269514722, 1e-14);
    for (double p : {1e-300, 1e-12, 1e-6, 0.01, 0.025, 0.2, 0.5, 0.7, 0.975, 1 - 1e-9}) {
        const double want = oracle::normal_quantile_by_bisection(p);
        EXPECT_NEAR(inverse_normal_cdf(p), want, 1e-12 * std::max(1.0, std::abs(want))) << p;
    }
    EXPECT_THROW(inverse_normal_cdf(0.0), std::domain_error);
    EXPECT_THROW(inverse_normal_cdf(1.0), std::domain_error);
}

TEST(Binomial, WindowAgreesWithDirectPmf) {
    LogFactorialTable lf(400);
    BinomialWindow w;
    for (double p : {0.0, 0.013, 0.5, 0.77, 1.0}) {
        fill_binomial_window(lf, 400, p, w);
        double total = 0;
        for (std::int64_t k = 0; k <= 400; ++k) {
            total += w.at(k);
            EXPECT_NEAR(w.at(k), binomial_pmf(400, k, p), 1e-20);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Exact, EsRegretExamples) {
    const auto es = BinaryTwoArmRule::empirical_success();
    EXPECT_NEAR(exact_regret(es, 1, 0.2, 0.6), 0.12, 1e-15);
    EXPECT_NEAR(expected_assignment(es, 1, 0.2, 0.6), 0.70, 1e-15);
    EXPECT_EQ(exact_regret(es, 5, 0.4, 0.4), 0.0);
    EXPECT_THROW(exact_regret(es, 3, -0.1, 0.5), std::domain_error);
}

TEST(Exact, AgreesWithSequenceEnumeration) {
    const auto es = BinaryTwoArmRule::empirical_success();
    const auto z05 = BinaryTwoArmRule::ztest(0.05);
    const auto z05u = BinaryTwoArmRule::ztest(0.05, ZTestVariant::unpooled);
    const double za = oracle::normal_quantile_by_bisection(0.95);
    for (int n = 1; n <= 4; ++n) {
        for (int i = 0; i <= 10; ++i) {
            for (int j = 0; j <= 10; ++j) {
                const double a = i / 10.0, b = j / 10.0;
                EXPECT_NEAR(exact_regret(es, n, a, b), oracle::sequence_regret(oracle::es_decision, n, a, b), 1e-12);
                EXPECT_NEAR(exact_regret(z05, n, a, b),
                            oracle::sequence_regret(oracle::ztest_decision(za, true), n, a, b), 1e-12);
                EXPECT_NEAR(exact_regret(z05u, n, a, b),
                            oracle::sequence_regret(oracle::ztest_decision(za, false), n, a, b), 1e-12);
            }
        }
    }
}

TEST(Exact, LargerNAgreesWithDirectSum) {
    const auto z01 = BinaryTwoArmRule::ztest(0.01);
    const double za = oracle::normal_quantile_by_bisection(0.99);
    for (int n : {17, 60, 145}) {
        for (auto [a, b] : {std::pair{0.3, 0.35}, {0.5, 0.45}, {0.01, 0.9}, {0.62, 0.7}}) {
            EXPECT_NEAR(exact_regret(BinaryTwoArmRule::empirical_success(), n, a, b),
                        oracle::summed_regret(oracle::es_decision, n, a, b), 1e-12);
            EXPECT_NEAR(exact_regret(z01, n, a, b),
                        oracle::summed_regret(oracle::ztest_decision(za, true), n, a, b), 1e-12);
        }
    }
}

TEST(Exact, Symmetry) {
    const auto es = BinaryTwoArmRule::empirical_success();
    for (int n : {1, 4, 9})
        for (double a : {0.1, 0.33, 0.5})
            for (double b : {0.2, 0.71})
                EXPECT_NEAR(exact_regret(es, n, a, b), exact_regret(es, n, b, a), 1e-13);
}

TEST(Exact, DecisionTables) {
    const auto z = decision_boundary(BinaryTwoArmRule::ztest(0.05), 1);
    for (int xa = 0; xa <= 1; ++xa)
        for (int xb = 0; xb <= 1; ++xb) EXPECT_EQ(z.at(xa, xb), 0.0);
    const auto es = decision_boundary(BinaryTwoArmRule::empirical_success(), 3);
    EXPECT_EQ(es.at(1, 1), 0.5);
    EXPECT_EQ(es.at(1, 2), 1.0);
    EXPECT_EQ(es.at(2, 1), 0.0);
    // Rejection regions are monotone: more successes on b never lose rejection.
    for (int n : {2, 10, 57}) {
        const auto t = decision_boundary(BinaryTwoArmRule::ztest(0.05, ZTestVariant::unpooled), n);
        for (int xa = 0; xa <= n; ++xa)
            for (int xb = 1; xb <= n; ++xb) EXPECT_GE(t.at(xa, xb), t.at(xa, xb - 1));
    }
}

TEST(Exact, MaxRegretSmallN) {
    const auto es = BinaryTwoArmRule::empirical_success();
    const auto r = max_regret(es, 1);
    EXPECT_NEAR(r.value, 0.125, 1e-9);
    ASSERT_TRUE(r.argmax_state.has_value());
    EXPECT_EQ(r.method, Method::exact_binary);
    EXPECT_NEAR(exact_regret(es, 1, r.argmax_state->mean(0, 0), r.argmax_state->mean(0, 1)), r.value, 1e-15);
    const double za = oracle::normal_quantile_by_bisection(0.95);
    for (int n = 1; n <= 5; ++n) {
        const double want = oracle::grid_max_regret(oracle::es_decision, n, 1001);
        const double got = max_regret(es, n).value;
        EXPECT_GE(got, want - 1e-12);
        EXPECT_LE(got, want + 1e-4);
        const double wz = oracle::grid_max_regret(oracle::ztest_decision(za, true), n + 5, 401);
        const double gz = max_regret(BinaryTwoArmRule::ztest(0.05), n + 5).value;
        EXPECT_GE(gz, wz - 1e-12);
        EXPECT_LE(gz, wz + 1e-3);
    }
}

TEST(Exact, MinSampleSize) {
    const auto es = BinaryTwoArmRule::empirical_success();
    const auto r = min_sample_size(es, 0.05, 1000);
    ASSERT_TRUE(r.found());
    EXPECT_EQ(*r.n, 6);
    EXPECT_TRUE(r.nonmonotone.empty());
    EXPECT_GT(r.evaluated.at(5), 0.05);
    const auto miss = min_sample_size(es, 0.001, 30);
    EXPECT_FALSE(miss.found());
    EXPECT_THROW(min_sample_size(es, 0.0, 10), std::invalid_argument);
}

TEST(Power, SampleSizes) {
    const std::int64_t b20[] = {30912, 3434, 1236, 309, 137};
    const std::int64_t b10[] = {42818, 4756, 1711, 427, 189};
    const double delta[] = {0.01, 0.03, 0.05, 0.10, 0.15};
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(power_sample_size({0.05, 0.20, delta[i]}), b20[i]);
        EXPECT_EQ(power_sample_size({0.05, 0.10, delta[i]}), b10[i]);
        const double mu_a = (1 - delta[i]) / 2;
        EXPECT_EQ(power_sample_size_general(mu_a, mu_a + delta[i], 0.05, 0.2), b20[i]);
    }
    EXPECT_THROW(power_sample_size({0.05, 0.2, 0.0}), std::invalid_argument);
}

TEST(Exact, WindowedRegretMatchesFullTable) {
    for (auto rule : {BinaryTwoArmRule::empirical_success(), BinaryTwoArmRule::ztest(0.05),
                      BinaryTwoArmRule::ztest(0.01, ZTestVariant::unpooled)}) {
        for (std::int64_t n : {1, 7, 90, 1500}) {
            const LogFactorialTable lf(n);
            const ExactEvaluator ev(rule, n);
            for (auto [a, b] : {std::pair{0.2, 0.6}, {0.5, 0.47}, {0.0, 0.03}, {0.99, 1.0}, {0.41, 0.44}})
                EXPECT_NEAR(detail::windowed_regret(rule, lf, n, a, b), ev.regret(a, b), 1e-12)
                    << rule.label() << " n=" << n << " " << a << " " << b;
        }
    }
}
