// mcsim.hpp
//
// Monte Carlo evaluation of empirical-success rules on stratified trials with
// arbitrary bounded outcome laws. Used to check analytic bounds and exact
// computations against simulated regret.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "epsopt/core.hpp"
#include "epsopt/rng.hpp"

namespace epsopt {

/// Law of a single subject's outcome within one stratum.
class OutcomeDistribution {
public:
    struct Bernoulli {
        double success_prob;  // P(outcome = u_high); otherwise u_low
        bool operator==(const Bernoulli&) const = default;
    };
    struct ScaledBeta {
        double a, b;  // u_low + (u_high - u_low) * Beta(a, b)
        bool operator==(const ScaledBeta&) const = default;
    };
    struct PointMass {
        double value;
        bool operator==(const PointMass&) const = default;
    };
    struct TwoPoint {
        double low_prob, low_value, high_value;
        bool operator==(const TwoPoint&) const = default;
    };

    OutcomeDistribution() : law_(PointMass{0.0}) {}

    static OutcomeDistribution bernoulli(double p) { return OutcomeDistribution(Bernoulli{p}); }
    static OutcomeDistribution scaled_beta(double a, double b) {
        return OutcomeDistribution(ScaledBeta{a, b});
    }
    static OutcomeDistribution point_mass(double v) { return OutcomeDistribution(PointMass{v}); }
    static OutcomeDistribution two_point(double low_prob, double low_value, double high_value) {
        return OutcomeDistribution(TwoPoint{low_prob, low_value, high_value});
    }

    /// Law with the given mean and the largest variance the range allows.
    static OutcomeDistribution bernoulli_with_mean(double mean, const OutcomeModel& outcome) {
        return bernoulli((mean - outcome.low) / outcome.range());
    }

    const auto& law() const { return law_; }

    void check(const OutcomeModel& outcome) const {
        auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
        std::visit(
            [&](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Bernoulli>) {
                    if (!prob_ok(d.success_prob))
                        throw std::invalid_argument("bernoulli probability must lie in [0, 1]");
                } else if constexpr (std::is_same_v<D, ScaledBeta>) {
                    if (!(d.a > 0.0 && d.b > 0.0))
                        throw std::invalid_argument("beta parameters must be positive");
                } else if constexpr (std::is_same_v<D, PointMass>) {
                    if (!outcome.contains(d.value))
                        throw std::invalid_argument("point mass outside the outcome range");
                } else {
                    if (!prob_ok(d.low_prob) || !outcome.contains(d.low_value) ||
                        !outcome.contains(d.high_value))
                        throw std::invalid_argument("two-point law outside the outcome range");
                }
            },
            law_);
    }

    double mean(const OutcomeModel& outcome) const {
        return std::visit(
            [&](const auto& d) -> double {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Bernoulli>)
                    return outcome.low + d.success_prob * outcome.range();
                else if constexpr (std::is_same_v<D, ScaledBeta>)
                    return outcome.low + outcome.range() * d.a / (d.a + d.b);
                else if constexpr (std::is_same_v<D, PointMass>)
                    return d.value;
                else
                    return d.low_prob * d.low_value + (1.0 - d.low_prob) * d.high_value;
            },
            law_);
    }

    /// Outcome of `subject` in the substream `key`.
    double draw(std::uint64_t key, std::uint64_t subject, const OutcomeModel& outcome) const {
        return std::visit(
            [&](const auto& d) -> double {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Bernoulli>) {
                    return subject_uniform(key, subject) < d.success_prob ? outcome.high
                                                                          : outcome.low;
                } else if constexpr (std::is_same_v<D, ScaledBeta>) {
                    SplitMix64 gen(mix64(key ^ mix64(subject + 1)));
                    std::gamma_distribution<double> ga(d.a), gb(d.b);
                    const double x = ga(gen), y = gb(gen);
                    return outcome.low + outcome.range() * (x / (x + y));
                } else if constexpr (std::is_same_v<D, PointMass>) {
                    return d.value;
                } else {
                    return subject_uniform(key, subject) < d.low_prob ? d.low_value : d.high_value;
                }
            },
            law_);
    }

    bool operator==(const OutcomeDistribution&) const = default;

private:
    using Law = std::variant<Bernoulli, ScaledBeta, PointMass, TwoPoint>;
    explicit OutcomeDistribution(Law law) : law_(law) {}
    Law law_;
};

struct SimulationPlan {
    TrialDesign design;
    OutcomeModel outcome;
    StratumTable<OutcomeDistribution> state;
    std::int64_t replications = 1;
    std::uint64_t seed = 0;

    void validate() const {
        outcome.validate();
        if (replications < 1) throw std::invalid_argument("replications must be positive");
        if (state.groups() != design.num_groups() || state.treatments() != design.num_treatments())
            throw std::invalid_argument("every stratum needs an outcome distribution");
        for (const auto& d : state.flat()) d.check(outcome);
    }

    /// Population means implied by the stratum laws.
    State means() const {
        StratumTable<double> m(state.groups(), state.treatments());
        for (std::size_t g = 0; g < state.groups(); ++g)
            for (std::size_t t = 0; t < state.treatments(); ++t)
                m(g, t) = state(g, t).mean(outcome);
        return {std::move(m)};
    }
};

namespace detail {

inline void sample_means_into(const SimulationPlan& plan, std::int64_t replication,
                              StratumTable<double>& out) {
    const auto& design = plan.design;
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        for (std::size_t t = 0; t < design.num_treatments(); ++t) {
            const std::uint64_t stratum = g * design.num_treatments() + t;
            const std::uint64_t key =
                stream_key(plan.seed, static_cast<std::uint64_t>(replication), stratum);
            const auto n = design.size(g, t);
            const auto& law = plan.state(g, t);
            if (const auto* point = std::get_if<OutcomeDistribution::PointMass>(&law.law())) {
                out(g, t) = point->value;
                continue;
            }
            double sum = 0.0;
            for (std::int64_t j = 0; j < n; ++j)
                sum += law.draw(key, static_cast<std::uint64_t>(j), plan.outcome);
            out(g, t) = sum / static_cast<double>(n);
        }
    }
}

}  // namespace detail

/// Sample means of every stratum in one replication.
inline StratumTable<double> run_trial(const SimulationPlan& plan, std::int64_t replication) {
    plan.validate();
    StratumTable<double> means(plan.design.num_groups(), plan.design.num_treatments());
    detail::sample_means_into(plan, replication, means);
    return means;
}

/// Empirical-success assignment: each group split uniformly over the
/// treatments with the highest sample mean.
inline AssignmentProfile es_assign(const StratumTable<double>& sample_means) {
    StratumTable<double> probs(sample_means.groups(), sample_means.treatments(), 0.0);
    for (std::size_t g = 0; g < sample_means.groups(); ++g) {
        auto r = sample_means.row(g);
        const double top = *std::max_element(r.begin(), r.end());
        const auto ties = std::count(r.begin(), r.end(), top);
        for (std::size_t t = 0; t < r.size(); ++t)
            if (r[t] == top) probs(g, t) = 1.0 / static_cast<double>(ties);
    }
    return {std::move(probs)};
}

struct RegretEstimate {
    double regret = 0.0;
    double standard_error = 0.0;
    double mean_welfare = 0.0;
    double best_welfare = 0.0;
    std::int64_t replications = 0;

    RegretReport report() const { return {regret, std::nullopt, Method::monte_carlo}; }
};

namespace detail {

// Mean and sum of squared deviations of a block of replications.
struct Moments {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.count == 0) return;
        const auto n = count + o.count;
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.count) / static_cast<double>(n);
        m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) /
                         static_cast<double>(n);
        count = n;
    }
};

inline constexpr std::int64_t kReplicationBlock = 4096;

// Welfare loss U* - U(delta, P, psi) of one replication under the ES rule.
inline double replication_loss(const SimulationPlan& plan, const State& truth,
                               const StratumTable<double>& sample_means) {
    double loss = 0.0;
    for (std::size_t g = 0; g < sample_means.groups(); ++g) {
        auto m = sample_means.row(g);
        auto mu = truth.means.row(g);
        const double top = *std::max_element(m.begin(), m.end());
        const double best = *std::max_element(mu.begin(), mu.end());
        double group_loss = 0.0;
        int ties = 0;
        for (std::size_t t = 0; t < m.size(); ++t) {
            if (m[t] != top) continue;
            group_loss += best - mu[t];
            ++ties;
        }
        loss += plan.design.groups()[g].probability * group_loss / ties;
    }
    return loss;
}

}  // namespace detail

/// Regret of the empirical-success rule estimated from independent
/// replications of the trial, with its standard error.
///
/// Replications are processed in fixed blocks whose moments are merged in
/// block order, so the result is bit-identical for any `threads`.
inline RegretEstimate estimate_regret(const SimulationPlan& plan, unsigned threads = 1) {
    plan.validate();
    const State truth = plan.means();
    const std::int64_t blocks =
        (plan.replications + detail::kReplicationBlock - 1) / detail::kReplicationBlock;
    std::vector<detail::Moments> block_moments(static_cast<std::size_t>(blocks));

    auto run_blocks = [&](unsigned worker, unsigned stride) {
        StratumTable<double> means(plan.design.num_groups(), plan.design.num_treatments());
        for (std::int64_t b = worker; b < blocks; b += stride) {
            detail::Moments m;
            const std::int64_t end =
                std::min(plan.replications, (b + 1) * detail::kReplicationBlock);
            for (std::int64_t r = b * detail::kReplicationBlock; r < end; ++r) {
                detail::sample_means_into(plan, r, means);
                m.add(detail::replication_loss(plan, truth, means));
            }
            block_moments[static_cast<std::size_t>(b)] = m;
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        run_blocks(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run_blocks, w, threads);
    }

    detail::Moments total;
    for (const auto& m : block_moments) total.merge(m);
    RegretEstimate est;
    est.replications = plan.replications;
    est.best_welfare = best_welfare(truth, plan.design.groups());
    est.regret = std::max(0.0, total.mean);
    est.mean_welfare = est.best_welfare - total.mean;
    est.standard_error =
        total.count > 1
            ? std::sqrt(total.m2 / static_cast<double>(total.count - 1) / static_cast<double>(total.count))
            : 0.0;
    return est;
}

}  // namespace epsopt
