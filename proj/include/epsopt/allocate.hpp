// allocate.hpp
//
// Splitting a total trial budget across covariate groups so that the
// aggregated treatment-balanced bounds, which are proportional to
// sum_g P(g) n_g^(-1/2), are as small as possible.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "epsopt/core.hpp"

namespace epsopt {

struct AllocationProblem {
    std::vector<CovariateGroup> groups;
    std::int64_t total_budget = 0;  // across all treatments and groups
    std::size_t num_treatments = 2;

    /// Budget available to each treatment arm; N mod |T| units are dropped.
    std::int64_t per_treatment_budget() const {
        return total_budget / static_cast<std::int64_t>(num_treatments);
    }
    std::int64_t dropped_units() const {
        return total_budget % static_cast<std::int64_t>(num_treatments);
    }

    void validate() const {
        if (groups.empty()) throw std::invalid_argument("allocation needs at least one group");
        if (num_treatments < 2) throw std::invalid_argument("need at least two treatments");
        double sum = 0.0;
        for (const auto& g : groups) {
            if (!(g.probability > 0.0 && g.probability <= 1.0))
                throw std::invalid_argument("group probability must lie in (0, 1]");
            sum += g.probability;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance)
            throw std::invalid_argument("group probabilities must sum to 1");
        if (total_budget < static_cast<std::int64_t>(num_treatments * groups.size()))
            throw std::invalid_argument("budget cannot give every stratum one subject");
    }
};

inline double allocation_objective(std::span<const CovariateGroup> groups,
                                   std::span<const double> sizes) {
    if (groups.size() != sizes.size()) throw std::invalid_argument("one size per group required");
    double obj = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!(sizes[g] >= 1.0)) throw std::invalid_argument("group sizes must be at least 1");
        obj += groups[g].probability / std::sqrt(sizes[g]);
    }
    return obj;
}

inline double allocation_objective(std::span<const CovariateGroup> groups,
                                   std::span<const std::int64_t> sizes) {
    std::vector<double> real(sizes.begin(), sizes.end());
    return allocation_objective(groups, real);
}

/// Continuous relaxation: n_g proportional to P(g)^(2/3), summing to N/|T|.
inline std::vector<double> continuous_allocation(const AllocationProblem& problem) {
    problem.validate();
    std::vector<double> weights;
    weights.reserve(problem.groups.size());
    for (const auto& g : problem.groups) weights.push_back(std::cbrt(g.probability * g.probability));
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    const double budget =
        static_cast<double>(problem.total_budget) / static_cast<double>(problem.num_treatments);
    for (auto& w : weights) w *= budget / total;
    return weights;
}

namespace detail {

// Objective decrease from giving group g its (n+1)-th subject.
inline double marginal_gain(double probability, std::int64_t n) {
    return probability * (1.0 / std::sqrt(static_cast<double>(n)) -
                          1.0 / std::sqrt(static_cast<double>(n + 1)));
}

}  // namespace detail

/// Integer per-arm group sizes summing to floor(N/|T|), each at least 1.
///
/// Floors the continuous solution, hands out the remaining units one at a time
/// to the largest marginal gain, then applies single-unit moves between groups
/// while any strictly improves the objective.
inline std::vector<std::int64_t> integer_allocation(const AllocationProblem& problem) {
    const auto continuous = continuous_allocation(problem);
    const std::int64_t budget = problem.per_treatment_budget();
    const auto& groups = problem.groups;
    const std::size_t k = groups.size();

    std::vector<std::int64_t> n(k);
    for (std::size_t g = 0; g < k; ++g)
        n[g] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(continuous[g])));
    std::int64_t used = std::accumulate(n.begin(), n.end(), std::int64_t{0});

    // Forcing the 1-per-group floor can overshoot; take back the cheapest units.
    while (used > budget) {
        std::size_t pick = k;
        double cheapest = 0.0;
        for (std::size_t g = 0; g < k; ++g) {
            if (n[g] <= 1) continue;
            const double loss = detail::marginal_gain(groups[g].probability, n[g] - 1);
            if (pick == k || loss < cheapest) {
                pick = g;
                cheapest = loss;
            }
        }
        --n[pick];
        --used;
    }
    while (used < budget) {
        std::size_t pick = 0;
        for (std::size_t g = 1; g < k; ++g)
            if (detail::marginal_gain(groups[g].probability, n[g]) >
                detail::marginal_gain(groups[pick].probability, n[pick]))
                pick = g;
        ++n[pick];
        ++used;
    }

    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t from = 0; from < k; ++from) {
            for (std::size_t to = 0; to < k; ++to) {
                if (from == to || n[from] <= 1) continue;
                const double loss = detail::marginal_gain(groups[from].probability, n[from] - 1);
                const double gain = detail::marginal_gain(groups[to].probability, n[to]);
                if (gain > loss) {
                    --n[from];
                    ++n[to];
                    improved = true;
                }
            }
        }
    }
    return n;
}

}  // namespace epsopt
