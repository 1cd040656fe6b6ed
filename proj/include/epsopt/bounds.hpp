// bounds.hpp
//
// Large-deviation upper bounds on the maximum regret of empirical-success
// rules, their covariate and partial-validity extensions, and the inversion of
// those bounds into sufficient sample sizes.
//
// Two bound families are provided. The "prop1" family sums pairwise Hoeffding
// terms (n_t^-1 + n_t*^-1)^(1/2) against the smallest arm t*. The "prop2"
// family bounds the expected maximum of the pairwise estimation errors through
// a moment-generating-function argument, which leaves a one-dimensional
// minimization over a free scale d > 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "epsopt/core.hpp"
#include "epsopt/golden.hpp"

namespace epsopt {

enum class BoundChoice { prop1, prop2, prop2_balanced, best_of_both };

inline std::string_view to_string(BoundChoice c) {
    switch (c) {
        case BoundChoice::prop1: return "prop1";
        case BoundChoice::prop2: return "prop2";
        case BoundChoice::prop2_balanced: return "prop2_balanced";
        case BoundChoice::best_of_both: return "best";
    }
    return "unknown";
}

/// Fraction kappa of the target population that lies outside the sampling frame.
struct PartialValidity {
    double kappa = 0.0;

    void validate() const {
        if (!(kappa >= 0.0 && kappa < 1.0))
            throw std::invalid_argument("kappa must lie in [0, 1)");
    }
    bool operator==(const PartialValidity&) const = default;
};

/// (1/2) e^(-1/2)
inline const double kHoeffdingPairConstant = 0.5 * std::exp(-0.5);

namespace detail {

inline void require_single_group(const TrialDesign& design, std::string_view what) {
    if (!design.single_group())
        throw std::invalid_argument(std::string(what) +
                                    " needs a single covariate group; use the covariate bound");
}

/// Sum over t != t* of (n_t^-1 + n_t*^-1)^(1/2) within one group.
inline double pairwise_root_sum(const TrialDesign& design, std::size_t group) {
    const std::size_t star = design.smallest_arm(group);
    const double inv_star = 1.0 / static_cast<double>(design.size(group, star));
    double sum = 0.0;
    for (std::size_t t = 0; t < design.num_treatments(); ++t) {
        if (t == star) continue;
        sum += std::sqrt(1.0 / static_cast<double>(design.size(group, t)) + inv_star);
    }
    return sum;
}

/// Coefficients p_t^-1 + p_t*^-1 (t != t*) of the exponential sum in one group.
inline std::vector<double> share_coefficients(const TrialDesign& design, std::size_t group) {
    const std::size_t star = design.smallest_arm(group);
    const double inv_star = 1.0 / design.share(group, star);
    std::vector<double> c;
    c.reserve(design.num_treatments() - 1);
    for (std::size_t t = 0; t < design.num_treatments(); ++t)
        if (t != star) c.push_back(1.0 / design.share(group, t) + inv_star);
    return c;
}

}  // namespace detail

/// Objective ln{1 + sum_t exp[d^2 c_t / 8]} / d, evaluated in log-sum-exp form.
inline double log_exp_sum_objective(std::span<const double> coefficients, double d) {
    double top = 0.0;
    for (double c : coefficients) top = std::max(top, d * d * c / 8.0);
    double acc = std::exp(-top);
    for (double c : coefficients) acc += std::exp(d * d * c / 8.0 - top);
    return (top + std::log(acc)) / d;
}

/// Minimum over d > 0 of log_exp_sum_objective.
///
/// Geometric scan on [1e-6, 50] followed by golden-section refinement to
/// relative width 1e-10. The objective tends to infinity at both ends.
inline ScalarMinimum minimize_log_exp_sum(std::span<const double> coefficients) {
    if (coefficients.empty()) throw std::invalid_argument("need at least one coefficient");
    auto g = [&](double d) { return log_exp_sum_objective(coefficients, d); };
    return bracket_and_minimize(g, 1e-6, 50.0, 600, 1e-10);
}

inline RegretReport prop1_bound(const TrialDesign& design, const OutcomeModel& outcome) {
    detail::require_single_group(design, "prop1_bound");
    outcome.validate();
    return {kHoeffdingPairConstant * outcome.range() * detail::pairwise_root_sum(design, 0),
            std::nullopt, Method::prop1};
}

inline RegretReport prop2_bound(const TrialDesign& design, const OutcomeModel& outcome) {
    detail::require_single_group(design, "prop2_bound");
    outcome.validate();
    const auto coeffs = detail::share_coefficients(design, 0);
    const double inner = minimize_log_exp_sum(coeffs).fx;
    return {outcome.range() * inner / std::sqrt(static_cast<double>(design.total())), std::nullopt,
            Method::prop2};
}

/// Closed-form relaxation n^(-1/2) (u_h - u_l) sqrt(ln |T|) of the prop2 bound.
inline RegretReport prop2_balanced_bound(std::int64_t n, std::size_t num_treatments,
                                         const OutcomeModel& outcome) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (num_treatments < 2) throw std::invalid_argument("need at least two treatments");
    outcome.validate();
    return {outcome.range() * std::sqrt(std::log(static_cast<double>(num_treatments))) /
                std::sqrt(static_cast<double>(n)),
            std::nullopt, Method::prop2_balanced};
}

/// Coefficient C such that the chosen bound equals C (u_h - u_l) n^(-1/2) on a
/// balanced design with n subjects per arm.
inline double balanced_constant(BoundChoice choice, std::size_t num_treatments) {
    if (num_treatments < 2) throw std::invalid_argument("need at least two treatments");
    const double k = static_cast<double>(num_treatments);
    switch (choice) {
        case BoundChoice::prop1: return std::sqrt(1.0 / (2.0 * std::exp(1.0))) * (k - 1.0);
        case BoundChoice::prop2: {
            const std::vector<double> coeffs(num_treatments - 1, 2.0 * k);
            return minimize_log_exp_sum(coeffs).fx / std::sqrt(k);
        }
        case BoundChoice::prop2_balanced: return std::sqrt(std::log(k));
        case BoundChoice::best_of_both:
            return std::min(balanced_constant(BoundChoice::prop1, num_treatments),
                            balanced_constant(BoundChoice::prop2, num_treatments));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Bound of the chosen kind for a single-group design. best_of_both reports
/// whichever of prop1/prop2 is smaller.
inline RegretReport bound_for(BoundChoice choice, const TrialDesign& design,
                              const OutcomeModel& outcome) {
    switch (choice) {
        case BoundChoice::prop1: return prop1_bound(design, outcome);
        case BoundChoice::prop2: return prop2_bound(design, outcome);
        case BoundChoice::prop2_balanced:
            detail::require_single_group(design, "prop2_balanced_bound");
            if (!design.balanced())
                throw std::invalid_argument("prop2_balanced bound needs a balanced design");
            return prop2_balanced_bound(design.size(0, 0), design.num_treatments(), outcome);
        case BoundChoice::best_of_both: {
            auto a = prop1_bound(design, outcome);
            auto b = prop2_bound(design, outcome);
            return a.value <= b.value ? a : b;
        }
    }
    throw std::invalid_argument("unknown bound choice");
}

/// Smallest balanced per-arm size n whose bound is at most epsilon.
inline std::int64_t sufficient_n_balanced(double epsilon, std::size_t num_treatments,
                                          const OutcomeModel& outcome, BoundChoice choice) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    outcome.validate();
    if (choice == BoundChoice::best_of_both)
        return std::min(sufficient_n_balanced(epsilon, num_treatments, outcome, BoundChoice::prop1),
                        sufficient_n_balanced(epsilon, num_treatments, outcome, BoundChoice::prop2));

    auto bound_at = [&](std::int64_t n) {
        return bound_for(choice, TrialDesign::balanced(num_treatments, n), outcome).value;
    };
    const double c = balanced_constant(choice, num_treatments);
    const double ratio = c * outcome.range() / epsilon;
    const double threshold = ratio * ratio;
    if (threshold > 9.0e15) throw std::overflow_error("required sample size is not representable");
    std::int64_t n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(threshold)));
    constexpr double slack = 1e-12;
    while (n > 1 && bound_at(n - 1) <= epsilon + slack) --n;
    while (bound_at(n) > epsilon + slack) ++n;
    return n;
}

/// Prop1-type bound aggregated across covariate groups.
inline RegretReport covariate_prop1_bound(const TrialDesign& design, const OutcomeModel& outcome) {
    outcome.validate();
    double sum = 0.0;
    for (std::size_t g = 0; g < design.num_groups(); ++g)
        sum += design.groups()[g].probability * detail::pairwise_root_sum(design, g);
    return {kHoeffdingPairConstant * outcome.range() * sum, std::nullopt, Method::covariate_prop1};
}

/// Prop2-type bound aggregated across covariate groups, each group using its
/// own total N_g and within-group shares.
inline RegretReport covariate_prop2_bound(const TrialDesign& design, const OutcomeModel& outcome) {
    outcome.validate();
    double sum = 0.0;
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        const auto coeffs = detail::share_coefficients(design, g);
        sum += design.groups()[g].probability * minimize_log_exp_sum(coeffs).fx /
               std::sqrt(static_cast<double>(design.group_total(g)));
    }
    return {outcome.range() * sum, std::nullopt, Method::covariate_prop2};
}

/// (1 - kappa) * base + kappa * (u_h - u_l) for a trial that samples only a
/// fraction 1 - kappa of the target population.
inline RegretReport partial_validity_bound(const TrialDesign& design, const OutcomeModel& outcome,
                                           const PartialValidity& pv, BoundChoice choice) {
    pv.validate();
    const RegretReport base = bound_for(choice, design, outcome);
    const Method m = base.method == Method::prop1 ? Method::partial_validity_prop1
                                                  : Method::partial_validity_prop2;
    return {(1.0 - pv.kappa) * base.value + pv.kappa * outcome.range(), std::nullopt, m};
}

/// The epsilon to feed the full-validity sizing rules under partial validity,
/// or nullopt when kappa (u_h - u_l) >= epsilon makes the target unreachable.
inline std::optional<double> adjusted_epsilon(double epsilon, const PartialValidity& pv,
                                              const OutcomeModel& outcome) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    pv.validate();
    const double unsampled = pv.kappa * outcome.range();
    if (unsampled >= epsilon) return std::nullopt;
    return (epsilon - unsampled) / (1.0 - pv.kappa);
}

}  // namespace epsopt
