// core.hpp
//
// Domain types shared by every part of the toolkit: outcome ranges, trial
// designs stratified by treatment and covariate group, states of nature
// (mean outcomes per stratum), assignment profiles, and the welfare/regret
// algebra on top of them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epsopt {

inline constexpr double kProbabilityTolerance = 1e-12;

/// Range of a bounded outcome. Binary outcomes are the special case [0, 1].
struct OutcomeModel {
    double low = 0.0;
    double high = 1.0;
    bool binary = false;

    static OutcomeModel binary_outcome() { return {0.0, 1.0, true}; }
    static OutcomeModel bounded(double low, double high) {
        OutcomeModel m{low, high, false};
        m.validate();
        return m;
    }

    double range() const { return high - low; }
    bool contains(double v) const { return v >= low && v <= high; }

    void validate() const {
        if (!std::isfinite(low) || !std::isfinite(high) || !(low < high))
            throw std::invalid_argument("outcome range requires finite low < high");
        if (binary && (low != 0.0 || high != 1.0))
            throw std::invalid_argument("binary outcomes must have range [0, 1]");
    }

    bool operator==(const OutcomeModel&) const = default;
};

struct CovariateGroup {
    std::string label;
    double probability = 1.0;

    bool operator==(const CovariateGroup&) const = default;
};

/// Rectangular (group x treatment) table, stored group-major.
template <class T>
class StratumTable {
public:
    StratumTable() = default;
    StratumTable(std::size_t groups, std::size_t treatments, T fill = T{})
        : groups_(groups), treatments_(treatments), data_(groups * treatments, fill) {}

    explicit StratumTable(const std::vector<std::vector<T>>& rows) {
        groups_ = rows.size();
        treatments_ = rows.empty() ? 0 : rows.front().size();
        data_.reserve(groups_ * treatments_);
        for (const auto& r : rows) {
            if (r.size() != treatments_)
                throw std::invalid_argument("stratum table rows must have equal length");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    std::size_t groups() const { return groups_; }
    std::size_t treatments() const { return treatments_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t group, std::size_t treatment) {
        return data_.at(group * treatments_ + treatment);
    }
    const T& operator()(std::size_t group, std::size_t treatment) const {
        return data_.at(group * treatments_ + treatment);
    }

    std::span<const T> row(std::size_t group) const {
        if (group >= groups_) throw std::out_of_range("stratum table group index");
        return {data_.data() + group * treatments_, treatments_};
    }
    std::span<T> row(std::size_t group) {
        if (group >= groups_) throw std::out_of_range("stratum table group index");
        return {data_.data() + group * treatments_, treatments_};
    }

    const std::vector<T>& flat() const { return data_; }

    bool operator==(const StratumTable&) const = default;

private:
    std::size_t groups_ = 0;
    std::size_t treatments_ = 0;
    std::vector<T> data_;
};

/// Default treatment labels: a, b, c, ... and t27, t28, ... past the alphabet.
inline std::vector<std::string> default_treatment_labels(std::size_t count) {
    std::vector<std::string> labels;
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        labels.push_back(i < 26 ? std::string(1, static_cast<char>('a' + i))
                                : "t" + std::to_string(i + 1));
    return labels;
}

/// Stratum sample sizes n(t, group) of a stratified randomized trial.
///
/// The covariate-free case is a design with a single group of probability 1.
class TrialDesign {
public:
    TrialDesign(std::vector<std::string> treatments, std::vector<CovariateGroup> groups,
                StratumTable<std::int64_t> sizes)
        : treatments_(std::move(treatments)), groups_(std::move(groups)), sizes_(std::move(sizes)) {
        validate();
    }

    /// One group, n subjects in each of `num_treatments` arms.
    static TrialDesign balanced(std::size_t num_treatments, std::int64_t n) {
        return one_group(std::vector<std::int64_t>(num_treatments, n));
    }

    static TrialDesign one_group(const std::vector<std::int64_t>& arm_sizes) {
        return TrialDesign(default_treatment_labels(arm_sizes.size()), {{"all", 1.0}},
                           StratumTable<std::int64_t>({arm_sizes}));
    }

    /// Treatment-balanced within each group: every arm of group g gets per_arm[g].
    static TrialDesign balanced_groups(std::size_t num_treatments,
                                       std::vector<CovariateGroup> groups,
                                       const std::vector<std::int64_t>& per_arm) {
        if (per_arm.size() != groups.size())
            throw std::invalid_argument("one per-arm size is required for every group");
        StratumTable<std::int64_t> sizes(groups.size(), num_treatments);
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t t = 0; t < num_treatments; ++t) sizes(g, t) = per_arm[g];
        return TrialDesign(default_treatment_labels(num_treatments), std::move(groups),
                           std::move(sizes));
    }

    std::size_t num_treatments() const { return treatments_.size(); }
    std::size_t num_groups() const { return groups_.size(); }
    bool single_group() const { return groups_.size() == 1; }

    const std::vector<std::string>& treatments() const { return treatments_; }
    const std::vector<CovariateGroup>& groups() const { return groups_; }
    const StratumTable<std::int64_t>& sizes() const { return sizes_; }

    std::int64_t size(std::size_t group, std::size_t treatment) const {
        return sizes_(group, treatment);
    }

    std::int64_t group_total(std::size_t group) const {
        std::int64_t total = 0;
        for (auto n : sizes_.row(group)) total += n;
        return total;
    }

    std::int64_t total() const {
        std::int64_t total = 0;
        for (auto n : sizes_.flat()) total += n;
        return total;
    }

    double share(std::size_t group, std::size_t treatment) const {
        return static_cast<double>(size(group, treatment)) / static_cast<double>(group_total(group));
    }

    /// Arm with the smallest sample size in a group; ties go to the earliest treatment.
    std::size_t smallest_arm(std::size_t group) const {
        auto r = sizes_.row(group);
        return static_cast<std::size_t>(std::min_element(r.begin(), r.end()) - r.begin());
    }

    bool balanced_in_group(std::size_t group) const {
        auto r = sizes_.row(group);
        return std::all_of(r.begin(), r.end(), [&](auto n) { return n == r.front(); });
    }

    bool balanced() const {
        for (std::size_t g = 0; g < num_groups(); ++g)
            if (!balanced_in_group(g)) return false;
        return true;
    }

    bool operator==(const TrialDesign&) const = default;

private:
    void validate() const {
        if (treatments_.size() < 2)
            throw std::invalid_argument("a design needs at least two treatments");
        if (groups_.empty()) throw std::invalid_argument("a design needs at least one group");
        if (sizes_.groups() != groups_.size() || sizes_.treatments() != treatments_.size())
            throw std::invalid_argument("sample-size table does not match treatments x groups");
        double total_prob = 0.0;
        for (const auto& g : groups_) {
            if (!(g.probability > 0.0 && g.probability <= 1.0))
                throw std::invalid_argument("group probability must lie in (0, 1]: " + g.label);
            total_prob += g.probability;
        }
        if (std::abs(total_prob - 1.0) > kProbabilityTolerance)
            throw std::invalid_argument("group probabilities must sum to 1");
        for (auto n : sizes_.flat())
            if (n < 1) throw std::invalid_argument("every stratum needs at least one subject");
    }

    std::vector<std::string> treatments_;
    std::vector<CovariateGroup> groups_;
    StratumTable<std::int64_t> sizes_;
};

/// A state of nature: the mean outcome of every (group, treatment) stratum.
struct State {
    StratumTable<double> means;

    static State two_arm(double mu_a, double mu_b) {
        return {StratumTable<double>({{mu_a, mu_b}})};
    }
    static State one_group(const std::vector<double>& mu) { return {StratumTable<double>({mu})}; }

    double mean(std::size_t group, std::size_t treatment) const { return means(group, treatment); }

    void check(const TrialDesign& design, const OutcomeModel& outcome) const {
        if (means.groups() != design.num_groups() || means.treatments() != design.num_treatments())
            throw std::invalid_argument("state does not cover every stratum of the design");
        for (double m : means.flat())
            if (!outcome.contains(m))
                throw std::invalid_argument("state mean lies outside the outcome range");
    }

    bool operator==(const State&) const = default;
};

/// Expected share of each group assigned to each treatment, averaged over samples.
struct AssignmentProfile {
    StratumTable<double> probs;

    static AssignmentProfile one_group(const std::vector<double>& p) {
        return {StratumTable<double>({p})};
    }

    void check(const TrialDesign& design) const {
        if (probs.groups() != design.num_groups() || probs.treatments() != design.num_treatments())
            throw std::invalid_argument("assignment does not cover every stratum of the design");
        for (std::size_t g = 0; g < probs.groups(); ++g) {
            double sum = 0.0;
            for (double p : probs.row(g)) {
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("assignment probabilities must lie in [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kProbabilityTolerance)
                throw std::invalid_argument("assignment probabilities must sum to 1 within a group");
        }
    }
};

enum class Method {
    prop1,
    prop2,
    prop2_balanced,
    exact_binary,
    monte_carlo,
    covariate_prop1,
    covariate_prop2,
    partial_validity_prop1,
    partial_validity_prop2,
};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::prop1: return "prop1";
        case Method::prop2: return "prop2";
        case Method::prop2_balanced: return "prop2_balanced";
        case Method::exact_binary: return "exact_binary";
        case Method::monte_carlo: return "monte_carlo";
        case Method::covariate_prop1: return "covariate_prop1";
        case Method::covariate_prop2: return "covariate_prop2";
        case Method::partial_validity_prop1: return "partial_validity_prop1";
        case Method::partial_validity_prop2: return "partial_validity_prop2";
    }
    return "unknown";
}

/// Maximum regret of a rule (or an upper bound on it) and how it was obtained.
///
/// Analytic bounds are reported as computed, so they may exceed the outcome
/// range for very small designs; exact and simulated values never do.
struct RegretReport {
    double value = 0.0;
    std::optional<State> argmax_state;
    Method method = Method::prop1;
};

// Welfare algebra ----------------------------------------------------------

inline double expected_welfare(const TrialDesign& design, const State& state,
                               const AssignmentProfile& assignment, const OutcomeModel& outcome) {
    state.check(design, outcome);
    assignment.check(design);
    double welfare = 0.0;
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        double within = 0.0;
        for (std::size_t t = 0; t < design.num_treatments(); ++t)
            within += assignment.probs(g, t) * state.mean(g, t);
        welfare += design.groups()[g].probability * within;
    }
    return welfare;
}

/// Welfare of assigning every group to its best treatment.
inline double best_welfare(const State& state, std::span<const CovariateGroup> groups) {
    if (state.means.groups() != groups.size())
        throw std::invalid_argument("state does not match the covariate groups");
    double welfare = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto r = state.means.row(g);
        welfare += groups[g].probability * *std::max_element(r.begin(), r.end());
    }
    return welfare;
}

inline double regret(const TrialDesign& design, const State& state,
                     const AssignmentProfile& assignment, const OutcomeModel& outcome) {
    const double w = expected_welfare(design, state, assignment, outcome);
    // Floating noise can push an optimal assignment a hair below zero.
    return std::max(0.0, best_welfare(state, design.groups()) - w);
}

/// Regret of a two-treatment test rule that picks the inferior arm with
/// probability `error_prob`.
inline double regret_from_error_prob(const State& state, double error_prob) {
    if (state.means.groups() != 1 || state.means.treatments() != 2)
        throw std::invalid_argument("error-probability regret needs one group and two treatments");
    if (!(error_prob >= 0.0 && error_prob <= 1.0))
        throw std::domain_error("error probability must lie in [0, 1]");
    return std::abs(state.mean(0, 0) - state.mean(0, 1)) * error_prob;
}

}  // namespace epsopt
