// exact.hpp
//
// Exact finite-sample analysis of two-arm trials with binary outcomes and a
// balanced design of n subjects per arm. With success counts x_a, x_b a rule
// is summarised by its decision table D(x_a, x_b), the share of the
// population it sends to treatment b. Expected assignment, regret, maximum
// regret over the unit square of states, and the smallest n achieving a
// target maximum regret all follow from D and the two binomial laws.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <locale>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epsopt/binomial.hpp"
#include "epsopt/core.hpp"
#include "epsopt/golden.hpp"
#include "epsopt/normal.hpp"

namespace epsopt {

/// Variance estimate used by the one-sided two-sample z statistic.
enum class ZTestVariant { pooled, unpooled };

inline std::string_view to_string(ZTestVariant v) {
    return v == ZTestVariant::pooled ? "pooled" : "unpooled";
}

struct BinaryTwoArmRule {
    enum class Kind { empirical_success, ztest_one_sided };

    Kind kind = Kind::empirical_success;
    double alpha = 0.0;  // z-test only
    ZTestVariant variant = ZTestVariant::pooled;

    static BinaryTwoArmRule empirical_success() { return {}; }
    static BinaryTwoArmRule ztest(double alpha, ZTestVariant variant = ZTestVariant::pooled) {
        BinaryTwoArmRule r{Kind::ztest_one_sided, alpha, variant};
        r.validate();
        return r;
    }

    bool is_test() const { return kind == Kind::ztest_one_sided; }

    void validate() const {
        if (is_test() && !(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("z-test alpha must lie in (0, 1)");
    }

    std::string label() const {
        if (!is_test()) return "es";
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << "ztest(alpha=" << alpha << ", " << to_string(variant) << ")";
        return os.str();
    }
};

/// One-sided two-sample z statistic for H0: mu_b <= mu_a.
///
/// When the variance estimate is zero: the pooled estimate vanishes only when
/// both arms are all-failure or all-success, so z = 0; the unpooled estimate
/// can vanish with different sample means, in which case z = +/-infinity.
inline double ztest_statistic(std::int64_t xa, std::int64_t xb, std::int64_t n, ZTestVariant v) {
    const double nn = static_cast<double>(n);
    const double ma = static_cast<double>(xa) / nn;
    const double mb = static_cast<double>(xb) / nn;
    double var;
    if (v == ZTestVariant::pooled) {
        const double p = static_cast<double>(xa + xb) / (2.0 * nn);
        var = p * (1.0 - p) * 2.0 / nn;
    } else {
        var = (ma * (1.0 - ma) + mb * (1.0 - mb)) / nn;
    }
    if (var <= 0.0) {
        if (xb == xa) return 0.0;
        return xb > xa ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    }
    return (mb - ma) / std::sqrt(var);
}

/// D(x_a, x_b) for every pair of success counts, stored compactly: for each
/// x_a, every x_b >= first_full(x_a) gets D = 1, an optional tie column gets
/// D = 1/2, and everything else gets D = 0.
class DecisionTable {
public:
    DecisionTable(std::int64_t n, std::vector<std::int64_t> first_full, std::vector<std::int64_t> tie)
        : n_(n), first_full_(std::move(first_full)), tie_(std::move(tie)) {}

    std::int64_t n() const { return n_; }
    std::int64_t first_full(std::int64_t xa) const { return first_full_.at(static_cast<std::size_t>(xa)); }
    /// Column with D = 1/2, or -1.
    std::int64_t tie(std::int64_t xa) const { return tie_.at(static_cast<std::size_t>(xa)); }

    double at(std::int64_t xa, std::int64_t xb) const {
        if (xa < 0 || xa > n_ || xb < 0 || xb > n_) throw std::out_of_range("success count");
        if (xb >= first_full(xa)) return 1.0;
        return xb == tie(xa) ? 0.5 : 0.0;
    }

private:
    std::int64_t n_;
    std::vector<std::int64_t> first_full_;
    std::vector<std::int64_t> tie_;
};

/// Builds D for a rule. The z-test rejection region is checked exhaustively to
/// be an upper set in x_b for every x_a, which the compact form relies on.
inline DecisionTable decision_boundary(const BinaryTwoArmRule& rule, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    rule.validate();
    const auto size = static_cast<std::size_t>(n + 1);
    std::vector<std::int64_t> first(size), tie(size, -1);
    if (!rule.is_test()) {
        for (std::int64_t xa = 0; xa <= n; ++xa) {
            first[static_cast<std::size_t>(xa)] = xa + 1;
            tie[static_cast<std::size_t>(xa)] = xa;
        }
        return {n, std::move(first), std::move(tie)};
    }
    const double z_crit = upper_critical_value(rule.alpha);
    for (std::int64_t xa = 0; xa <= n; ++xa) {
        std::int64_t first_reject = n + 1;
        for (std::int64_t xb = 0; xb <= n; ++xb) {
            const bool reject = ztest_statistic(xa, xb, n, rule.variant) > z_crit;
            if (reject && first_reject > n) {
                first_reject = xb;
            } else if (!reject && first_reject <= n) {
                throw std::logic_error("z-test rejection region is not monotone in x_b at n = " +
                                       std::to_string(n));
            }
        }
        first[static_cast<std::size_t>(xa)] = first_reject;
    }
    return {n, std::move(first), std::move(tie)};
}

/// Binomial law of one arm together with its upper tail sums.
struct ArmLaw {
    BinomialWindow window;
    std::vector<double> upper;  // upper[i] = P(X >= window.first + i)

    double at_least(std::int64_t k) const {
        if (k <= window.first) return upper.front();
        if (k > window.last()) return 0.0;
        return upper[static_cast<std::size_t>(k - window.first)];
    }
};

/// Expected assignment and regret of one rule at one n, for any state.
class ExactEvaluator {
public:
    ExactEvaluator(const BinaryTwoArmRule& rule, std::int64_t n)
        : rule_(rule), table_(decision_boundary(rule, n)), log_factorials_(n) {}

    std::int64_t n() const { return table_.n(); }
    const DecisionTable& table() const { return table_; }
    const BinaryTwoArmRule& rule() const { return rule_; }

    ArmLaw law(double mu) const {
        ArmLaw law;
        fill_binomial_window(log_factorials_, n(), mu, law.window);
        law.upper.resize(law.window.pmf.size());
        double acc = 0.0;
        for (std::size_t i = law.window.pmf.size(); i-- > 0;) {
            acc += law.window.pmf[i];
            law.upper[i] = acc;
        }
        return law;
    }

    /// E[D(X_a, X_b)] with X_a ~ Bin(n, mu_a), X_b ~ Bin(n, mu_b).
    double expected_assignment(const ArmLaw& a, const ArmLaw& b) const {
        double e = 0.0;
        for (std::size_t i = 0; i < a.window.pmf.size(); ++i) {
            const std::int64_t xa = a.window.first + static_cast<std::int64_t>(i);
            double share = b.at_least(table_.first_full(xa));
            if (const auto t = table_.tie(xa); t >= 0) share += 0.5 * b.window.at(t);
            e += a.window.pmf[i] * share;
        }
        return std::clamp(e, 0.0, 1.0);
    }

    double expected_assignment(double mu_a, double mu_b) const {
        check_means(mu_a, mu_b);
        return expected_assignment(law(mu_a), law(mu_b));
    }

    double regret(double mu_a, double mu_b, const ArmLaw& a, const ArmLaw& b) const {
        if (mu_a == mu_b) return 0.0;
        const double e = expected_assignment(a, b);
        return mu_b > mu_a ? (mu_b - mu_a) * (1.0 - e) : (mu_a - mu_b) * e;
    }

    double regret(double mu_a, double mu_b) const {
        check_means(mu_a, mu_b);
        if (mu_a == mu_b) return 0.0;
        return regret(mu_a, mu_b, law(mu_a), law(mu_b));
    }

private:
    static void check_means(double mu_a, double mu_b) {
        if (!(mu_a >= 0.0 && mu_a <= 1.0 && mu_b >= 0.0 && mu_b <= 1.0))
            throw std::domain_error("binary-outcome means must lie in [0, 1]");
    }

    BinaryTwoArmRule rule_;
    DecisionTable table_;
    LogFactorialTable log_factorials_;
};

namespace detail {

// Probability of choosing the inferior arm at one state, computed only over
// the windows of the two binomial laws and with the z-test boundary located
// by walking x_b upward, so no (n+1)^2 table is built. Terms are summed in the
// "wrong choice" direction, which keeps any truncation on the low side.
inline double windowed_regret(const BinaryTwoArmRule& rule, const LogFactorialTable& lf,
                              std::int64_t n, double mu_a, double mu_b) {
    if (mu_a == mu_b) return 0.0;
    BinomialWindow a, b;
    fill_binomial_window(lf, n, mu_a, a);
    fill_binomial_window(lf, n, mu_b, b);
    std::vector<double> upper(b.pmf.size() + 1, 0.0);
    for (std::size_t i = b.pmf.size(); i-- > 0;) upper[i] = upper[i + 1] + b.pmf[i];
    auto at_least = [&](std::int64_t k) {
        if (k <= b.first) return upper.front();
        if (k > b.last()) return 0.0;
        return upper[static_cast<std::size_t>(k - b.first)];
    };
    const double z_crit = rule.is_test() ? upper_critical_value(rule.alpha) : 0.0;
    const bool b_better = mu_b > mu_a;
    double wrong = 0.0;
    for (std::size_t i = 0; i < a.pmf.size(); ++i) {
        const std::int64_t xa = a.first + static_cast<std::int64_t>(i);
        double share;
        if (!rule.is_test()) {
            share = at_least(xa + 1) + 0.5 * b.at(xa);
        } else {
            std::int64_t xb = std::max(xa + 1, b.first);
            while (xb <= b.last() && !(ztest_statistic(xa, xb, n, rule.variant) > z_crit)) ++xb;
            share = at_least(xb);
        }
        wrong += a.pmf[i] * (b_better ? 1.0 - share : share);
    }
    return std::abs(mu_b - mu_a) * std::clamp(wrong, 0.0, 1.0);
}

}  // namespace detail

inline double expected_assignment(const BinaryTwoArmRule& rule, std::int64_t n, double mu_a,
                                  double mu_b) {
    return ExactEvaluator(rule, n).expected_assignment(mu_a, mu_b);
}

/// max(mu_a, mu_b) minus expected welfare: |mu_a - mu_b| times the probability
/// of choosing the inferior arm, ties counted at half weight.
inline double exact_regret(const BinaryTwoArmRule& rule, std::int64_t n, double mu_a, double mu_b) {
    return ExactEvaluator(rule, n).regret(mu_a, mu_b);
}

struct MaxRegretOptions {
    int grid_points = 201;       // per axis of the unit square
    int refine_starts = 20;      // best grid cells refined locally
    double tolerance = 1e-7;     // coordinate tolerance of the local refinement
    int max_sweeps = 40;
};

namespace detail {

struct StatePoint {
    double value = 0.0;
    double mu_a = 0.0;
    double mu_b = 0.0;
};

// Alternating golden-section ascent in (centre, gap) coordinates, where
// centre = (mu_a + mu_b)/2 and gap = mu_b - mu_a, inside a box of half-width
// `radius` around the start. Near-tie states form ridges parallel to the
// diagonal, which these coordinates follow.
inline StatePoint refine_state(const ExactEvaluator& ev, StatePoint start, double radius,
                               const MaxRegretOptions& opt) {
    auto eval = [&](double centre, double gap) {
        const double a = std::clamp(centre - 0.5 * gap, 0.0, 1.0);
        const double b = std::clamp(centre + 0.5 * gap, 0.0, 1.0);
        return StatePoint{ev.regret(a, b), a, b};
    };
    const double c0 = 0.5 * (start.mu_a + start.mu_b);
    const double g0 = start.mu_b - start.mu_a;
    double centre = c0, gap = g0;
    StatePoint best = start;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        const double prev_c = centre, prev_g = gap;
        auto along_gap = golden_section_minimize(
            [&](double g) { return -eval(centre, g).value; }, g0 - radius, g0 + radius, 0.0,
            0.1 * opt.tolerance);
        if (-along_gap.fx > best.value) {
            gap = along_gap.x;
            best = eval(centre, gap);
        }
        auto along_centre = golden_section_minimize(
            [&](double c) { return -eval(c, gap).value; }, c0 - radius, c0 + radius, 0.0,
            0.1 * opt.tolerance);
        if (-along_centre.fx > best.value) {
            centre = along_centre.x;
            best = eval(centre, gap);
        }
        if (std::abs(centre - prev_c) < opt.tolerance && std::abs(gap - prev_g) < opt.tolerance)
            break;
    }
    return best;
}

}  // namespace detail

/// Maximum regret over all states (mu_a, mu_b) in [0, 1]^2.
///
/// Uniform grid over the square, then local refinement from the best grid
/// cells. The reported state is the maximizing one.
inline RegretReport max_regret(const ExactEvaluator& ev, const MaxRegretOptions& opt = {}) {
    if (opt.grid_points < 2 || opt.refine_starts < 0)
        throw std::invalid_argument("invalid max-regret search options");
    const auto g = static_cast<std::size_t>(opt.grid_points);
    const double step = 1.0 / static_cast<double>(g - 1);
    std::vector<ArmLaw> laws;
    laws.reserve(g);
    for (std::size_t i = 0; i < g; ++i) laws.push_back(ev.law(static_cast<double>(i) * step));

    std::vector<detail::StatePoint> cells;
    cells.reserve(g * g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            if (i == j) continue;
            const double a = static_cast<double>(i) * step, b = static_cast<double>(j) * step;
            cells.push_back({ev.regret(a, b, laws[i], laws[j]), a, b});
        }
    }
    const auto starts = std::min(cells.size(), static_cast<std::size_t>(opt.refine_starts));
    auto by_value = [](const detail::StatePoint& x, const detail::StatePoint& y) {
        if (x.value != y.value) return x.value > y.value;
        if (x.mu_a != y.mu_a) return x.mu_a < y.mu_a;
        return x.mu_b < y.mu_b;
    };
    std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(starts), cells.end(),
                      by_value);
    detail::StatePoint best = cells.front();
    for (std::size_t k = 0; k < starts; ++k) {
        auto refined = detail::refine_state(ev, cells[k], step, opt);
        if (refined.value > best.value) best = refined;
    }
    return {best.value, State::two_arm(best.mu_a, best.mu_b), Method::exact_binary};
}

inline RegretReport max_regret(const BinaryTwoArmRule& rule, std::int64_t n,
                               const MaxRegretOptions& opt = {}) {
    return max_regret(ExactEvaluator(rule, n), opt);
}

struct SampleSizeSearch {
    std::optional<std::int64_t> n;           // smallest qualifying n, if any
    double regret = 0.0;                     // max regret at n, or at n_max when not found
    std::vector<std::int64_t> nonmonotone;   // n' > n with max regret above epsilon
    std::map<std::int64_t, double> evaluated;

    bool found() const { return n.has_value(); }
};

/// Smallest n <= n_max whose maximum regret is at most epsilon.
///
/// Maximum regret of a test rule is not monotone in n, so the answer is the
/// first crossing, not just any n where the regret dips below epsilon.
/// Up to `linear_limit` every n is evaluated. Beyond it an exponential
/// bracket and bisection find some crossing, and every n between
/// `linear_limit` and that crossing is then screened: the regret at any single
/// state is a lower bound on the maximum, so states that maximized regret at
/// already evaluated n (their gap rescaled by sqrt(n)) rule out most n cheaply
/// and only the survivors get a full evaluation. n + 1 .. n + verify_window
/// are checked so that non-monotone stretches are reported.
inline SampleSizeSearch min_sample_size(const BinaryTwoArmRule& rule, double epsilon,
                                        std::int64_t n_max, const MaxRegretOptions& opt = {},
                                        std::int64_t linear_limit = 200,
                                        std::int64_t verify_window = 10) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (n_max < 1) throw std::invalid_argument("n_max must be positive");
    rule.validate();
    SampleSizeSearch out;
    // (centre, gap * sqrt(n)) of maximizing states seen so far, most useful first.
    std::vector<std::pair<double, double>> witnesses;
    auto f = [&](std::int64_t n) {
        if (auto it = out.evaluated.find(n); it != out.evaluated.end()) return it->second;
        const auto r = max_regret(rule, n, opt);
        out.evaluated.emplace(n, r.value);
        const double ma = r.argmax_state->mean(0, 0), mb = r.argmax_state->mean(0, 1);
        witnesses.insert(witnesses.begin(),
                         {0.5 * (ma + mb), (mb - ma) * std::sqrt(static_cast<double>(n))});
        return r.value;
    };

    std::optional<std::int64_t> hit;
    const std::int64_t scan_end = std::min(linear_limit, n_max);
    for (std::int64_t n = 1; n <= scan_end; ++n) {
        if (f(n) <= epsilon) {
            hit = n;
            break;
        }
    }
    if (!hit && scan_end < n_max) {
        std::int64_t lo = scan_end;  // f(lo) > epsilon
        std::int64_t hi = std::min(2 * lo, n_max);
        while (f(hi) > epsilon && hi < n_max) {
            lo = hi;
            hi = std::min(2 * hi, n_max);
        }
        if (f(hi) <= epsilon) {
            while (hi - lo > 1) {
                const std::int64_t mid = lo + (hi - lo) / 2;
                (f(mid) <= epsilon ? hi : lo) = mid;
            }
            hit = hi;
            const LogFactorialTable lf(hi);
            auto ruled_out = [&](std::int64_t n) {
                const double root = std::sqrt(static_cast<double>(n));
                for (std::size_t w = 0; w < witnesses.size(); ++w) {
                    const double centre = witnesses[w].first, gap = witnesses[w].second / root;
                    const double a = std::clamp(centre - 0.5 * gap, 0.0, 1.0);
                    const double b = std::clamp(centre + 0.5 * gap, 0.0, 1.0);
                    if (detail::windowed_regret(rule, lf, n, a, b) > epsilon) {
                        std::rotate(witnesses.begin(), witnesses.begin() + static_cast<std::ptrdiff_t>(w),
                                    witnesses.begin() + static_cast<std::ptrdiff_t>(w) + 1);
                        return true;
                    }
                }
                return false;
            };
            for (std::int64_t n = scan_end + 1; n < hi; ++n) {
                if (auto it = out.evaluated.find(n); it != out.evaluated.end() && it->second > epsilon)
                    continue;
                if (ruled_out(n)) continue;
                if (f(n) <= epsilon) {
                    hit = n;
                    break;
                }
            }
        }
    }
    if (!hit) {
        out.regret = f(n_max);
        return out;
    }
    const std::int64_t n = *hit;
    out.n = n;
    out.regret = f(n);
    for (std::int64_t k = n + 1; k <= std::min(n + verify_window, n_max); ++k)
        if (f(k) > epsilon) out.nonmonotone.push_back(k);
    return out;
}

/// Type I error alpha, type II error beta, effect size delta = mu_b - mu_a.
struct PowerSpec {
    double alpha = 0.05;
    double beta = 0.2;
    double delta = 0.1;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("alpha and beta must lie in (0, 1)");
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    }
};

/// Per-arm n for a one-sided two-proportion z-test with error rates (alpha,
/// beta) at the state (mu_a, mu_b), by the usual normal approximation with
/// pooled variance under the null.
inline std::int64_t power_sample_size_general(double mu_a, double mu_b, double alpha, double beta) {
    if (!(mu_a > 0.0 && mu_a < 1.0 && mu_b > 0.0 && mu_b < 1.0))
        throw std::domain_error("means must lie in (0, 1)");
    if (mu_a == mu_b) throw std::domain_error("power sizing needs distinct means");
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("alpha and beta must lie in (0, 1)");
    const double centre = 0.5 * (mu_a + mu_b);
    const double z_alpha = upper_critical_value(alpha);
    const double z_beta = upper_critical_value(beta);
    const double num = z_alpha * std::sqrt(2.0 * centre * (1.0 - centre)) +
                       z_beta * std::sqrt(mu_a * (1.0 - mu_a) + mu_b * (1.0 - mu_b));
    const double gap = mu_b - mu_a;
    return static_cast<std::int64_t>(std::ceil(num * num / (gap * gap)));
}

/// Worst case of power_sample_size_general over states with the given effect
/// size, attained at mu_a = (1 - delta)/2.
inline std::int64_t power_sample_size(const PowerSpec& spec) {
    spec.validate();
    const double z_alpha = upper_critical_value(spec.alpha);
    const double z_beta = upper_critical_value(spec.beta);
    const double num = z_alpha + z_beta * std::sqrt(1.0 - spec.delta * spec.delta);
    return static_cast<std::int64_t>(std::ceil(num * num / (2.0 * spec.delta * spec.delta)));
}

}  // namespace epsopt
