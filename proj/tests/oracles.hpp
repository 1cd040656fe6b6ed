// Independent reference computations. Nothing here calls into the library's
// numerical code, so agreement is evidence rather than tautology.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Probability that arm b is chosen when arm a has xa successes and arm b has xb.
using Decision = std::function<double(int xa, int xb, int n)>;

inline double es_decision(int xa, int xb, int) {
    if (xb > xa) return 1.0;
    if (xb == xa) return 0.5;
    return 0.0;
}

// One-sided two-proportion z-test, pooled or unpooled, status quo arm a.
inline Decision ztest_decision(double z_alpha, bool pooled) {
    return [=](int xa, int xb, int n) {
        const double ma = static_cast<double>(xa) / n, mb = static_cast<double>(xb) / n;
        double var;
        if (pooled) {
            const double p = (xa + xb) / (2.0 * n);
            var = p * (1.0 - p) * 2.0 / n;
        } else {
            var = (ma * (1.0 - ma) + mb * (1.0 - mb)) / n;
        }
        if (var <= 0.0) return mb > ma ? 1.0 : 0.0;
        return (mb - ma) / std::sqrt(var) > z_alpha ? 1.0 : 0.0;
    };
}

// Regret by enumerating all 2^(2n) outcome sequences.
inline double sequence_regret(const Decision& rule, int n, double mu_a, double mu_b) {
    const std::uint32_t total = 1u << (2 * n);
    double pick_b = 0.0;
    for (std::uint32_t s = 0; s < total; ++s) {
        int xa = 0, xb = 0;
        double prob = 1.0;
        for (int j = 0; j < n; ++j) {
            const bool a = (s >> j) & 1u;
            const bool b = (s >> (n + j)) & 1u;
            xa += a;
            xb += b;
            prob *= (a ? mu_a : 1.0 - mu_a) * (b ? mu_b : 1.0 - mu_b);
        }
        pick_b += prob * rule(xa, xb, n);
    }
    const double best = std::max(mu_a, mu_b);
    return best - (pick_b * mu_b + (1.0 - pick_b) * mu_a);
}

// Binomial pmf by the multiplicative recurrence; fine for small n.
inline std::vector<double> binomial_row(int n, double p) {
    std::vector<double> row(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        double c = 1.0;
        for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
        row[k] = c * std::pow(p, k) * std::pow(1.0 - p, n - k);
    }
    return row;
}

// Regret by a direct double sum over the two binomial laws.
inline double summed_regret(const Decision& rule, int n, double mu_a, double mu_b) {
    const auto pa = binomial_row(n, mu_a), pb = binomial_row(n, mu_b);
    double pick_b = 0.0;
    for (int xa = 0; xa <= n; ++xa)
        for (int xb = 0; xb <= n; ++xb) pick_b += pa[xa] * pb[xb] * rule(xa, xb, n);
    return std::max(mu_a, mu_b) - (pick_b * mu_b + (1.0 - pick_b) * mu_a);
}

// Largest regret over a uniform points x points grid of states on [0, 1]^2.
inline double grid_max_regret(const Decision& rule, int n, int points) {
    std::vector<std::vector<double>> rows(points);
    for (int i = 0; i < points; ++i) rows[i] = binomial_row(n, static_cast<double>(i) / (points - 1));
    double best = 0.0;
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            const double mu_a = static_cast<double>(i) / (points - 1);
            const double mu_b = static_cast<double>(j) / (points - 1);
            double pick_b = 0.0;
            for (int xa = 0; xa <= n; ++xa)
                for (int xb = 0; xb <= n; ++xb) pick_b += rows[i][xa] * rows[j][xb] * rule(xa, xb, n);
            best = std::max(best, std::max(mu_a, mu_b) - (pick_b * mu_b + (1.0 - pick_b) * mu_a));
        }
    }
    return best;
}

// min over d > 0 of ln(1 + sum exp(d^2 c / 8)) / d on a dense grid, then a
// finer grid around the winner.
inline double grid_min_log_exp_sum(const std::vector<double>& coeffs, int points = 100000) {
    auto f = [&](double d) {
        double s = 1.0;
        for (double c : coeffs) s += std::exp(d * d * c / 8.0);
        return std::log(s) / d;
    };
    const double hi = 20.0;
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (int i = 1; i <= points; ++i) {
        const double d = hi * i / points;
        if (double v = f(d); v < best) best = v, arg = d;
    }
    const double step = hi / points;
    for (int i = -1000; i <= 1000; ++i) {
        const double d = arg + step * i / 1000.0;
        if (d > 0.0) best = std::min(best, f(d));
    }
    return best;
}

// Bisection on whichever tail keeps full relative precision.
inline double normal_quantile_by_bisection(double p) {
    if (p > 0.5) return -normal_quantile_by_bisection(1.0 - p);
    double lo = -40.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Best integer split of `budget` units over groups (each at least 1) for
// sum_g P(g) / sqrt(n_g), by exhaustive search. Two or three groups.
inline std::vector<std::int64_t> exhaustive_allocation(const std::vector<double>& probs,
                                                       std::int64_t budget) {
    auto obj = [&](const std::vector<std::int64_t>& n) {
        double s = 0.0;
        for (std::size_t g = 0; g < n.size(); ++g) s += probs[g] / std::sqrt(static_cast<double>(n[g]));
        return s;
    };
    std::vector<std::int64_t> best;
    double best_val = std::numeric_limits<double>::infinity();
    if (probs.size() == 2) {
        for (std::int64_t a = 1; a < budget; ++a) {
            std::vector<std::int64_t> n{a, budget - a};
            if (double v = obj(n); v < best_val) best_val = v, best = n;
        }
    } else {
        for (std::int64_t a = 1; a < budget; ++a)
            for (std::int64_t b = 1; a + b < budget; ++b) {
                std::vector<std::int64_t> n{a, b, budget - a - b};
                if (double v = obj(n); v < best_val) best_val = v, best = n;
            }
    }
    return best;
}

inline double allocation_value(const std::vector<double>& probs, const std::vector<std::int64_t>& n) {
    double s = 0.0;
    for (std::size_t g = 0; g < n.size(); ++g) s += probs[g] / std::sqrt(static_cast<double>(n[g]));
    return s;
}

// Every way to write `total` as an ordered sum of `parts` positive integers.
inline void compositions(int total, int parts, std::vector<std::int64_t>& cur,
                         const std::function<void(const std::vector<std::int64_t>&)>& visit) {
    if (parts == 1) {
        cur.push_back(total);
        visit(cur);
        cur.pop_back();
        return;
    }
    for (int first = 1; first <= total - parts + 1; ++first) {
        cur.push_back(first);
        compositions(total - first, parts - 1, cur, visit);
        cur.pop_back();
    }
}

}  // namespace oracle
