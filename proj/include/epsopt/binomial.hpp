// binomial.hpp
//
// Binomial probabilities in log space. Large designs (tens of thousands of
// subjects per arm) underflow a direct product formula, so the pmf is built
// from a log-factorial table and only the indices carrying non-negligible
// mass are kept.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace epsopt {

class LogFactorialTable {
public:
    explicit LogFactorialTable(std::int64_t n_max) : table_(static_cast<std::size_t>(n_max) + 1) {
        if (n_max < 0) throw std::invalid_argument("log-factorial table size must be non-negative");
        for (std::int64_t k = 0; k <= n_max; ++k)
            table_[static_cast<std::size_t>(k)] = std::lgamma(static_cast<double>(k) + 1.0);
    }

    std::int64_t n_max() const { return static_cast<std::int64_t>(table_.size()) - 1; }

    double log_factorial(std::int64_t k) const { return table_.at(static_cast<std::size_t>(k)); }

    double log_choose(std::int64_t n, std::int64_t k) const {
        return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
    }

private:
    std::vector<double> table_;
};

/// Binomial(n, p) pmf on the contiguous index range [first, first + pmf.size()).
/// Every index outside the window has probability below exp(log_floor).
struct BinomialWindow {
    std::int64_t first = 0;
    std::vector<double> pmf;

    std::int64_t last() const { return first + static_cast<std::int64_t>(pmf.size()) - 1; }
    double at(std::int64_t k) const {
        return (k < first || k > last()) ? 0.0 : pmf[static_cast<std::size_t>(k - first)];
    }
};

inline constexpr double kDefaultLogFloor = -50.0;  // ~2e-22

inline void fill_binomial_window(const LogFactorialTable& lf, std::int64_t n, double p,
                                 BinomialWindow& out, double log_floor = kDefaultLogFloor) {
    if (n < 0 || n > lf.n_max()) throw std::invalid_argument("binomial n outside the table");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial probability must be in [0, 1]");
    out.pmf.clear();
    if (p == 0.0 || p == 1.0) {
        out.first = p == 0.0 ? 0 : n;
        out.pmf.push_back(1.0);
        return;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    auto log_pmf = [&](std::int64_t k) {
        return lf.log_choose(n, k) + static_cast<double>(k) * lp + static_cast<double>(n - k) * lq;
    };
    const std::int64_t mode =
        std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((n + 1) * p)), 0, n);
    std::int64_t lo = mode, hi = mode;
    while (lo > 0 && log_pmf(lo - 1) >= log_floor) --lo;
    while (hi < n && log_pmf(hi + 1) >= log_floor) ++hi;
    out.first = lo;
    out.pmf.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k)
        out.pmf[static_cast<std::size_t>(k - lo)] = std::exp(log_pmf(k));
}

/// Single binomial probability; convenient for small cases and tests.
inline double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace epsopt
