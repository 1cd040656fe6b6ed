// tables.hpp
//
// Reference tables: balanced-design bound constants, minimum sample sizes for
// epsilon-optimality, and power-based sample sizes with the maximum regret
// they imply. Emitted as CSV with full-precision, locale-independent numbers.
#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "epsopt/bounds.hpp"
#include "epsopt/exact.hpp"

namespace epsopt {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, res.ptr};
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline const std::vector<double> kTableEpsilons = {0.01, 0.03, 0.05, 0.10, 0.15};

/// Bound constants C with bound = C (u_h - u_l) n^(-1/2), for |T| = 2..7.
inline CsvTable table1() {
    CsvTable t;
    t.header = {"bound"};
    for (int k = 2; k <= 7; ++k) t.header.push_back("T" + std::to_string(k));
    for (auto choice : {BoundChoice::prop1, BoundChoice::prop2, BoundChoice::prop2_balanced}) {
        std::vector<std::string> row{std::string(to_string(choice))};
        for (std::size_t k = 2; k <= 7; ++k) row.push_back(format_full(balanced_constant(choice, k)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

struct Table2Options {
    ZTestVariant variant = ZTestVariant::pooled;
    std::int64_t n_max = 20000;
    MaxRegretOptions search;
    std::function<void(std::string_view)> log;  // progress and warnings
};

/// Minimum per-arm n making each rule epsilon-optimal for binary outcomes,
/// alongside the sufficient n from the prop1 bound.
inline CsvTable table2(const Table2Options& opt = {}) {
    const std::string suffix = "_" + std::string(to_string(opt.variant));
    CsvTable t;
    t.header = {"epsilon", "es", "ztest_alpha_0.05" + suffix, "ztest_alpha_0.01" + suffix,
                "prop1_bound"};
    auto cell = [&](const BinaryTwoArmRule& rule, double eps) -> std::string {
        const auto res = min_sample_size(rule, eps, opt.n_max, opt.search);
        if (opt.log) {
            std::string msg = rule.label() + " epsilon=" + format_full(eps) + ": ";
            msg += res.found() ? "n=" + std::to_string(*res.n) : "not found";
            for (auto k : res.nonmonotone) msg += " [warning: max regret exceeds epsilon at n=" + std::to_string(k) + "]";
            opt.log(msg);
        }
        return res.found() ? std::to_string(*res.n) : "NA";
    };
    for (double eps : kTableEpsilons) {
        t.rows.push_back({format_full(eps), cell(BinaryTwoArmRule::empirical_success(), eps),
                          cell(BinaryTwoArmRule::ztest(0.05, opt.variant), eps),
                          cell(BinaryTwoArmRule::ztest(0.01, opt.variant), eps),
                          std::to_string(sufficient_n_balanced(eps, 2, OutcomeModel::binary_outcome(),
                                                               BoundChoice::prop1))});
    }
    return t;
}

/// Power-based per-arm n (alpha = 0.05, beta = 0.20 and 0.10) and the maximum
/// regret of the alpha = 0.05 z-test rule at that n.
inline CsvTable table3(ZTestVariant variant = ZTestVariant::pooled,
                       const MaxRegretOptions& search = {}) {
    CsvTable t;
    t.header = {"delta", "n_power_beta_0.20", "max_regret_beta_0.20", "n_power_beta_0.10",
                "max_regret_beta_0.10"};
    const auto rule = BinaryTwoArmRule::ztest(0.05, variant);
    for (double delta : kTableEpsilons) {
        std::vector<std::string> row{format_full(delta)};
        for (double beta : {0.20, 0.10}) {
            const auto n = power_sample_size({0.05, beta, delta});
            row.push_back(std::to_string(n));
            row.push_back(format_full(max_regret(rule, n, search).value));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace epsopt
