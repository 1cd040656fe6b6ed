// cli.hpp
//
// The `epsopt` command line. `run` is the whole program minus process setup so
// tests can drive it with in-memory streams.
#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "document.hpp"
#include "epsopt/epsopt.hpp"

namespace epsopt::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kInfeasible = 3, kSearchExhausted = 4 };

/// Error carrying the exit code it maps to.
class CommandError : public std::runtime_error {
public:
    CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

/// Report number: 6 significant digits, classic locale.
inline std::string fmt(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(6) << v;
    return s.str();
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CommandError(kInputError, "cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CommandError(kInputError, "cannot write '" + path + "'");
    f << text;
    f.flush();
    if (!f) throw CommandError(kInputError, "cannot write '" + path + "'");
}

inline DesignDocument load_document(const std::string& path) {
    try {
        return parse_document(read_file(path));
    } catch (const DocumentError& e) {
        throw CommandError(kInputError, path + ": " + e.what());
    }
}

inline OutcomeModel outcome_from_range(const std::vector<double>& range) {
    OutcomeModel m{range.at(0), range.at(1), range.at(0) == 0.0 && range.at(1) == 1.0};
    m.validate();
    return m;
}

inline BoundChoice parse_choice(const std::string& s) {
    if (s == "prop1") return BoundChoice::prop1;
    if (s == "prop2") return BoundChoice::prop2;
    return BoundChoice::best_of_both;
}

inline ZTestVariant parse_variant(const std::string& s) {
    return s == "unpooled" ? ZTestVariant::unpooled : ZTestVariant::pooled;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    std::string item;
    while (std::getline(in, item, ',')) {
        std::istringstream one(item);
        one.imbue(std::locale::classic());
        double v;
        if (!(one >> v) || !(one >> std::ws).eof())
            throw CommandError(kInputError, flag + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw CommandError(kInputError, flag + " needs at least one value");
    return out;
}

// Options shared by several subcommands; `count` tells whether the user gave one.
struct Common {
    std::vector<double> range{0.0, 1.0};
    std::size_t treatments = 2;
    double epsilon = 0.0;
    double kappa = 0.0;
    double alpha = 0.05;
    double beta = 0.2;
    std::uint64_t seed = 0;
    std::int64_t reps = 100000;
    std::string out;
    std::string variant = "pooled";
    std::string bound = "best";
};

inline CLI::Option* add_range(CLI::App* app, Common& c) {
    return app->add_option("--range", c.range, "outcome range LO HI")->expected(2)->capture_default_str();
}
inline CLI::Option* add_treatments(CLI::App* app, Common& c) {
    return app->add_option("--treatments", c.treatments, "number of treatments")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
}
inline CLI::Option* add_epsilon(CLI::App* app, Common& c) {
    return app->add_option("--epsilon", c.epsilon, "regret target")->check(CLI::PositiveNumber);
}
inline CLI::Option* add_kappa(CLI::App* app, Common& c) {
    return app->add_option("--kappa", c.kappa, "unsampled population share")
        ->check(CLI::Range(0.0, 1.0));
}
inline CLI::Option* add_variant(CLI::App* app, Common& c) {
    return app->add_option("--ztest-variant", c.variant, "z-test variance convention")
        ->check(CLI::IsMember({"pooled", "unpooled"}))
        ->capture_default_str();
}
inline CLI::Option* add_bound(CLI::App* app, Common& c) {
    return app->add_option("--bound", c.bound, "bound family")
        ->check(CLI::IsMember({"prop1", "prop2", "best"}))
        ->capture_default_str();
}

inline void warn_override(std::ostream& err, const std::string& flag, const std::string& field) {
    err << "warning: " << flag << " overrides document field '" << field << "'\n";
}

}  // namespace detail

// Subcommands ----------------------------------------------------------------

struct BoundArgs {
    std::string design;
    std::int64_t n = 0;
};

inline int cmd_bound(const detail::Common& c, const BoundArgs& a, const CLI::App& sub,
                     std::ostream& out, std::ostream& err) {
    DesignDocument doc{OutcomeModel::binary_outcome(), TrialDesign::balanced(2, 1), std::nullopt,
                       std::nullopt, std::nullopt};
    const bool range_set = sub.count("--range") > 0;
    if (!a.design.empty()) {
        doc = detail::load_document(a.design);
        if (sub.count("--treatments") || sub.count("--n"))
            throw CommandError(kInputError, "--treatments/--n cannot be combined with --design");
        if (range_set) detail::warn_override(err, "--range", "outcome");
    } else {
        if (!sub.count("--n")) throw CommandError(kInputError, "bound needs --design or --n");
        doc.design = TrialDesign::balanced(c.treatments, a.n);
    }
    if (range_set || a.design.empty()) doc.outcome = detail::outcome_from_range(c.range);
    if (sub.count("--kappa")) {
        if (doc.validity) detail::warn_override(err, "--kappa", "kappa");
        doc.validity = PartialValidity{c.kappa};
        doc.validity->validate();
    }

    const auto& design = doc.design;
    const auto& outcome = doc.outcome;
    if (design.single_group()) {
        const auto p1 = prop1_bound(design, outcome);
        const auto p2 = prop2_bound(design, outcome);
        out << "prop1: " << fmt(p1.value) << "\n";
        out << "prop2: " << fmt(p2.value) << "\n";
        if (design.balanced())
            out << "prop2_balanced: "
                << fmt(prop2_balanced_bound(design.size(0, 0), design.num_treatments(), outcome).value)
                << "\n";
        const auto best = bound_for(BoundChoice::best_of_both, design, outcome);
        out << "best: " << fmt(best.value) << " (" << to_string(best.method) << ")\n";
        if (doc.validity) {
            out << "kappa: " << fmt(doc.validity->kappa) << "\n";
            for (auto choice : {BoundChoice::prop1, BoundChoice::prop2}) {
                const auto pv = partial_validity_bound(design, outcome, *doc.validity, choice);
                out << to_string(pv.method) << ": " << fmt(pv.value) << "\n";
            }
        }
    } else {
        out << "covariate_prop1: " << fmt(covariate_prop1_bound(design, outcome).value) << "\n";
        out << "covariate_prop2: " << fmt(covariate_prop2_bound(design, outcome).value) << "\n";
        if (doc.validity)
            err << "note: partial-validity bounds are only reported for single-group designs\n";
    }
    if (!c.out.empty()) detail::write_file(c.out, serialize_document(doc));
    return kOk;
}

struct SizeArgs {
    std::string design;
};

inline int cmd_size(const detail::Common& c, const SizeArgs& a, const CLI::App& sub,
                    std::ostream& out, std::ostream& err) {
    OutcomeModel outcome = detail::outcome_from_range(c.range);
    std::size_t treatments = c.treatments;
    std::optional<double> epsilon;
    std::optional<PartialValidity> validity;
    if (sub.count("--epsilon")) epsilon = c.epsilon;
    if (sub.count("--kappa")) validity = PartialValidity{c.kappa};

    if (!a.design.empty()) {
        const auto doc = detail::load_document(a.design);
        if (sub.count("--range")) detail::warn_override(err, "--range", "outcome");
        else outcome = doc.outcome;
        if (sub.count("--treatments")) detail::warn_override(err, "--treatments", "treatments");
        else treatments = doc.design.num_treatments();
        if (doc.epsilon) {
            if (epsilon) detail::warn_override(err, "--epsilon", "epsilon");
            else epsilon = doc.epsilon;
        }
        if (doc.validity) {
            if (validity) detail::warn_override(err, "--kappa", "kappa");
            else validity = doc.validity;
        }
    }
    if (!epsilon) throw CommandError(kInputError, "size needs --epsilon");
    const auto choice = detail::parse_choice(c.bound);

    double target = *epsilon;
    out << "epsilon: " << fmt(*epsilon) << "\n";
    out << "treatments: " << treatments << "\n";
    if (validity) {
        validity->validate();
        const auto adjusted = adjusted_epsilon(*epsilon, *validity, outcome);
        if (!adjusted)
            throw CommandError(kInfeasible,
                               "infeasible: kappa * (high - low) = " +
                                   fmt(validity->kappa * outcome.range()) +
                                   " must be below epsilon = " + fmt(*epsilon));
        target = *adjusted;
        out << "kappa: " << fmt(validity->kappa) << "\n";
        out << "adjusted epsilon: " << fmt(target) << "\n";
    }
    std::int64_t n = 0;
    if (choice == BoundChoice::best_of_both) {
        const auto n1 = sufficient_n_balanced(target, treatments, outcome, BoundChoice::prop1);
        const auto n2 = sufficient_n_balanced(target, treatments, outcome, BoundChoice::prop2);
        out << "prop1: " << n1 << "\n";
        out << "prop2: " << n2 << "\n";
        n = std::min(n1, n2);
    } else {
        n = sufficient_n_balanced(target, treatments, outcome, choice);
        out << to_string(choice) << ": " << n << "\n";
    }
    out << "sufficient n per arm: " << n << "\n";
    return kOk;
}

struct ExactArgs {
    std::string rule = "es";
    std::int64_t n = 0;
    std::int64_t n_max = 20000;
    double delta = 0.0;
    int grid = 201;
};

inline int cmd_exact(const detail::Common& c, const ExactArgs& a, const CLI::App& sub,
                     std::ostream& out, std::ostream& err) {
    if (sub.count("--range") && !(c.range[0] == 0.0 && c.range[1] == 1.0))
        throw CommandError(kInputError, "exact computations need binary outcomes (--range 0 1)");
    const auto variant = detail::parse_variant(c.variant);
    const auto rule = a.rule == "ztest" ? BinaryTwoArmRule::ztest(c.alpha, variant)
                                        : BinaryTwoArmRule::empirical_success();
    rule.validate();
    MaxRegretOptions opt;
    opt.grid_points = a.grid;

    const int modes = (sub.count("--n") > 0) + (sub.count("--epsilon") > 0) + (sub.count("--delta") > 0);
    if (modes != 1) throw CommandError(kInputError, "exact needs exactly one of --n, --epsilon, --delta");
    out << "rule: " << rule.label() << "\n";

    auto print_max = [&](std::int64_t n) {
        const auto r = max_regret(rule, n, opt);
        out << "n per arm: " << n << "\n";
        out << "max regret: " << fmt(r.value) << "\n";
        if (r.argmax_state)
            out << "argmax state: mu_a=" << fmt(r.argmax_state->mean(0, 0))
                << ", mu_b=" << fmt(r.argmax_state->mean(0, 1)) << "\n";
    };

    if (sub.count("--n")) {
        print_max(a.n);
        return kOk;
    }
    if (sub.count("--delta")) {
        const PowerSpec spec{c.alpha, c.beta, a.delta};
        const auto n = power_sample_size(spec);
        out << "power n per arm (alpha=" << fmt(spec.alpha) << ", beta=" << fmt(spec.beta)
            << ", delta=" << fmt(spec.delta) << "): " << n << "\n";
        if (rule.is_test()) print_max(n);
        return kOk;
    }
    const auto res = min_sample_size(rule, c.epsilon, a.n_max, opt);
    out << "epsilon: " << fmt(c.epsilon) << "\n";
    if (!res.found()) {
        double best = res.regret;
        std::int64_t best_n = a.n_max;
        for (const auto& [n, v] : res.evaluated)
            if (v < best) best = v, best_n = n;
        throw CommandError(kSearchExhausted, "search exhausted: no n <= " + std::to_string(a.n_max) +
                                                 " reaches epsilon; best regret found " + fmt(best) +
                                                 " at n=" + std::to_string(best_n));
    }
    out << "minimum n per arm: " << *res.n << "\n";
    out << "max regret at n: " << fmt(res.regret) << "\n";
    for (auto k : res.nonmonotone)
        err << "warning: max regret exceeds epsilon again at n=" << k << "\n";
    return kOk;
}

struct TablesArgs {
    int which = 1;
    std::int64_t n_max = 20000;
};

inline int cmd_tables(const detail::Common& c, const TablesArgs& a, std::ostream& out,
                      std::ostream& err) {
    const auto variant = detail::parse_variant(c.variant);
    CsvTable table;
    if (a.which == 1) {
        table = table1();
    } else if (a.which == 2) {
        Table2Options opt;
        opt.variant = variant;
        opt.n_max = a.n_max;
        opt.log = [&](std::string_view msg) { err << msg << "\n"; };
        table = table2(opt);
    } else {
        table = table3(variant);
    }
    if (c.out.empty()) out << table.to_csv();
    else detail::write_file(c.out, table.to_csv());
    return kOk;
}

struct AllocateArgs {
    std::string probs;
    std::int64_t budget = 0;
};

inline int cmd_allocate(const detail::Common& c, const AllocateArgs& a, std::ostream& out,
                        std::ostream&) {
    const auto probs = detail::parse_list(a.probs, "--probs");
    AllocationProblem problem;
    for (std::size_t g = 0; g < probs.size(); ++g)
        problem.groups.push_back({"g" + std::to_string(g + 1), probs[g]});
    problem.total_budget = a.budget;
    problem.num_treatments = c.treatments;
    if (a.budget < static_cast<std::int64_t>(c.treatments * probs.size()))
        throw CommandError(kInfeasible, "infeasible: budget " + std::to_string(a.budget) +
                                            " cannot give each of the " +
                                            std::to_string(c.treatments * probs.size()) +
                                            " strata one subject");
    const auto cont = continuous_allocation(problem);
    const auto integer = integer_allocation(problem);

    std::vector<std::string> cs, is;
    for (double v : cont) cs.push_back(fmt(v));
    for (auto v : integer) is.push_back(std::to_string(v));
    out << "per-treatment budget: " << problem.per_treatment_budget();
    if (problem.dropped_units()) out << " (" << problem.dropped_units() << " unit(s) dropped)";
    out << "\n";
    out << "continuous allocation per treatment: " << join(cs) << "\n";
    out << "integer allocation per treatment: " << join(is) << "\n";
    out << "objective continuous: " << fmt(allocation_objective(problem.groups, cont)) << "\n";
    out << "objective integer: " << fmt(allocation_objective(problem.groups, integer)) << "\n";
    for (std::size_t g = 1; g < probs.size(); ++g)
        out << "ratio check g" << g + 1 << "/g1: n ratio " << fmt(cont[g] / cont[0])
            << ", (P ratio)^(2/3) " << fmt(std::cbrt(std::pow(probs[g] / probs[0], 2.0))) << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string design;
    std::int64_t n = 0;
    std::string means;
    std::string dist = "bernoulli";
    double concentration = 2.0;
    unsigned threads = 1;
};

inline int cmd_simulate(const detail::Common& c, const SimulateArgs& a, const CLI::App& sub,
                        std::ostream& out, std::ostream& err) {
    OutcomeModel outcome = detail::outcome_from_range(c.range);
    std::optional<TrialDesign> design;
    std::optional<State> truth;
    if (!a.design.empty()) {
        const auto doc = detail::load_document(a.design);
        if (sub.count("--treatments") || sub.count("--n"))
            throw CommandError(kInputError, "--treatments/--n cannot be combined with --design");
        if (sub.count("--range")) detail::warn_override(err, "--range", "outcome");
        else outcome = doc.outcome;
        design = doc.design;
        truth = doc.means;
        if (truth && !a.means.empty()) detail::warn_override(err, "--means", "means");
    } else {
        if (!sub.count("--n")) throw CommandError(kInputError, "simulate needs --design or --n");
        design = TrialDesign::balanced(c.treatments, a.n);
    }
    if (!a.means.empty()) {
        const auto flat = detail::parse_list(a.means, "--means");
        const auto k = design->num_treatments();
        if (flat.size() != k * design->num_groups())
            throw CommandError(kInputError, "--means needs one value per (group, treatment) stratum");
        std::vector<std::vector<double>> rows;
        for (std::size_t g = 0; g < design->num_groups(); ++g)
            rows.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(g * k),
                              flat.begin() + static_cast<std::ptrdiff_t>((g + 1) * k));
        truth = State{StratumTable<double>(rows)};
    }
    if (!truth) throw CommandError(kInputError, "simulate needs stratum means (--means or document)");
    truth->check(*design, outcome);
    if (!(a.concentration > 0.0)) throw CommandError(kInputError, "--concentration must be positive");

    StratumTable<OutcomeDistribution> laws(design->num_groups(), design->num_treatments());
    for (std::size_t g = 0; g < design->num_groups(); ++g) {
        for (std::size_t t = 0; t < design->num_treatments(); ++t) {
            const double mu = truth->mean(g, t);
            const double p = (mu - outcome.low) / outcome.range();
            if (a.dist == "point") laws(g, t) = OutcomeDistribution::point_mass(mu);
            else if (a.dist == "beta") {
                if (p <= 0.0 || p >= 1.0)
                    throw CommandError(kInputError, "beta strata need means strictly inside the range");
                laws(g, t) = OutcomeDistribution::scaled_beta(a.concentration * p,
                                                              a.concentration * (1.0 - p));
            } else laws(g, t) = OutcomeDistribution::bernoulli_with_mean(mu, outcome);
        }
    }
    SimulationPlan plan{*design, outcome, std::move(laws), c.reps, c.seed};
    const auto est = estimate_regret(plan, a.threads);
    const double bound = std::min(covariate_prop1_bound(*design, outcome).value,
                                  covariate_prop2_bound(*design, outcome).value);
    const double slack = bound + 4.0 * est.standard_error;
    out << "replications: " << est.replications << " (seed " << c.seed << ")\n";
    out << "regret estimate: " << fmt(est.regret) << " +/- " << fmt(est.standard_error) << "\n";
    out << "mean welfare: " << fmt(est.mean_welfare) << "\n";
    out << "best welfare: " << fmt(est.best_welfare) << "\n";
    out << "bound: " << fmt(bound) << "\n";
    out << "verdict: " << (est.regret <= slack ? "ok" : "violated") << " (estimate <= bound + 4 SE)\n";
    return kOk;
}

// Entry point ------------------------------------------------------------------

/// Runs the command line `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sample sizes for near-optimal treatment choice", "epsopt"};
    app.require_subcommand(1);
    detail::Common c;

    auto* bound = app.add_subcommand("bound", "regret bounds for a design");
    BoundArgs bound_args;
    bound->add_option("--design", bound_args.design, "design document")->check(CLI::ExistingFile);
    bound->add_option("--n", bound_args.n, "subjects per arm (balanced design)")
        ->check(CLI::PositiveNumber);
    detail::add_treatments(bound, c);
    detail::add_range(bound, c);
    detail::add_kappa(bound, c);
    bound->add_option("--out", c.out, "write the canonical design document here");

    auto* size = app.add_subcommand("size", "balanced sample size reaching a regret target");
    SizeArgs size_args;
    size->add_option("--design", size_args.design, "design document")->check(CLI::ExistingFile);
    detail::add_epsilon(size, c);
    detail::add_treatments(size, c);
    detail::add_range(size, c);
    detail::add_kappa(size, c);
    detail::add_bound(size, c);

    auto* exact = app.add_subcommand("exact", "exact maximum regret for binary two-arm trials");
    ExactArgs exact_args;
    exact->add_option("--rule", exact_args.rule, "treatment rule")
        ->check(CLI::IsMember({"es", "ztest"}))
        ->capture_default_str();
    exact->add_option("--n", exact_args.n, "subjects per arm")->check(CLI::PositiveNumber);
    detail::add_epsilon(exact, c);
    exact->add_option("--delta", exact_args.delta, "effect size for power sizing")
        ->check(CLI::Range(0.0, 1.0));
    exact->add_option("--alpha", c.alpha, "test size")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    exact->add_option("--beta", c.beta, "type II error")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    exact->add_option("--n-max", exact_args.n_max, "search limit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    exact->add_option("--grid", exact_args.grid, "state grid points per axis")
        ->check(CLI::Range(3, 100001))
        ->capture_default_str();
    detail::add_variant(exact, c);
    detail::add_range(exact, c);

    auto* tables = app.add_subcommand("tables", "reproduce the reference tables as CSV");
    TablesArgs tables_args;
    tables->add_option("which", tables_args.which, "table number")
        ->required()
        ->check(CLI::IsMember({1, 2, 3}));
    tables->add_option("--out", c.out, "CSV path (default stdout)");
    tables->add_option("--n-max", tables_args.n_max, "search limit for table 2")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    detail::add_variant(tables, c);

    auto* allocate = app.add_subcommand("allocate", "split a budget across covariate groups");
    AllocateArgs allocate_args;
    allocate->add_option("--probs", allocate_args.probs, "group probabilities, comma-separated")
        ->required();
    allocate->add_option("--budget", allocate_args.budget, "total subjects")->required();
    detail::add_treatments(allocate, c);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo regret of the empirical-success rule");
    SimulateArgs sim_args;
    simulate->add_option("--design", sim_args.design, "design document")->check(CLI::ExistingFile);
    simulate->add_option("--n", sim_args.n, "subjects per arm (balanced design)")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--means", sim_args.means, "stratum means, group-major, comma-separated");
    simulate->add_option("--dist", sim_args.dist, "outcome law within each stratum")
        ->check(CLI::IsMember({"bernoulli", "point", "beta"}))
        ->capture_default_str();
    simulate->add_option("--concentration", sim_args.concentration, "a + b for beta strata")
        ->capture_default_str();
    simulate->add_option("--reps", c.reps, "replications")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--seed", c.seed, "master seed")->capture_default_str();
    simulate->add_option("--threads", sim_args.threads, "worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    detail::add_treatments(simulate, c);
    detail::add_range(simulate, c);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*bound) return cmd_bound(c, bound_args, *bound, out, err);
        if (*size) return cmd_size(c, size_args, *size, out, err);
        if (*exact) return cmd_exact(c, exact_args, *exact, out, err);
        if (*tables) return cmd_tables(c, tables_args, out, err);
        if (*allocate) return cmd_allocate(c, allocate_args, out, err);
        return cmd_simulate(c, sim_args, *simulate, out, err);
    } catch (const CommandError& e) {
        err << "error: " << e.what() << "\n";
        return e.code();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

}  // namespace epsopt::cli
