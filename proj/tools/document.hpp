// document.hpp
//
// Design documents: a hand-editable YAML description of a trial.
//
//   outcome: {low: 0, high: 1, binary: true}
//   treatments: [a, b]
//   groups:
//     - label: all
//       probability: 1
//       sizes: [100, 100]
//       means: [0.2, 0.6]      # optional, used by `simulate`
//   kappa: 0.05                # optional
//   epsilon: 0.1               # optional
#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsopt/bounds.hpp"
#include "epsopt/core.hpp"
#include "epsopt/tables.hpp"

namespace epsopt::cli {

/// Malformed document; line and column are 1-based.
class DocumentError : public std::runtime_error {
public:
    DocumentError(int line, int column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                             ": " + what),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct DesignDocument {
    OutcomeModel outcome;
    TrialDesign design;
    std::optional<PartialValidity> validity;
    std::optional<double> epsilon;
    std::optional<State> means;

    bool operator==(const DesignDocument&) const = default;
};

namespace detail {

[[noreturn]] inline void fail(const YAML::Node& node, const std::string& what) {
    const auto mark = node.Mark();
    throw DocumentError(mark.line + 1, mark.column + 1, what);
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) fail(node, "'" + field + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, "'" + field + "' has the wrong type");
    }
}

inline YAML::Node required(const YAML::Node& parent, const std::string& key) {
    YAML::Node child = parent[key];
    if (!child) fail(parent, "missing required field '" + key + "'");
    return child;
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) fail(node, "'" + field + "' must be a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, field));
    return out;
}

inline void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed) {
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail(kv.first, "unknown field '" + key + "'");
    }
}

}  // namespace detail

inline DesignDocument parse_document(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw DocumentError(e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    if (!root.IsMap()) throw DocumentError(1, 1, "document must be a mapping");
    detail::check_keys(root, {"outcome", "treatments", "groups", "kappa", "epsilon"});

    OutcomeModel outcome;
    if (auto node = root["outcome"]) {
        if (!node.IsMap()) detail::fail(node, "'outcome' must be a mapping");
        detail::check_keys(node, {"low", "high", "binary"});
        if (auto b = node["binary"]) outcome.binary = detail::scalar<bool>(b, "binary");
        if (auto lo = node["low"]) outcome.low = detail::scalar<double>(lo, "low");
        if (auto hi = node["high"]) outcome.high = detail::scalar<double>(hi, "high");
        try {
            outcome.validate();
        } catch (const std::invalid_argument& e) {
            detail::fail(node, e.what());
        }
    }

    const auto groups_node = detail::required(root, "groups");
    if (!groups_node.IsSequence() || groups_node.size() == 0)
        detail::fail(groups_node, "'groups' must be a non-empty list");

    std::vector<std::string> treatments;
    if (auto node = root["treatments"]) {
        treatments = detail::sequence<std::string>(node, "treatments");
    }

    std::vector<CovariateGroup> groups;
    std::vector<std::vector<std::int64_t>> sizes;
    std::vector<std::vector<double>> means;
    bool any_means = false;
    for (const auto& g : groups_node) {
        if (!g.IsMap()) detail::fail(g, "each group must be a mapping");
        detail::check_keys(g, {"label", "probability", "sizes", "means"});
        CovariateGroup group;
        group.label = g["label"] ? detail::scalar<std::string>(g["label"], "label")
                                 : "g" + std::to_string(groups.size() + 1);
        group.probability = g["probability"] ? detail::scalar<double>(g["probability"], "probability")
                                             : (groups_node.size() == 1 ? 1.0 : -1.0);
        if (group.probability < 0.0) detail::fail(g, "group needs a 'probability'");
        const auto sizes_node = detail::required(g, "sizes");
        auto row = detail::sequence<std::int64_t>(sizes_node, "sizes");
        if (treatments.empty()) treatments = default_treatment_labels(row.size());
        if (row.size() != treatments.size())
            detail::fail(sizes_node, "'sizes' needs one entry per treatment");
        if (groups.empty()) any_means = static_cast<bool>(g["means"]);
        if (static_cast<bool>(g["means"]) != any_means)
            detail::fail(g, "'means' must be given for every group or none");
        if (any_means) {
            const auto m = g["means"];
            auto mrow = detail::sequence<double>(m, "means");
            if (mrow.size() != treatments.size())
                detail::fail(m, "'means' needs one entry per treatment");
            means.push_back(std::move(mrow));
        }
        groups.push_back(std::move(group));
        sizes.push_back(std::move(row));
    }
    if (any_means && means.size() != groups.size())
        detail::fail(groups_node, "'means' must be given for every group or none");

    std::optional<TrialDesign> design;
    try {
        design.emplace(std::move(treatments), std::move(groups), StratumTable<std::int64_t>(sizes));
    } catch (const std::invalid_argument& e) {
        detail::fail(groups_node, e.what());
    }

    DesignDocument doc{outcome, *design, std::nullopt, std::nullopt, std::nullopt};
    if (auto k = root["kappa"]) {
        PartialValidity pv{detail::scalar<double>(k, "kappa")};
        try {
            pv.validate();
        } catch (const std::invalid_argument& e) {
            detail::fail(k, e.what());
        }
        doc.validity = pv;
    }
    if (auto e = root["epsilon"]) {
        const double eps = detail::scalar<double>(e, "epsilon");
        if (!(eps > 0.0)) detail::fail(e, "epsilon must be positive");
        doc.epsilon = eps;
    }
    if (any_means) {
        State state{StratumTable<double>(means)};
        try {
            state.check(doc.design, doc.outcome);
        } catch (const std::invalid_argument& e) {
            detail::fail(groups_node, e.what());
        }
        doc.means = std::move(state);
    }
    return doc;
}

/// Canonical text of a document: every field written, numbers in shortest
/// round-trip form.
inline std::string serialize_document(const DesignDocument& doc) {
    auto num = [](double v) { return format_full(v); };
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "outcome" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "low" << YAML::Value << num(doc.outcome.low);
    out << YAML::Key << "high" << YAML::Value << num(doc.outcome.high);
    out << YAML::Key << "binary" << YAML::Value << doc.outcome.binary;
    out << YAML::EndMap;
    out << YAML::Key << "treatments" << YAML::Value << YAML::Flow << doc.design.treatments();
    out << YAML::Key << "groups" << YAML::Value << YAML::BeginSeq;
    for (std::size_t g = 0; g < doc.design.num_groups(); ++g) {
        const auto& group = doc.design.groups()[g];
        out << YAML::BeginMap;
        out << YAML::Key << "label" << YAML::Value << group.label;
        out << YAML::Key << "probability" << YAML::Value << num(group.probability);
        out << YAML::Key << "sizes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (auto n : doc.design.sizes().row(g)) out << n;
        out << YAML::EndSeq;
        if (doc.means) {
            out << YAML::Key << "means" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double m : doc.means->means.row(g)) out << num(m);
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    if (doc.validity) out << YAML::Key << "kappa" << YAML::Value << num(doc.validity->kappa);
    if (doc.epsilon) out << YAML::Key << "epsilon" << YAML::Value << num(*doc.epsilon);
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace epsopt::cli
