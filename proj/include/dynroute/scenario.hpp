#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynroute/graph.hpp"
#include "dynroute/heuristics.hpp"

namespace dynroute {

struct Query {
    std::string vehicle;
    NodeId start{};
    NodeId goal{};
    double depart_s = 0.0;
    HeuristicWeights weights;
    ContextFlags context;

    /// Weights after the context rule table.
    HeuristicWeights effective_weights() const { return adapt_weights(weights, context); }

    bool operator==(const Query&) const = default;
};

struct ScenarioMeta {
    std::string name;
    std::uint64_t seed = 0;

    bool operator==(const ScenarioMeta&) const = default;
};

/// Graph, initial heuristic field, time-ordered events and routing queries.
/// The smoothing alpha travels in the field.
struct Scenario {
    RoadGraph graph;
    HeuristicField initial_field;
    std::vector<Event> events;
    std::vector<Query> queries;
    ScenarioMeta meta;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Load failure. `element` names the offending id or key; `line` is 1-based
/// (0 when unknown).
class ScenarioError : public std::runtime_error {
public:
    enum class Kind { Parse, Validation };

    ScenarioError(Kind kind, std::string element, std::size_t line, const std::string& message);

    Kind kind() const { return kind_; }
    const std::string& element() const { return element_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::string element_;
    std::size_t line_;
};

/// Parses and validates a JSON scenario document. Nodes and edges are
/// re-indexed in natural id order.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Canonical JSON: sorted keys, ids in natural order, two-space indent.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace dynroute
