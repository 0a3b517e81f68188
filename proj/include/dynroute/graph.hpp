#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dynroute/heuristic_field.hpp"
#include "dynroute/types.hpp"

namespace dynroute {

struct NodeRecord {
    std::string id;
    double x = 0.0;  // meters
    double y = 0.0;

    bool operator==(const NodeRecord&) const = default;
};

struct EdgeRecord {
    std::string id;
    NodeId from{};
    NodeId to{};
    double length_m = 0.0;
    double base_time_s = 0.0;

    bool operator==(const EdgeRecord&) const = default;
};

/// Mutable per-edge overlay. A blocked edge keeps its congestion factor so
/// that unblocking restores the pre-block value.
struct EdgeCondition {
    double congestion_factor = 1.0;
    double comfort_penalty = 0.0;
    bool blocked = false;

    bool operator==(const EdgeCondition&) const = default;
};

/// Immutable network structure: nodes, edges and sorted adjacency.
class Topology {
public:
    /// Validates ids, references and edge magnitudes. Node and edge indices
    /// follow the order of the input vectors.
    static std::shared_ptr<const Topology> build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::span<const NodeRecord> nodes() const { return nodes_; }
    std::span<const EdgeRecord> edges() const { return edges_; }
    const NodeRecord& node(NodeId n) const;
    const EdgeRecord& edge(EdgeId e) const;

    /// Outgoing edges of n in ascending edge index.
    std::span<const EdgeId> out_edges(NodeId n) const;

    std::optional<NodeId> find_node(std::string_view id) const;
    std::optional<EdgeId> find_edge(std::string_view id) const;
    NodeId node_id(std::string_view id) const;
    EdgeId edge_id(std::string_view id) const;

    /// Network-wide free-flow speed bound, max(length / base_time).
    double max_speed() const { return max_speed_; }

    void check(NodeId n) const;
    void check(EdgeId e) const;

private:
    Topology() = default;

    std::vector<NodeRecord> nodes_;
    std::vector<EdgeRecord> edges_;
    std::vector<std::size_t> adjacency_offsets_;
    std::vector<EdgeId> adjacency_;
    std::unordered_map<std::string, NodeId> node_by_id_;
    std::unordered_map<std::string, EdgeId> edge_by_id_;
    double max_speed_ = 0.0;
};

/// Road network with its dynamic-condition overlay. Single writer.
class RoadGraph {
public:
    RoadGraph() = default;
    explicit RoadGraph(std::shared_ptr<const Topology> topology);

    const Topology& topology() const { return *topology_; }
    const std::shared_ptr<const Topology>& topology_ptr() const { return topology_; }

    const EdgeCondition& condition(EdgeId e) const;
    std::span<const EdgeCondition> conditions() const { return conditions_; }

    /// Replaces the overlay of one edge after checking factor >= 1 and penalty >= 0.
    void set_condition(EdgeId e, EdgeCondition c);

    friend bool operator==(const RoadGraph& a, const RoadGraph& b);

private:
    std::shared_ptr<const Topology> topology_;
    std::vector<EdgeCondition> conditions_;
};

/// Builds a graph from records, validating the topology.
RoadGraph build_graph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

/// 4-connected lattice with ids n<k> (row-major) and e<k>.
RoadGraph make_grid(std::size_t rows, std::size_t cols, double edge_length_m, double speed_mps);

// ---------------------------------------------------------------------------
// Events

struct SetCongestion {
    EdgeId edge;
    double factor;
    bool operator==(const SetCongestion&) const = default;
};
struct SetComfort {
    EdgeId edge;
    double penalty;
    bool operator==(const SetComfort&) const = default;
};
struct SetNodeComfort {
    NodeId node;
    double value;
    bool operator==(const SetNodeComfort&) const = default;
};
struct BlockEdge {
    EdgeId edge;
    bool operator==(const BlockEdge&) const = default;
};
struct UnblockEdge {
    EdgeId edge;
    bool operator==(const UnblockEdge&) const = default;
};

using EventAction = std::variant<SetCongestion, SetComfort, SetNodeComfort, BlockEdge, UnblockEdge>;

struct Event {
    double at_time_s = 0.0;
    EventAction action;

    bool operator==(const Event&) const = default;
};

/// Wire name of an event kind ("set_congestion", ...).
std::string_view event_kind_name(const EventAction& action);

/// Applies one event. Exactly the targeted attribute changes; h3 is never
/// touched. Throws UnknownIdError or std::invalid_argument.
void apply_event(RoadGraph& graph, HeuristicField& field, const Event& ev);

// ---------------------------------------------------------------------------
// Snapshots

/// Frozen copy of the overlay and heuristic field at one simulation time.
class GraphSnapshot {
public:
    GraphSnapshot(const RoadGraph& graph, const HeuristicField& field, double time_s);

    const Topology& topology() const { return *topology_; }
    double time_s() const { return time_s_; }
    const EdgeCondition& condition(EdgeId e) const;
    const HeuristicField& field() const { return field_; }
    double comfort(NodeId n) const { return field_.comfort(n); }
    double safety(NodeId n) const { return field_.safety(n); }

    /// base_time_s x congestion_factor.
    double effective_time(EdgeId e) const;

    friend bool operator==(const GraphSnapshot& a, const GraphSnapshot& b);

private:
    std::shared_ptr<const Topology> topology_;
    std::vector<EdgeCondition> conditions_;
    HeuristicField field_;
    double time_s_;
};

GraphSnapshot snapshot(const RoadGraph& graph, const HeuristicField& field, double time_s);

struct Neighbor {
    NodeId node;
    EdgeId edge;
    double travel_time_s;

    bool operator==(const Neighbor&) const = default;
};

/// Unblocked successors of n in ascending edge index.
std::vector<Neighbor> neighbors(const GraphSnapshot& snap, NodeId n);

/// Ordering for ids: digit runs compare numerically, so "e2" < "e10".
bool natural_less(std::string_view a, std::string_view b);

}  // namespace dynroute
