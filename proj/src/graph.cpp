#include "dynroute/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace dynroute {

namespace {

std::string fmt_num(double v) {
    std::string s = std::to_string(v);
    return s;
}

void check_factor(double f) {
    if (!std::isfinite(f) || f < 1.0)
        throw std::invalid_argument("congestion factor must be finite and >= 1, got " + fmt_num(f));
}

void check_penalty(double p) {
    if (!std::isfinite(p) || p < 0.0)
        throw std::invalid_argument("comfort penalty must be finite and >= 0, got " + fmt_num(p));
}

}  // namespace

// ---------------------------------------------------------------------------
// Topology

std::shared_ptr<const Topology> Topology::build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges) {
    std::shared_ptr<Topology> t(new Topology());
    t->nodes_ = std::move(nodes);
    t->edges_ = std::move(edges);

    for (std::size_t i = 0; i < t->nodes_.size(); ++i) {
        const auto& n = t->nodes_[i];
        if (n.id.empty()) throw std::invalid_argument("node " + std::to_string(i) + " has an empty id");
        if (!std::isfinite(n.x) || !std::isfinite(n.y))
            throw std::invalid_argument("node " + n.id + " has non-finite coordinates");
        if (!t->node_by_id_.emplace(n.id, node_at(i)).second)
            throw std::invalid_argument("duplicate node id " + n.id);
    }

    std::vector<std::size_t> degree(t->nodes_.size(), 0);
    for (std::size_t i = 0; i < t->edges_.size(); ++i) {
        const auto& e = t->edges_[i];
        if (e.id.empty()) throw std::invalid_argument("edge " + std::to_string(i) + " has an empty id");
        if (index(e.from) >= t->nodes_.size() || index(e.to) >= t->nodes_.size())
            throw UnknownIdError("edge " + e.id + " references a missing node");
        if (!std::isfinite(e.length_m) || e.length_m <= 0.0)
            throw std::invalid_argument("edge " + e.id + " length must be finite and > 0");
        if (!std::isfinite(e.base_time_s) || e.base_time_s <= 0.0)
            throw std::invalid_argument("edge " + e.id + " base travel time must be finite and > 0");
        if (!t->edge_by_id_.emplace(e.id, edge_at(i)).second)
            throw std::invalid_argument("duplicate edge id " + e.id);
        ++degree[index(e.from)];
        t->max_speed_ = std::max(t->max_speed_, e.length_m / e.base_time_s);
    }

    // CSR adjacency; edges are visited in index order so each row is ascending.
    t->adjacency_offsets_.assign(t->nodes_.size() + 1, 0);
    for (std::size_t i = 0; i < degree.size(); ++i) t->adjacency_offsets_[i + 1] = t->adjacency_offsets_[i] + degree[i];
    t->adjacency_.resize(t->edges_.size());
    std::vector<std::size_t> fill(t->adjacency_offsets_.begin(), t->adjacency_offsets_.end() - 1);
    for (std::size_t i = 0; i < t->edges_.size(); ++i)
        t->adjacency_[fill[index(t->edges_[i].from)]++] = edge_at(i);

    return t;
}

const NodeRecord& Topology::node(NodeId n) const {
    check(n);
    return nodes_[index(n)];
}

const EdgeRecord& Topology::edge(EdgeId e) const {
    check(e);
    return edges_[index(e)];
}

std::span<const EdgeId> Topology::out_edges(NodeId n) const {
    check(n);
    const auto begin = adjacency_offsets_[index(n)];
    const auto end = adjacency_offsets_[index(n) + 1];
    return std::span<const EdgeId>(adjacency_).subspan(begin, end - begin);
}

std::optional<NodeId> Topology::find_node(std::string_view id) const {
    auto it = node_by_id_.find(std::string(id));
    if (it == node_by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<EdgeId> Topology::find_edge(std::string_view id) const {
    auto it = edge_by_id_.find(std::string(id));
    if (it == edge_by_id_.end()) return std::nullopt;
    return it->second;
}

NodeId Topology::node_id(std::string_view id) const {
    if (auto n = find_node(id)) return *n;
    throw UnknownIdError("unknown node " + std::string(id));
}

EdgeId Topology::edge_id(std::string_view id) const {
    if (auto e = find_edge(id)) return *e;
    throw UnknownIdError("unknown edge " + std::string(id));
}

void Topology::check(NodeId n) const {
    if (index(n) >= nodes_.size()) throw UnknownIdError("node index " + std::to_string(index(n)) + " out of range");
}

void Topology::check(EdgeId e) const {
    if (index(e) >= edges_.size()) throw UnknownIdError("edge index " + std::to_string(index(e)) + " out of range");
}

// ---------------------------------------------------------------------------
// RoadGraph

RoadGraph::RoadGraph(std::shared_ptr<const Topology> topology)
    : topology_(std::move(topology)), conditions_(topology_->edge_count()) {}

const EdgeCondition& RoadGraph::condition(EdgeId e) const {
    topology_->check(e);
    return conditions_[index(e)];
}

void RoadGraph::set_condition(EdgeId e, EdgeCondition c) {
    topology_->check(e);
    check_factor(c.congestion_factor);
    check_penalty(c.comfort_penalty);
    conditions_[index(e)] = c;
}

bool operator==(const RoadGraph& a, const RoadGraph& b) {
    if (a.topology_ != b.topology_) {
        if (!a.topology_ || !b.topology_) return false;
        const auto& ta = *a.topology_;
        const auto& tb = *b.topology_;
        if (!std::ranges::equal(ta.nodes(), tb.nodes()) || !std::ranges::equal(ta.edges(), tb.edges())) return false;
    }
    return a.conditions_ == b.conditions_;
}

RoadGraph build_graph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges) {
    return RoadGraph(Topology::build(std::move(nodes), std::move(edges)));
}

RoadGraph make_grid(std::size_t rows, std::size_t cols, double edge_length_m, double speed_mps) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("grid dimensions must be >= 1");
    if (!(edge_length_m > 0.0) || !(speed_mps > 0.0) || !std::isfinite(edge_length_m) || !std::isfinite(speed_mps))
        throw std::invalid_argument("grid edge length and speed must be finite and > 0");

    std::vector<NodeRecord> nodes;
    nodes.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            nodes.push_back({"n" + std::to_string(r * cols + c), static_cast<double>(c) * edge_length_m,
                             static_cast<double>(r) * edge_length_m});

    const double base_time = edge_length_m / speed_mps;
    std::vector<EdgeRecord> edges;
    auto link = [&](std::size_t a, std::size_t b) {
        edges.push_back({"e" + std::to_string(edges.size()), node_at(a), node_at(b), edge_length_m, base_time});
    };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t k = r * cols + c;
            if (c + 1 < cols) link(k, k + 1);
            if (c > 0) link(k, k - 1);
            if (r + 1 < rows) link(k, k + cols);
            if (r > 0) link(k, k - cols);
        }
    }
    return build_graph(std::move(nodes), std::move(edges));
}

// ---------------------------------------------------------------------------
// Events

std::string_view event_kind_name(const EventAction& action) {
    struct Namer {
        std::string_view operator()(const SetCongestion&) const { return "set_congestion"; }
        std::string_view operator()(const SetComfort&) const { return "set_comfort"; }
        std::string_view operator()(const SetNodeComfort&) const { return "set_node_comfort_h"; }
        std::string_view operator()(const BlockEdge&) const { return "block_edge"; }
        std::string_view operator()(const UnblockEdge&) const { return "unblock_edge"; }
    };
    return std::visit(Namer{}, action);
}

void apply_event(RoadGraph& graph, HeuristicField& field, const Event& ev) {
    if (!std::isfinite(ev.at_time_s) || ev.at_time_s < 0.0)
        throw std::invalid_argument("event time must be finite and >= 0");

    struct Apply {
        RoadGraph& graph;
        HeuristicField& field;

        void operator()(const SetCongestion& a) const {
            auto c = graph.condition(a.edge);
            c.congestion_factor = a.factor;
            graph.set_condition(a.edge, c);
        }
        void operator()(const SetComfort& a) const {
            auto c = graph.condition(a.edge);
            c.comfort_penalty = a.penalty;
            graph.set_condition(a.edge, c);
        }
        void operator()(const SetNodeComfort& a) const {
            graph.topology().check(a.node);
            field.set_comfort(a.node, a.value);
        }
        void operator()(const BlockEdge& a) const {
            auto c = graph.condition(a.edge);
            c.blocked = true;
            graph.set_condition(a.edge, c);
        }
        void operator()(const UnblockEdge& a) const {
            auto c = graph.condition(a.edge);
            c.blocked = false;
            graph.set_condition(a.edge, c);
        }
    };
    std::visit(Apply{graph, field}, ev.action);
}

// ---------------------------------------------------------------------------
// Snapshots

GraphSnapshot::GraphSnapshot(const RoadGraph& graph, const HeuristicField& field, double time_s)
    : topology_(graph.topology_ptr()),
      conditions_(graph.conditions().begin(), graph.conditions().end()),
      field_(field),
      time_s_(time_s) {
    if (field_.size() != topology_->node_count())
        throw std::invalid_argument("heuristic field does not match the graph's node count");
}

const EdgeCondition& GraphSnapshot::condition(EdgeId e) const {
    topology_->check(e);
    return conditions_[index(e)];
}

double GraphSnapshot::effective_time(EdgeId e) const {
    return topology_->edge(e).base_time_s * conditions_[index(e)].congestion_factor;
}

bool operator==(const GraphSnapshot& a, const GraphSnapshot& b) {
    return a.topology_ == b.topology_ && a.conditions_ == b.conditions_ && a.field_ == b.field_ &&
           a.time_s_ == b.time_s_;
}

GraphSnapshot snapshot(const RoadGraph& graph, const HeuristicField& field, double time_s) {
    return GraphSnapshot(graph, field, time_s);
}

std::vector<Neighbor> neighbors(const GraphSnapshot& snap, NodeId n) {
    const auto& topo = snap.topology();
    std::vector<Neighbor> out;
    for (EdgeId e : topo.out_edges(n)) {
        const auto& c = snap.condition(e);
        if (c.blocked) continue;
        out.push_back({topo.edge(e).to, e, topo.edge(e).base_time_s * c.congestion_factor});
    }
    return out;
}

bool natural_less(std::string_view a, std::string_view b) {
    auto is_digit = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && is_digit(a[ie])) ++ie;
            while (je < b.size() && is_digit(b[je])) ++je;
            auto da = a.substr(i, ie - i);
            auto db = b.substr(j, je - j);
            while (da.size() > 1 && da.front() == '0') da.remove_prefix(1);
            while (db.size() > 1 && db.front() == '0') db.remove_prefix(1);
            if (da.size() != db.size()) return da.size() < db.size();
            if (da != db) return da < db;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
    return a < b;
}

}  // namespace dynroute
