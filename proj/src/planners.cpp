#include "dynroute/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <tuple>

namespace dynroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct OpenEntry {
    double f;
    double h1;
    std::uint32_t node;
    double g;

    // Min-heap on (f, h1, node).
    bool operator>(const OpenEntry& o) const { return std::tie(f, h1, node) > std::tie(o.f, o.h1, o.node); }
};

double penalties_along(const GraphSnapshot& snap, std::span<const NodeId> path, double travel) {
    double cost = travel;
    for (std::size_t i = 1; i < path.size(); ++i) cost += snap.comfort(path[i]) + snap.safety(path[i]);
    return cost;
}

PlanResult trivial_plan(NodeId start, double f) {
    PlanResult r;
    r.path = {start};
    r.status = PlanStatus::Found;
    r.expanded = 1;
    r.expansion_order = {start};
    r.f_cost_at_goal = f;
    return r;
}

// Shared open/closed-set search. `key(g, node, h1)` gives the priority.
// With `relax` false a node's parent is fixed when it is first discovered.
template <class Key>
PlanResult best_first(const GraphSnapshot& snap, NodeId start, NodeId goal, Key key, bool relax) {
    const auto& topo = snap.topology();
    topo.check(start);
    topo.check(goal);
    const std::size_t n = topo.node_count();

    std::vector<double> g(n, kInf);
    std::vector<double> h1(n, -1.0);
    std::vector<char> closed(n, 0);
    std::vector<EdgeId> parent(n, kNoEdge);
    auto h1_of = [&](NodeId v) {
        double& h = h1[index(v)];
        if (h < 0.0) h = time_heuristic(topo, v, goal);
        return h;
    };

    PlanResult result;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    g[index(start)] = 0.0;
    open.push({key(0.0, start, h1_of(start)), h1_of(start), static_cast<std::uint32_t>(start), 0.0});

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        const NodeId u{top.node};
        if (closed[index(u)] || top.g != g[index(u)]) continue;  // stale
        closed[index(u)] = 1;
        ++result.expanded;
        result.expansion_order.push_back(u);

        if (u == goal) {
            for (NodeId v = goal; v != start;) {
                const EdgeId e = parent[index(v)];
                result.edges.push_back(e);
                result.path.push_back(v);
                v = topo.edge(e).from;
            }
            result.path.push_back(start);
            std::ranges::reverse(result.path);
            std::ranges::reverse(result.edges);
            result.travel_time_s = g[index(goal)];
            result.g_cost = penalties_along(snap, result.path, result.travel_time_s);
            result.f_cost_at_goal = top.f;
            result.status = PlanStatus::Found;
            return result;
        }

        for (const auto& nb : neighbors(snap, u)) {
            const std::size_t v = index(nb.node);
            if (closed[v]) continue;
            const double tentative = g[index(u)] + nb.travel_time_s;
            const bool discovered = g[v] != kInf;
            if (discovered && (!relax || !(tentative < g[v]))) continue;
            g[v] = tentative;
            parent[v] = nb.edge;
            const double h = h1_of(nb.node);
            open.push({key(tentative, nb.node, h), h, static_cast<std::uint32_t>(v), tentative});
        }
    }
    result.status = PlanStatus::Unreachable;
    return result;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double distance(const Topology& topo, NodeId a, NodeId b) {
    const auto& p = topo.node(a);
    const auto& q = topo.node(b);
    return std::hypot(q.x - p.x, q.y - p.y);
}

}  // namespace

PlanResult dyn_a_star(const GraphSnapshot& snap, NodeId start, NodeId goal, const SearchParams& params) {
    params.weights.validate();
    const auto& w = params.weights;
    return best_first(
        snap, start, goal,
        [&](double g, NodeId v, double h1) { return combined_f(g, h1, snap.comfort(v), snap.safety(v), w); }, true);
}

PlanResult dijkstra_ucs(const GraphSnapshot& snap, NodeId start, NodeId goal) {
    return best_first(snap, start, goal, [](double g, NodeId, double) { return g; }, true);
}

PlanResult greedy_best_first(const GraphSnapshot& snap, NodeId start, NodeId goal) {
    return best_first(snap, start, goal, [](double, NodeId, double h1) { return h1; }, false);
}

PlanResult static_a_star(const GraphSnapshot& snap, NodeId start, NodeId goal) {
    return best_first(snap, start, goal, [](double g, NodeId, double h1) { return g + h1; }, true);
}

PlanResult rrt_plan(const GraphSnapshot& snap, NodeId start, NodeId goal, const SearchParams& params) {
    const auto& topo = snap.topology();
    topo.check(start);
    topo.check(goal);
    const auto& rp = params.rrt;
    if (rp.max_iterations == 0) throw std::invalid_argument("RRT needs max_iterations > 0");
    if (rp.step_edges == 0) throw std::invalid_argument("RRT needs step_edges > 0");
    if (!(rp.goal_bias >= 0.0 && rp.goal_bias <= 1.0)) throw std::invalid_argument("RRT goal_bias must lie in [0, 1]");

    if (start == goal) return trivial_plan(start, combined_f(0.0, 0.0, snap.comfort(goal), snap.safety(goal), params.weights));

    const std::size_t n = topo.node_count();
    std::mt19937_64 rng(params.rng_seed);
    std::vector<char> in_tree(n, 0);
    std::vector<EdgeId> parent(n, kNoEdge);
    std::vector<NodeId> members{start};
    in_tree[index(start)] = 1;

    PlanResult result;
    result.expanded = 1;
    result.expansion_order.push_back(start);

    for (std::size_t it = 0; it < rp.max_iterations; ++it) {
        const bool toward_goal = uniform01(rng) < rp.goal_bias;
        const NodeId sample = toward_goal ? goal : node_at(static_cast<std::size_t>(rng() % n));

        NodeId cur = members.front();
        double best = distance(topo, cur, sample);
        for (NodeId m : members) {
            const double d = distance(topo, m, sample);
            if (d < best || (d == best && m < cur)) {
                best = d;
                cur = m;
            }
        }

        for (std::size_t hop = 0; hop < rp.step_edges && cur != sample; ++hop) {
            std::optional<Neighbor> pick;
            double pick_d = 0.0;
            for (const auto& nb : neighbors(snap, cur)) {
                if (in_tree[index(nb.node)]) continue;
                const double d = distance(topo, nb.node, sample);
                if (!pick || d < pick_d) {
                    pick = nb;
                    pick_d = d;
                }
            }
            if (!pick) break;
            in_tree[index(pick->node)] = 1;
            parent[index(pick->node)] = pick->edge;
            members.push_back(pick->node);
            ++result.expanded;
            result.expansion_order.push_back(pick->node);
            cur = pick->node;

            if (cur == goal) {
                for (NodeId v = goal; v != start;) {
                    const EdgeId e = parent[index(v)];
                    result.edges.push_back(e);
                    result.path.push_back(v);
                    v = topo.edge(e).from;
                }
                result.path.push_back(start);
                std::ranges::reverse(result.path);
                std::ranges::reverse(result.edges);
                double travel = 0.0;
                for (EdgeId e : result.edges) travel += snap.effective_time(e);
                result.travel_time_s = travel;
                result.g_cost = penalties_along(snap, result.path, travel);
                result.f_cost_at_goal =
                    combined_f(travel, 0.0, snap.comfort(goal), snap.safety(goal), params.weights);
                result.status = PlanStatus::Found;
                return result;
            }
        }
    }
    result.status = PlanStatus::Unreachable;
    return result;
}

double route_cost(const GraphSnapshot& snap, std::span<const EdgeId> edges, const HeuristicWeights& w) {
    const auto& topo = snap.topology();
    double travel = 0.0, comfort = 0.0, safety = 0.0;
    for (EdgeId e : edges) {
        const NodeId head = topo.edge(e).to;
        travel += snap.effective_time(e);
        comfort += snap.comfort(head);
        safety += snap.safety(head);
    }
    return w.wg * travel + w.w2 * comfort + w.w3 * safety;
}

std::optional<PlanResult> recost_route(const GraphSnapshot& snap, std::span<const NodeId> path,
                                       std::span<const EdgeId> edges, const HeuristicWeights& w) {
    const auto& topo = snap.topology();
    if (path.empty() || edges.size() + 1 != path.size()) return std::nullopt;
    double travel = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& rec = topo.edge(edges[i]);
        if (rec.from != path[i] || rec.to != path[i + 1] || snap.condition(edges[i]).blocked) return std::nullopt;
        travel += snap.effective_time(edges[i]);
    }
    PlanResult r;
    r.path.assign(path.begin(), path.end());
    r.edges.assign(edges.begin(), edges.end());
    r.travel_time_s = travel;
    r.g_cost = penalties_along(snap, r.path, travel);
    r.f_cost_at_goal = combined_f(travel, 0.0, snap.comfort(path.back()), snap.safety(path.back()), w);
    r.status = PlanStatus::Found;
    return r;
}

PlanResult replan_with(const PlanResult& prior, const GraphSnapshot& now, NodeId current, NodeId goal,
                       const SearchParams& params, const Planner& planner) {
    PlanResult fresh = planner(now, current, goal, params);
    if (current == goal || !prior.found()) return fresh;

    auto it = std::ranges::find(prior.path, current);
    if (it == prior.path.end() || prior.path.back() != goal) return fresh;
    const auto k = static_cast<std::size_t>(it - prior.path.begin());
    auto kept = recost_route(now, std::span(prior.path).subspan(k), std::span(prior.edges).subspan(k), params.weights);
    if (!kept) return fresh;

    if (fresh.found()) {
        const double fresh_cost = route_cost(now, fresh.edges, params.weights);
        const double kept_cost = route_cost(now, kept->edges, params.weights);
        if (fresh_cost < kept_cost * (1.0 - params.hysteresis)) return fresh;
    }
    kept->expanded = fresh.expanded;
    kept->expansion_order = std::move(fresh.expansion_order);
    return *kept;
}

PlanResult replan(const PlanResult& prior, const GraphSnapshot& now, NodeId current, NodeId goal,
                  const SearchParams& params) {
    return replan_with(prior, now, current, goal, params, dyn_a_star);
}

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Ucs: return "ucs";
        case Algorithm::Greedy: return "greedy";
        case Algorithm::AStar: return "astar";
        case Algorithm::Rrt: return "rrt";
        case Algorithm::DynAStar: return "dyn_astar";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (Algorithm a : kAllAlgorithms)
        if (algorithm_name(a) == name) return a;
    return std::nullopt;
}

bool refreshes_each_epoch(Algorithm a) { return a == Algorithm::Rrt || a == Algorithm::DynAStar; }

PlanResult plan(Algorithm a, const GraphSnapshot& snap, NodeId start, NodeId goal, const SearchParams& params) {
    switch (a) {
        case Algorithm::Ucs: return dijkstra_ucs(snap, start, goal);
        case Algorithm::Greedy: return greedy_best_first(snap, start, goal);
        case Algorithm::AStar: return static_a_star(snap, start, goal);
        case Algorithm::Rrt: return rrt_plan(snap, start, goal, params);
        case Algorithm::DynAStar: return dyn_a_star(snap, start, goal, params);
    }
    throw std::invalid_argument("unknown algorithm");
}

}  // namespace dynroute
