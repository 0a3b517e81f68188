#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "dynroute/graph.hpp"
#include "dynroute/heuristics.hpp"

namespace dynroute {

enum class PlanStatus { Found, Unreachable };

struct PlanResult {
    std::vector<NodeId> path;
    std::vector<EdgeId> edges;  // edges[i] joins path[i] and path[i + 1]
    // Effective travel time plus the unweighted comfort and safety values of
    // every node entered after the start.
    double g_cost = 0.0;
    double travel_time_s = 0.0;
    double f_cost_at_goal = 0.0;
    std::size_t expanded = 0;
    std::vector<NodeId> expansion_order;
    PlanStatus status = PlanStatus::Unreachable;

    bool found() const { return status == PlanStatus::Found; }
    bool operator==(const PlanResult&) const = default;
};

struct RrtParams {
    std::size_t max_iterations = 2000;
    std::size_t step_edges = 3;
    double goal_bias = 0.1;

    bool operator==(const RrtParams&) const = default;
};

struct SearchParams {
    HeuristicWeights weights;
    std::uint64_t rng_seed = 0;
    RrtParams rrt;
    double hysteresis = 0.01;

    bool operator==(const SearchParams&) const = default;
};

/// Best-first search keyed by wg*g + w1*h1 + w2*h2 + w3*h3 over one frozen
/// snapshot. g accumulates effective travel time only; comfort and safety
/// shape the priority. Ties break on lower h1, then lower node index. Stale
/// open entries are skipped rather than decreased in place.
PlanResult dyn_a_star(const GraphSnapshot& snap, NodeId start, NodeId goal, const SearchParams& params);

/// Uniform-cost search on effective travel time, same tie-break.
PlanResult dijkstra_ucs(const GraphSnapshot& snap, NodeId start, NodeId goal);

/// Expands by lowest h1 only; parents are fixed at first discovery.
PlanResult greedy_best_first(const GraphSnapshot& snap, NodeId start, NodeId goal);

/// f = g + h1 with no comfort or safety terms.
PlanResult static_a_star(const GraphSnapshot& snap, NodeId start, NodeId goal);

/// Graph-restricted RRT. Samples node positions (the goal with probability
/// goal_bias), grows from the Euclidean-nearest tree node by up to step_edges
/// locally greedy hops. Deterministic for a given seed.
PlanResult rrt_plan(const GraphSnapshot& snap, NodeId start, NodeId goal, const SearchParams& params);

using Planner = std::function<PlanResult(const GraphSnapshot&, NodeId, NodeId, const SearchParams&)>;

/// wg * travel time + w2 * sum(h2) + w3 * sum(h3) over the nodes entered
/// along `edges`. Used to compare a fresh plan against a kept route.
double route_cost(const GraphSnapshot& snap, std::span<const EdgeId> edges, const HeuristicWeights& w);

/// Re-evaluates path costs of a route on a snapshot. nullopt when an edge is
/// blocked or the route is disconnected.
std::optional<PlanResult> recost_route(const GraphSnapshot& snap, std::span<const NodeId> path,
                                       std::span<const EdgeId> edges, const HeuristicWeights& w);

/// Plans afresh from `current` with `planner`; keeps the remaining prior
/// route unless the fresh one is cheaper by more than params.hysteresis
/// (relative, by route_cost).
PlanResult replan_with(const PlanResult& prior, const GraphSnapshot& now, NodeId current, NodeId goal,
                       const SearchParams& params, const Planner& planner);

/// replan_with using dyn_a_star.
PlanResult replan(const PlanResult& prior, const GraphSnapshot& now, NodeId current, NodeId goal,
                  const SearchParams& params);

enum class Algorithm { Ucs, Greedy, AStar, Rrt, DynAStar };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::Ucs, Algorithm::Greedy, Algorithm::AStar, Algorithm::Rrt,
                                               Algorithm::DynAStar};

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Whether the algorithm re-searches at every epoch (otherwise it keeps its
/// departure plan until an edge on it is blocked).
bool refreshes_each_epoch(Algorithm a);

/// Uniform entry point; non-weighted algorithms ignore params.weights.
PlanResult plan(Algorithm a, const GraphSnapshot& snap, NodeId start, NodeId goal, const SearchParams& params);

}  // namespace dynroute
