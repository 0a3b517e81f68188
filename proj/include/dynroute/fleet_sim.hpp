#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dynroute/planners.hpp"
#include "dynroute/scenario.hpp"

namespace dynroute {

struct SimConfig {
    double epoch_s = 30.0;
    std::optional<double> alpha;  // overrides the scenario's smoothing alpha
    double hysteresis = 0.01;
    Algorithm algorithm = Algorithm::DynAStar;
    std::uint64_t seed = 0;
    bool share_observations = true;
    double observation_noise_sigma = 0.0;
    std::size_t max_epochs = 2880;
    RrtParams rrt;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

enum class VehicleStatus { Pending, EnRoute, Arrived, Stranded };

std::string_view vehicle_status_name(VehicleStatus s);

struct VehicleState {
    std::string id;
    std::size_t query = 0;
    NodeId current_node{};
    NodeId goal{};
    PlanResult plan;            // remaining route; plan.path[next_edge] is the next free node
    std::size_t next_edge = 0;  // cursor into plan.edges

    std::optional<EdgeId> edge;  // edge in progress
    double edge_entry_s = 0.0;
    double edge_exit_s = 0.0;
    double edge_time_s = 0.0;
    double edge_comfort = 0.0;
    double position_on_edge = 0.0;

    double clock_s = 0.0;
    double realized_cost = 0.0;
    VehicleStatus status = VehicleStatus::Pending;
    std::size_t replans = 0;
    std::size_t route_changes = 0;
    std::size_t expanded = 0;
    std::vector<NodeId> path_taken;
    std::vector<EdgeId> edges_taken;
    std::optional<double> arrival_s;

    bool operator==(const VehicleState&) const = default;
};

struct EpochRecord {
    std::size_t index = 0;
    double boundary_s = 0.0;
    std::vector<std::size_t> events_applied;  // indices into the scenario's event list
    std::size_t observations_ingested = 0;
    std::vector<std::string> planned;  // vehicles that searched at this boundary

    bool operator==(const EpochRecord&) const = default;
};

/// Complete simulation state between epochs.
///
/// `truth` is the physical overlay (scenario events only) that realized
/// costs are charged against. `store`/`store_field` is the shared V2N store:
/// events plus ingested observations. Planners only ever see snapshots of the
/// store.
struct World {
    std::shared_ptr<const Scenario> scenario;
    SimConfig config;
    RoadGraph truth;
    HeuristicField truth_field;
    RoadGraph store;
    HeuristicField store_field;
    std::vector<Observation> pending;
    std::size_t next_event = 0;
    std::size_t epoch = 0;
    std::vector<VehicleState> vehicles;
    std::vector<EpochRecord> ledger;
    std::mt19937_64 rng;

    friend bool operator==(const World&, const World&) = default;
};

struct TraversalOutcome {
    double travel_time_s = 0.0;
    double comfort_penalty = 0.0;
    double completed_at_s = 0.0;
};

struct VehicleTrace {
    std::string id;
    VehicleStatus status = VehicleStatus::Pending;
    double realized_cost = 0.0;
    std::optional<double> arrival_s;
    std::size_t replans = 0;
    std::size_t route_changes = 0;
    std::size_t expanded = 0;
    std::vector<std::string> path;
    std::vector<std::string> edges;

    bool operator==(const VehicleTrace&) const = default;
};

struct SimulationTrace {
    std::string scenario_name;
    std::uint64_t seed = 0;
    SimConfig config;
    std::vector<VehicleTrace> vehicles;
    std::vector<EpochRecord> epochs;

    bool operator==(const SimulationTrace&) const = default;
};

/// Cost charged when a vehicle enters an edge: travel time, the edge's
/// comfort penalty and the safety value of the node it leads to.
inline double traversal_cost(double travel_time_s, double comfort_penalty, double safety) {
    return travel_time_s + comfort_penalty + safety;
}

/// Epoch k such that k*epoch_s <= t < (k+1)*epoch_s.
std::size_t epoch_of(double t, double epoch_s);

/// Ground-truth edge conditions per epoch, rebuilt from the event list alone.
class TruthTimeline {
public:
    TruthTimeline(const Scenario& scenario, double epoch_s);

    const std::vector<EdgeCondition>& conditions_at(double t) const;
    /// First epoch from which conditions never change again.
    std::size_t last_change_epoch() const { return changes_.back().first; }
    double epoch_s() const { return epoch_s_; }

private:
    double epoch_s_;
    std::vector<std::pair<std::size_t, std::vector<EdgeCondition>>> changes_;
};

struct ReplayResult {
    bool completed = false;
    double realized_cost = 0.0;
    double arrival_s = 0.0;
};

/// Re-drives a recorded edge sequence for one query against the truth
/// timeline; stops early if an edge is blocked when entered.
ReplayResult replay_route(const Scenario& scenario, std::size_t query, std::span<const EdgeId> edges, double epoch_s);

World make_world(std::shared_ptr<const Scenario> scenario, const SimConfig& config);

/// True when every vehicle has Arrived or is Stranded.
bool quiescent(const World& world);

/// One epoch: apply due events, ingest queued observations, snapshot the
/// store, plan for each en-route vehicle, then advance everyone by epoch_s.
/// A quiescent world is left untouched.
void step_epoch(World& world);

Observation collect_observation(const VehicleState& vehicle, EdgeId edge, const TraversalOutcome& outcome);

SimulationTrace make_trace(const World& world);

SimulationTrace run_simulation(const Scenario& scenario, const SimConfig& config);

/// JSON trace document (sorted keys).
std::string trace_json(const SimulationTrace& trace);

/// vehicle,status,realized_cost_s,arrival_s,replans,path
std::string trace_csv(const SimulationTrace& trace);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace dynroute
