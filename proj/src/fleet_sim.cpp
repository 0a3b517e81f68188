#include "dynroute/fleet_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dynroute {

using json = nlohmann::json;

void SimConfig::validate() const {
    if (!std::isfinite(epoch_s) || epoch_s <= 0.0) throw std::invalid_argument("epoch_s must be finite and > 0");
    if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (!std::isfinite(hysteresis) || hysteresis < 0.0 || hysteresis >= 1.0)
        throw std::invalid_argument("hysteresis must lie in [0, 1)");
    if (!std::isfinite(observation_noise_sigma) || observation_noise_sigma < 0.0)
        throw std::invalid_argument("observation noise sigma must be finite and >= 0");
    if (max_epochs == 0) throw std::invalid_argument("max_epochs must be > 0");
    if (rrt.max_iterations == 0 || rrt.step_edges == 0 || !(rrt.goal_bias >= 0.0 && rrt.goal_bias <= 1.0))
        throw std::invalid_argument("invalid RRT parameters");
}

std::string_view vehicle_status_name(VehicleStatus s) {
    switch (s) {
        case VehicleStatus::Pending: return "Pending";
        case VehicleStatus::EnRoute: return "EnRoute";
        case VehicleStatus::Arrived: return "Arrived";
        case VehicleStatus::Stranded: return "Stranded";
    }
    return "Unknown";
}

std::size_t epoch_of(double t, double epoch_s) {
    if (!(t >= 0.0)) return 0;
    auto k = static_cast<std::size_t>(std::floor(t / epoch_s));
    while (static_cast<double>(k + 1) * epoch_s <= t) ++k;
    while (k > 0 && static_cast<double>(k) * epoch_s > t) --k;
    return k;
}

// ---------------------------------------------------------------------------
// Truth timeline and replay

TruthTimeline::TruthTimeline(const Scenario& scenario, double epoch_s) : epoch_s_(epoch_s) {
    RoadGraph graph = scenario.graph;
    HeuristicField field = scenario.initial_field;
    const auto& events = scenario.events;
    std::size_t next = 0;
    // Boundary k applies every event with at_time <= k*epoch_s.
    auto apply_due = [&](std::size_t k) {
        bool changed = false;
        while (next < events.size() && events[next].at_time_s <= static_cast<double>(k) * epoch_s) {
            apply_event(graph, field, events[next++]);
            changed = true;
        }
        return changed;
    };
    apply_due(0);
    changes_.emplace_back(0, std::vector<EdgeCondition>(graph.conditions().begin(), graph.conditions().end()));
    while (next < events.size()) {
        const std::size_t k = std::max<std::size_t>(1, epoch_of(events[next].at_time_s, epoch_s));
        // at_time may sit strictly inside epoch k-1..k; find the first boundary that covers it.
        std::size_t boundary = k;
        while (static_cast<double>(boundary) * epoch_s < events[next].at_time_s) ++boundary;
        apply_due(boundary);
        changes_.emplace_back(boundary, std::vector<EdgeCondition>(graph.conditions().begin(), graph.conditions().end()));
    }
}

const std::vector<EdgeCondition>& TruthTimeline::conditions_at(double t) const {
    const std::size_t k = epoch_of(t, epoch_s_);
    auto it = std::ranges::upper_bound(changes_, k, {}, &std::pair<std::size_t, std::vector<EdgeCondition>>::first);
    return std::prev(it)->second;
}

ReplayResult replay_route(const Scenario& scenario, std::size_t query, std::span<const EdgeId> edges, double epoch_s) {
    const auto& q = scenario.queries.at(query);
    const auto& topo = scenario.graph.topology();
    const TruthTimeline timeline(scenario, epoch_s);
    ReplayResult r;
    double clock = q.depart_s;
    NodeId at = q.start;
    for (EdgeId e : edges) {
        const auto& rec = topo.edge(e);
        if (rec.from != at) return r;
        const auto& cond = timeline.conditions_at(clock)[index(e)];
        if (cond.blocked) return r;
        const double time = rec.base_time_s * cond.congestion_factor;
        r.realized_cost += traversal_cost(time, cond.comfort_penalty, scenario.initial_field.safety(rec.to));
        clock += time;
        at = rec.to;
    }
    r.completed = at == q.goal;
    r.arrival_s = clock;
    return r;
}

// ---------------------------------------------------------------------------
// World

World make_world(std::shared_ptr<const Scenario> scenario, const SimConfig& config) {
    config.validate();
    World w;
    w.scenario = std::move(scenario);
    w.config = config;
    w.truth = w.scenario->graph;
    w.truth_field = w.scenario->initial_field;
    w.store = w.scenario->graph;
    w.store_field = w.scenario->initial_field;
    if (config.alpha) w.store_field.set_smoothing_alpha(*config.alpha);
    w.rng.seed(config.seed);
    for (std::size_t i = 0; i < w.scenario->queries.size(); ++i) {
        const auto& q = w.scenario->queries[i];
        VehicleState v;
        v.id = q.vehicle;
        v.query = i;
        v.current_node = q.start;
        v.goal = q.goal;
        v.clock_s = q.depart_s;
        w.vehicles.push_back(std::move(v));
    }
    return w;
}

bool quiescent(const World& world) {
    return std::ranges::all_of(world.vehicles, [](const VehicleState& v) {
        return v.status == VehicleStatus::Arrived || v.status == VehicleStatus::Stranded;
    });
}

Observation collect_observation(const VehicleState& vehicle, EdgeId edge, const TraversalOutcome& outcome) {
    return Observation{edge, outcome.travel_time_s, outcome.comfort_penalty, vehicle.id, outcome.completed_at_s};
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a simple combination
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

PlanResult remaining_plan(const VehicleState& v) {
    PlanResult r = v.plan;
    r.path.erase(r.path.begin(), r.path.begin() + static_cast<std::ptrdiff_t>(v.next_edge));
    r.edges.erase(r.edges.begin(), r.edges.begin() + static_cast<std::ptrdiff_t>(v.next_edge));
    return r;
}

void plan_vehicle(World& w, VehicleState& v, const GraphSnapshot& snap, EpochRecord& rec) {
    const auto& q = w.scenario->queries[v.query];
    const NodeId anchor = v.edge ? snap.topology().edge(*v.edge).to : v.current_node;
    const Algorithm algo = w.config.algorithm;

    SearchParams params;
    params.weights = q.effective_weights();
    params.rng_seed = mix_seed(w.config.seed, v.query, w.epoch);
    params.rrt = w.config.rrt;
    params.hysteresis = w.config.hysteresis;
    const Planner planner = [algo](const GraphSnapshot& s, NodeId a, NodeId b, const SearchParams& p) {
        return plan(algo, s, a, b, p);
    };

    PlanResult next;
    if (v.plan.path.empty()) {
        next = planner(snap, anchor, v.goal, params);
    } else {
        PlanResult prior = remaining_plan(v);
        if (refreshes_each_epoch(algo)) {
            next = replan_with(prior, snap, anchor, v.goal, params, planner);
        } else if (recost_route(snap, prior.path, prior.edges, params.weights)) {
            return;  // departure plan still drivable
        } else {
            next = planner(snap, anchor, v.goal, params);
        }
        ++v.replans;
        if (next.path != prior.path) ++v.route_changes;
    }
    rec.planned.push_back(v.id);
    v.expanded += next.expanded;
    if (!next.found()) {
        v.status = VehicleStatus::Stranded;
        return;
    }
    next.expansion_order.clear();
    v.plan = std::move(next);
    v.next_edge = 0;
}

void advance_vehicle(World& w, VehicleState& v, double epoch_end) {
    const auto& topo = w.truth.topology();
    while (v.status == VehicleStatus::EnRoute) {
        if (v.edge) {
            if (v.edge_exit_s > epoch_end) {
                v.position_on_edge = (epoch_end - v.edge_entry_s) / (v.edge_exit_s - v.edge_entry_s);
                return;
            }
            const EdgeId e = *v.edge;
            v.clock_s = v.edge_exit_s;
            v.current_node = topo.edge(e).to;
            v.path_taken.push_back(v.current_node);
            v.edges_taken.push_back(e);
            v.edge.reset();
            v.position_on_edge = 0.0;

            double reported = v.edge_time_s;
            if (w.config.observation_noise_sigma > 0.0) {
                std::normal_distribution<double> noise(0.0, w.config.observation_noise_sigma);
                reported *= std::max(0.1, 1.0 + noise(w.rng));
            }
            w.pending.push_back(collect_observation(v, e, {reported, v.edge_comfort, v.clock_s}));

            if (v.current_node == v.goal) {
                v.status = VehicleStatus::Arrived;
                v.arrival_s = v.clock_s;
                return;
            }
            continue;
        }

        if (v.clock_s >= epoch_end) return;
        if (v.next_edge >= v.plan.edges.size()) {
            v.status = VehicleStatus::Stranded;
            return;
        }
        const EdgeId e = v.plan.edges[v.next_edge++];
        const auto& cond = w.truth.condition(e);
        if (cond.blocked) {
            v.status = VehicleStatus::Stranded;
            return;
        }
        const auto& rec = topo.edge(e);
        const double time = rec.base_time_s * cond.congestion_factor;
        v.realized_cost += traversal_cost(time, cond.comfort_penalty, w.truth_field.safety(rec.to));
        v.edge = e;
        v.edge_entry_s = v.clock_s;
        v.edge_exit_s = v.clock_s + time;
        v.edge_time_s = time;
        v.edge_comfort = cond.comfort_penalty;
    }
}

}  // namespace

void step_epoch(World& w) {
    if (quiescent(w)) return;
    const double epoch_s = w.config.epoch_s;
    const double boundary = static_cast<double>(w.epoch) * epoch_s;
    const double epoch_end = static_cast<double>(w.epoch + 1) * epoch_s;

    EpochRecord rec;
    rec.index = w.epoch;
    rec.boundary_s = boundary;

    if (w.epoch >= w.config.max_epochs) {
        for (auto& v : w.vehicles)
            if (v.status == VehicleStatus::Pending || v.status == VehicleStatus::EnRoute) v.status = VehicleStatus::Stranded;
        w.ledger.push_back(std::move(rec));
        return;
    }

    // (1) scenario events due at this boundary
    const auto& events = w.scenario->events;
    while (w.next_event < events.size() && events[w.next_event].at_time_s <= boundary) {
        apply_event(w.truth, w.truth_field, events[w.next_event]);
        apply_event(w.store, w.store_field, events[w.next_event]);
        rec.events_applied.push_back(w.next_event++);
    }

    // (2) crowd-sensed observations from the previous epoch
    if (w.config.share_observations) {
        rec.observations_ingested = w.pending.size();
        ingest_observations(w.store, w.store_field, std::move(w.pending));
    }
    w.pending.clear();

    // (3) one snapshot for every planner this epoch
    const GraphSnapshot snap = snapshot(w.store, w.store_field, boundary);

    // (4) plan, then move
    for (auto& v : w.vehicles) {
        if (v.status == VehicleStatus::Pending && w.scenario->queries[v.query].depart_s < epoch_end) {
            v.status = VehicleStatus::EnRoute;
            v.path_taken = {v.current_node};
        }
        if (v.status != VehicleStatus::EnRoute) continue;
        if (!v.edge && v.current_node == v.goal) {
            v.status = VehicleStatus::Arrived;
            v.arrival_s = v.clock_s;
            continue;
        }
        plan_vehicle(w, v, snap, rec);
        advance_vehicle(w, v, epoch_end);
    }

    w.ledger.push_back(std::move(rec));
    ++w.epoch;
}

SimulationTrace make_trace(const World& w) {
    SimulationTrace t;
    t.scenario_name = w.scenario->meta.name;
    t.seed = w.config.seed;
    t.config = w.config;
    t.epochs = w.ledger;
    const auto& topo = w.scenario->graph.topology();
    for (const auto& v : w.vehicles) {
        VehicleTrace vt;
        vt.id = v.id;
        vt.status = v.status;
        vt.realized_cost = v.realized_cost;
        vt.arrival_s = v.arrival_s;
        vt.replans = v.replans;
        vt.route_changes = v.route_changes;
        vt.expanded = v.expanded;
        for (NodeId n : v.path_taken) vt.path.push_back(topo.node(n).id);
        for (EdgeId e : v.edges_taken) vt.edges.push_back(topo.edge(e).id);
        t.vehicles.push_back(std::move(vt));
    }
    return t;
}

SimulationTrace run_simulation(const Scenario& scenario, const SimConfig& config) {
    World w = make_world(std::make_shared<const Scenario>(scenario), config);
    while (!quiescent(w)) step_epoch(w);
    return make_trace(w);
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trace_json(const SimulationTrace& t) {
    json doc;
    doc["scenario"] = t.scenario_name;
    doc["seed"] = t.seed;
    json cfg = {{"epoch_s", t.config.epoch_s},
                {"hysteresis", t.config.hysteresis},
                {"algorithm", std::string(algorithm_name(t.config.algorithm))},
                {"share_observations", t.config.share_observations},
                {"observation_noise_sigma", t.config.observation_noise_sigma},
                {"max_epochs", t.config.max_epochs},
                {"rrt",
                 {{"max_iterations", t.config.rrt.max_iterations},
                  {"step_edges", t.config.rrt.step_edges},
                  {"goal_bias", t.config.rrt.goal_bias}}}};
    cfg["alpha"] = t.config.alpha ? json(*t.config.alpha) : json(nullptr);
    doc["config"] = std::move(cfg);

    json vehicles = json::array();
    for (const auto& v : t.vehicles) {
        vehicles.push_back({{"id", v.id},
                            {"status", std::string(vehicle_status_name(v.status))},
                            {"realized_cost_s", v.realized_cost},
                            {"arrival_s", v.arrival_s ? json(*v.arrival_s) : json(nullptr)},
                            {"replans", v.replans},
                            {"route_changes", v.route_changes},
                            {"expanded", v.expanded},
                            {"path", v.path},
                            {"edges", v.edges}});
    }
    doc["vehicles"] = std::move(vehicles);

    json epochs = json::array();
    for (const auto& e : t.epochs)
        epochs.push_back({{"index", e.index},
                          {"boundary_s", e.boundary_s},
                          {"events_applied", e.events_applied},
                          {"observations_ingested", e.observations_ingested},
                          {"planned", e.planned}});
    doc["epochs"] = std::move(epochs);
    return doc.dump(2) + "\n";
}

std::string trace_csv(const SimulationTrace& t) {
    std::ostringstream out;
    out << "vehicle,status,realized_cost_s,arrival_s,replans,path\n";
    for (const auto& v : t.vehicles) {
        out << v.id << ',' << vehicle_status_name(v.status) << ',' << format_number(v.realized_cost) << ','
            << (v.arrival_s ? format_number(*v.arrival_s) : std::string()) << ',' << v.replans << ',';
        for (std::size_t i = 0; i < v.path.size(); ++i) out << (i ? " " : "") << v.path[i];
        out << '\n';
    }
    return out.str();
}

}  // namespace dynroute
