#include "dynroute/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace dynroute {

void HeuristicWeights::validate() const {
    for (double w : {wg, w1, w2, w3})
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be finite and >= 0");
    if (!(wg > 0.0)) throw std::invalid_argument("path-cost weight wg must be > 0");
}

double time_heuristic(const Topology& topo, NodeId node, NodeId goal) {
    topo.check(node);
    topo.check(goal);
    if (node == goal) return 0.0;
    const auto& a = topo.node(node);
    const auto& b = topo.node(goal);
    const double vmax = topo.max_speed();
    if (!(vmax > 0.0)) return 0.0;
    return std::hypot(b.x - a.x, b.y - a.y) / vmax;
}

double time_heuristic(const GraphSnapshot& snap, NodeId node, NodeId goal) {
    return time_heuristic(snap.topology(), node, goal);
}

double comfort_heuristic(const HeuristicField& field, NodeId node) { return field.comfort(node); }

double safety_heuristic(const HeuristicField& field, NodeId node) { return field.safety(node); }

double combined_f(double g, double h1, double h2, double h3, const HeuristicWeights& w) {
    for (double v : {g, h1, h2, h3})
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("cost terms must be finite and >= 0");
    return w.wg * g + w.w1 * h1 + w.w2 * h2 + w.w3 * h3;
}

void ingest_observations(RoadGraph& graph, HeuristicField& field, std::vector<Observation> batch) {
    const auto& topo = graph.topology();
    for (const auto& o : batch) {
        topo.check(o.edge);
        if (!std::isfinite(o.observed_travel_time_s) || o.observed_travel_time_s <= 0.0)
            throw std::invalid_argument("observed travel time must be finite and > 0");
        if (!std::isfinite(o.observed_comfort) || o.observed_comfort < 0.0)
            throw std::invalid_argument("observed comfort must be finite and >= 0");
    }
    std::ranges::sort(batch, [](const Observation& a, const Observation& b) {
        return std::tie(a.at_time_s, a.edge, a.reporter, a.observed_travel_time_s, a.observed_comfort) <
               std::tie(b.at_time_s, b.edge, b.reporter, b.observed_travel_time_s, b.observed_comfort);
    });

    const double alpha = field.smoothing_alpha();
    for (const auto& o : batch) {
        const auto& rec = topo.edge(o.edge);
        auto cond = graph.condition(o.edge);
        const double ratio = o.observed_travel_time_s / rec.base_time_s;
        cond.congestion_factor = std::max(1.0, (1.0 - alpha) * cond.congestion_factor + alpha * ratio);
        cond.comfort_penalty = (1.0 - alpha) * cond.comfort_penalty + alpha * o.observed_comfort;
        graph.set_condition(o.edge, cond);
        field.set_comfort(rec.to, (1.0 - alpha) * field.comfort(rec.to) + alpha * o.observed_comfort);
    }
}

HeuristicWeights adapt_weights(const HeuristicWeights& base, const ContextFlags& ctx) {
    HeuristicWeights w = base;
    if (ctx.passenger_prefers_comfort) w.w2 *= 2.0;
    if (ctx.rough_road_reported) w.w2 *= 1.5;
    if (ctx.heavy_traffic_reported) w.w1 *= 1.5;
    return w;
}

}  // namespace dynroute
