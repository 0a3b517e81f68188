#pragma once

#include <string>
#include <vector>

#include "dynroute/graph.hpp"
#include "dynroute/heuristic_field.hpp"

namespace dynroute {

/// Coefficients of the weighted cost: wg on path cost, w1/w2/w3 on the time,
/// comfort and safety heuristics. (1,1,1,1) is the unweighted additive form.
struct HeuristicWeights {
    double wg = 1.0;
    double w1 = 1.0;
    double w2 = 1.0;
    double w3 = 1.0;

    /// Throws std::invalid_argument unless all finite, >= 0 and wg > 0.
    void validate() const;

    bool operator==(const HeuristicWeights&) const = default;
};

/// Environment context standing in for classifier outputs.
struct ContextFlags {
    bool passenger_prefers_comfort = false;
    bool rough_road_reported = false;
    bool heavy_traffic_reported = false;

    bool operator==(const ContextFlags&) const = default;
};

/// One crowd-sensed edge report from a vehicle.
struct Observation {
    EdgeId edge{};
    double observed_travel_time_s = 0.0;
    double observed_comfort = 0.0;
    std::string reporter;
    double at_time_s = 0.0;

    bool operator==(const Observation&) const = default;
};

inline constexpr double kDefaultSmoothingAlpha = 0.3;

/// Straight-line distance to goal over the network-max free-flow speed.
/// Admissible for every congestion state since factors never drop below 1.
double time_heuristic(const Topology& topo, NodeId node, NodeId goal);
double time_heuristic(const GraphSnapshot& snap, NodeId node, NodeId goal);

double comfort_heuristic(const HeuristicField& field, NodeId node);
double safety_heuristic(const HeuristicField& field, NodeId node);

/// wg*g + w1*h1 + w2*h2 + w3*h3. Throws std::invalid_argument on non-finite
/// or negative inputs.
double combined_f(double g, double h1, double h2, double h3, const HeuristicWeights& w);

/// Folds a batch of observations into the overlay and comfort field with an
/// exponential moving average (alpha from the field). Processed in
/// (at_time, edge, reporter) order. Safety values are never written.
void ingest_observations(RoadGraph& graph, HeuristicField& field, std::vector<Observation> batch);

/// Fixed multiplier table: comfort preference doubles w2, rough road scales
/// w2 by 1.5, heavy traffic scales w1 by 1.5. wg and w3 pass through.
HeuristicWeights adapt_weights(const HeuristicWeights& base, const ContextFlags& ctx);

}  // namespace dynroute
