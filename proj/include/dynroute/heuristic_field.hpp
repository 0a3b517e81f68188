#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dynroute/types.hpp"

namespace dynroute {

/// Per-node comfort (h2) and safety (h3) heuristic values, in seconds-equivalent.
///
/// h2 moves with events and crowd-sensed observations. h3 is fixed at
/// construction: the class exposes no way to write it, and copies share the
/// same immutable storage.
class HeuristicField {
public:
    HeuristicField() = default;
    HeuristicField(std::vector<double> comfort, std::vector<double> safety, double smoothing_alpha = 0.3);

    /// Zero comfort and safety for every node.
    static HeuristicField zeros(std::size_t node_count, double smoothing_alpha = 0.3);

    std::size_t size() const { return comfort_.size(); }
    double comfort(NodeId n) const;
    double safety(NodeId n) const;
    void set_comfort(NodeId n, double value);

    double smoothing_alpha() const { return alpha_; }
    void set_smoothing_alpha(double alpha);

    std::span<const double> comfort_values() const { return comfort_; }
    std::span<const double> safety_values() const { return *safety_; }

    friend bool operator==(const HeuristicField& a, const HeuristicField& b);

private:
    std::vector<double> comfort_;
    std::shared_ptr<const std::vector<double>> safety_ = std::make_shared<const std::vector<double>>();
    double alpha_ = 0.3;
};

}  // namespace dynroute
