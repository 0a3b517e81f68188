#include "dynroute/heuristic_field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dynroute {

namespace {

void check_value(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument(std::string(what) + " must be finite and >= 0, got " + std::to_string(v));
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("smoothing alpha must lie in (0, 1], got " + std::to_string(alpha));
}

}  // namespace

HeuristicField::HeuristicField(std::vector<double> comfort, std::vector<double> safety, double smoothing_alpha)
    : comfort_(std::move(comfort)), alpha_(smoothing_alpha) {
    if (comfort_.size() != safety.size())
        throw std::invalid_argument("comfort and safety fields differ in size");
    for (double v : comfort_) check_value(v, "comfort heuristic");
    for (double v : safety) check_value(v, "safety heuristic");
    check_alpha(alpha_);
    safety_ = std::make_shared<const std::vector<double>>(std::move(safety));
}

HeuristicField HeuristicField::zeros(std::size_t node_count, double smoothing_alpha) {
    return HeuristicField(std::vector<double>(node_count, 0.0), std::vector<double>(node_count, 0.0), smoothing_alpha);
}

double HeuristicField::comfort(NodeId n) const {
    if (index(n) >= comfort_.size()) throw UnknownIdError("node index " + std::to_string(index(n)) + " not in field");
    return comfort_[index(n)];
}

double HeuristicField::safety(NodeId n) const {
    if (index(n) >= safety_->size()) throw UnknownIdError("node index " + std::to_string(index(n)) + " not in field");
    return (*safety_)[index(n)];
}

void HeuristicField::set_comfort(NodeId n, double value) {
    if (index(n) >= comfort_.size()) throw UnknownIdError("node index " + std::to_string(index(n)) + " not in field");
    check_value(value, "comfort heuristic");
    comfort_[index(n)] = value;
}

void HeuristicField::set_smoothing_alpha(double alpha) {
    check_alpha(alpha);
    alpha_ = alpha;
}

bool operator==(const HeuristicField& a, const HeuristicField& b) {
    return a.comfort_ == b.comfort_ && *a.safety_ == *b.safety_ && a.alpha_ == b.alpha_;
}

}  // namespace dynroute
