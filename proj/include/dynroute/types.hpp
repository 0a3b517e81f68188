#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dynroute {

// Dense indices assigned at load time in natural id order.
enum class NodeId : std::uint32_t {};
enum class EdgeId : std::uint32_t {};

inline constexpr EdgeId kNoEdge{std::numeric_limits<std::uint32_t>::max()};

constexpr std::size_t index(NodeId n) { return static_cast<std::size_t>(n); }
constexpr std::size_t index(EdgeId e) { return static_cast<std::size_t>(e); }
constexpr NodeId node_at(std::size_t i) { return NodeId{static_cast<std::uint32_t>(i)}; }
constexpr EdgeId edge_at(std::size_t i) { return EdgeId{static_cast<std::uint32_t>(i)}; }

// Raised for a node or edge reference that does not exist.
class UnknownIdError : public std::out_of_range {
public:
    explicit UnknownIdError(const std::string& what) : std::out_of_range(what) {}
};

}  // namespace dynroute
