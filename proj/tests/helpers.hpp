#pragma once

#include <filesystem>
#include <string>

#include "dynroute/scenario.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return DYNROUTE_SOURCE_DIR; }

inline dynroute::Scenario fixture(const std::string& relative) {
    return dynroute::load_scenario_file(source_dir() / relative);
}

// Two nodes, one 10 s edge, one query.
inline std::string minimal_doc() {
    return R"({
  "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 100, "y": 0}],
  "edges": [{"id": "e1", "from": "a", "to": "b", "length_m": 100, "base_time_s": 10}],
  "queries": [{"vehicle": "v0", "start": "a", "goal": "b", "depart_s": 0}]
}
)";
}

// Diamond a->{b,c}->d: a-b 1 s, b-d 1 s, a-c 1 s, c-d 3 s.
inline std::string diamond_doc() {
    return R"({
  "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 1, "y": 1}, {"id": "c", "x": 1, "y": -1}, {"id": "d", "x": 2, "y": 0}],
  "edges": [
    {"id": "ab", "from": "a", "to": "b", "length_m": 1.5, "base_time_s": 1},
    {"id": "bd", "from": "b", "to": "d", "length_m": 1.5, "base_time_s": 1},
    {"id": "ac", "from": "a", "to": "c", "length_m": 1.5, "base_time_s": 1},
    {"id": "cd", "from": "c", "to": "d", "length_m": 1.5, "base_time_s": 3}
  ],
  "queries": [{"vehicle": "v0", "start": "a", "goal": "d", "depart_s": 0}]
}
)";
}

}  // namespace testing
