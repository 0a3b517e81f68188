#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynroute/fleet_sim.hpp"
#include "dynroute/scenario.hpp"

namespace dynroute {

struct OracleBounds {
    std::size_t max_nodes = 400;
    std::size_t max_events = 64;
    std::size_t max_labels = 4'000'000;
};

/// Scenario outside the oracle's desk-scale bounds; never approximated.
class OracleRefusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    std::size_t query = 0;
    bool reachable = false;
    double optimal_realized_cost = 0.0;
    double arrival_s = 0.0;
    std::vector<NodeId> optimal_path;
    std::vector<EdgeId> optimal_edges;
};

/// Cheapest realized cost for one query with full knowledge of every event.
///
/// Uniform-cost search over (node, exact clock) labels, charging each edge at
/// the ground-truth conditions of the epoch in which it is entered, exactly
/// as the simulator does. Vehicles cannot wait, so labels at the same node
/// are only merged when their clocks are identical or both fall after the
/// last condition change.
OracleResult offline_optimal(const Scenario& scenario, std::size_t query, double epoch_s, const OracleBounds& bounds = {});

struct ScenarioOracle {
    std::vector<OracleResult> per_query;
};

struct Suite {
    std::string name;
    std::vector<std::string> names;
    std::vector<Scenario> scenarios;
};

/// Loads every *.scn file in `dir`, sorted by file name.
Suite load_suite(const std::filesystem::path& dir);

struct CellOutcome {
    std::string scenario;
    bool correct = false;
    bool all_arrived = false;
    double realized_total = 0.0;
    double oracle_total = 0.0;
    std::size_t strandings = 0;
    double expanded_per_vehicle = 0.0;
    std::string error;
};

struct AlgorithmScore {
    Algorithm algorithm = Algorithm::DynAStar;
    std::size_t passes = 0;
    std::size_t total = 0;
    double score = 0.0;
    double mean_ratio = 0.0;  // over scenarios where every vehicle arrived
    std::size_t strandings = 0;
    double mean_expanded = 0.0;
    std::vector<CellOutcome> cells;
};

struct ScoreReport {
    std::string suite_name;
    double rho = 1.15;
    SimConfig config;
    std::vector<AlgorithmScore> rows;
};

/// A scenario is correct when every vehicle arrived and the summed realized
/// cost is within rho times the summed oracle cost.
bool cell_correct(bool all_arrived, double realized_total, double oracle_total, double rho);

std::vector<ScenarioOracle> compute_oracles(const Suite& suite, double epoch_s, unsigned jobs = 1,
                                            const OracleBounds& bounds = {});

/// Scores one algorithm over a suite. Oracle refusals propagate.
AlgorithmScore score_suite(const Suite& suite, Algorithm algorithm, double rho, const SimConfig& config,
                           const std::vector<ScenarioOracle>& oracles, unsigned jobs = 1);
AlgorithmScore score_suite(const Suite& suite, Algorithm algorithm, double rho, const SimConfig& config);

/// Runs every algorithm through the simulator on every scenario.
ScoreReport compare_algorithms(const Suite& suite, double rho, const SimConfig& config, unsigned jobs = 1);

/// algorithm,score,mean_ratio,strandings,mean_expanded
std::string report_csv(const ScoreReport& report);
/// Per-scenario pass/fail cells.
std::string cells_csv(const ScoreReport& report);
/// Fixed-width comparison table.
std::string report_table(const ScoreReport& report);

}  // namespace dynroute
