#include "dynroute/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_set>

namespace dynroute {

namespace {

struct Label {
    NodeId node;
    double clock;
    double cost;
    std::size_t parent;
    EdgeId via;
};

struct QueueEntry {
    double cost;
    double clock;
    std::uint32_t node;
    std::size_t label;

    bool operator>(const QueueEntry& o) const {
        return std::tie(cost, clock, node, label) > std::tie(o.cost, o.clock, o.node, o.label);
    }
};

struct StateHash {
    std::size_t operator()(const std::pair<std::uint32_t, std::uint64_t>& s) const {
        return std::hash<std::uint64_t>{}(s.second * 0x9E3779B97F4A7C15ull ^ s.first);
    }
};

constexpr std::size_t kNoLabel = std::numeric_limits<std::size_t>::max();

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception is rethrown.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

OracleResult offline_optimal(const Scenario& scenario, std::size_t query, double epoch_s, const OracleBounds& bounds) {
    const auto& topo = scenario.graph.topology();
    if (topo.node_count() > bounds.max_nodes)
        throw OracleRefusal("scenario \"" + scenario.meta.name + "\" has " + std::to_string(topo.node_count()) +
                            " nodes; the oracle handles at most " + std::to_string(bounds.max_nodes));
    if (scenario.events.size() > bounds.max_events)
        throw OracleRefusal("scenario \"" + scenario.meta.name + "\" has " + std::to_string(scenario.events.size()) +
                            " events; the oracle handles at most " + std::to_string(bounds.max_events));
    if (!std::isfinite(epoch_s) || epoch_s <= 0.0) throw std::invalid_argument("epoch_s must be finite and > 0");
    const auto& q = scenario.queries.at(query);

    const TruthTimeline timeline(scenario, epoch_s);
    const std::size_t tail_epoch = timeline.last_change_epoch();

    std::vector<Label> labels;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
    std::unordered_set<std::pair<std::uint32_t, std::uint64_t>, StateHash> settled;
    std::vector<char> tail_settled(topo.node_count(), 0);

    labels.push_back({q.start, q.depart_s, 0.0, kNoLabel, kNoEdge});
    open.push({0.0, q.depart_s, static_cast<std::uint32_t>(q.start), 0});

    OracleResult result;
    result.query = query;
    while (!open.empty()) {
        const QueueEntry top = open.top();
        open.pop();
        const Label cur = labels[top.label];

        // Past the last change, the future no longer depends on the clock.
        if (epoch_of(cur.clock, epoch_s) >= tail_epoch) {
            if (tail_settled[index(cur.node)]) continue;
            tail_settled[index(cur.node)] = 1;
        } else if (!settled.emplace(static_cast<std::uint32_t>(cur.node), std::bit_cast<std::uint64_t>(cur.clock)).second) {
            continue;
        }

        if (cur.node == q.goal) {
            result.reachable = true;
            result.optimal_realized_cost = cur.cost;
            result.arrival_s = cur.clock;
            for (std::size_t l = top.label; l != kNoLabel; l = labels[l].parent) {
                result.optimal_path.push_back(labels[l].node);
                if (labels[l].via != kNoEdge) result.optimal_edges.push_back(labels[l].via);
            }
            std::ranges::reverse(result.optimal_path);
            std::ranges::reverse(result.optimal_edges);
            return result;
        }

        const auto& conds = timeline.conditions_at(cur.clock);
        for (EdgeId e : topo.out_edges(cur.node)) {
            const auto& c = conds[index(e)];
            if (c.blocked) continue;
            const auto& rec = topo.edge(e);
            const double time = rec.base_time_s * c.congestion_factor;
            const double cost = cur.cost + traversal_cost(time, c.comfort_penalty, scenario.initial_field.safety(rec.to));
            labels.push_back({rec.to, cur.clock + time, cost, top.label, e});
            open.push({cost, cur.clock + time, static_cast<std::uint32_t>(rec.to), labels.size() - 1});
        }
        if (labels.size() > bounds.max_labels)
            throw OracleRefusal("scenario \"" + scenario.meta.name + "\" exceeds the oracle label budget of " +
                                std::to_string(bounds.max_labels));
    }
    return result;
}

Suite load_suite(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw std::invalid_argument("suite directory " + dir.string() + " not found");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".scn") files.push_back(entry.path());
    if (files.empty()) throw std::invalid_argument("suite directory " + dir.string() + " has no .scn files");
    std::ranges::sort(files);

    Suite suite;
    suite.name = dir.filename().string();
    if (suite.name.empty()) suite.name = dir.parent_path().filename().string();
    for (const auto& f : files) {
        suite.names.push_back(f.filename().string());
        suite.scenarios.push_back(load_scenario_file(f));
    }
    return suite;
}

bool cell_correct(bool all_arrived, double realized_total, double oracle_total, double rho) {
    return all_arrived && std::isfinite(oracle_total) && realized_total <= rho * oracle_total;
}

std::vector<ScenarioOracle> compute_oracles(const Suite& suite, double epoch_s, unsigned jobs, const OracleBounds& bounds) {
    std::vector<ScenarioOracle> out(suite.scenarios.size());
    parallel_for(suite.scenarios.size(), jobs, [&](std::size_t i) {
        const auto& sc = suite.scenarios[i];
        for (std::size_t q = 0; q < sc.queries.size(); ++q)
            out[i].per_query.push_back(offline_optimal(sc, q, epoch_s, bounds));
    });
    return out;
}

AlgorithmScore score_suite(const Suite& suite, Algorithm algorithm, double rho, const SimConfig& config,
                           const std::vector<ScenarioOracle>& oracles, unsigned jobs) {
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be finite and >= 1");
    if (suite.scenarios.empty()) throw std::invalid_argument("suite has no scenarios");
    if (oracles.size() != suite.scenarios.size()) throw std::invalid_argument("oracle table does not match suite");

    SimConfig cfg = config;
    cfg.algorithm = algorithm;

    AlgorithmScore score;
    score.algorithm = algorithm;
    score.total = suite.scenarios.size();
    score.cells.resize(suite.scenarios.size());

    parallel_for(suite.scenarios.size(), jobs, [&](std::size_t i) {
        CellOutcome& cell = score.cells[i];
        cell.scenario = suite.names.empty() ? suite.scenarios[i].meta.name : suite.names[i];
        try {
            const auto trace = run_simulation(suite.scenarios[i], cfg);
            cell.all_arrived = true;
            std::size_t expanded = 0;
            for (std::size_t v = 0; v < trace.vehicles.size(); ++v) {
                const auto& vt = trace.vehicles[v];
                if (vt.status != VehicleStatus::Arrived) cell.all_arrived = false;
                if (vt.status == VehicleStatus::Stranded) ++cell.strandings;
                cell.realized_total += vt.realized_cost;
                expanded += vt.expanded;
                const auto& oracle = oracles[i].per_query.at(v);
                cell.oracle_total += oracle.reachable ? oracle.optimal_realized_cost
                                                      : std::numeric_limits<double>::infinity();
            }
            if (!trace.vehicles.empty())
                cell.expanded_per_vehicle = static_cast<double>(expanded) / static_cast<double>(trace.vehicles.size());
            cell.correct = cell_correct(cell.all_arrived, cell.realized_total, cell.oracle_total, rho);
        } catch (const std::exception& ex) {
            cell.error = ex.what();
            cell.correct = false;
        }
    });

    double ratio_sum = 0.0, expanded_sum = 0.0;
    std::size_t ratio_count = 0;
    for (const auto& cell : score.cells) {
        if (cell.correct) ++score.passes;
        score.strandings += cell.strandings;
        expanded_sum += cell.expanded_per_vehicle;
        if (cell.all_arrived && cell.error.empty() && cell.oracle_total > 0.0 && std::isfinite(cell.oracle_total)) {
            ratio_sum += cell.realized_total / cell.oracle_total;
            ++ratio_count;
        }
    }
    score.score = static_cast<double>(score.passes) / static_cast<double>(score.total);
    score.mean_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
    score.mean_expanded = expanded_sum / static_cast<double>(score.total);
    return score;
}

AlgorithmScore score_suite(const Suite& suite, Algorithm algorithm, double rho, const SimConfig& config) {
    return score_suite(suite, algorithm, rho, config, compute_oracles(suite, config.epoch_s));
}

ScoreReport compare_algorithms(const Suite& suite, double rho, const SimConfig& config, unsigned jobs) {
    ScoreReport report;
    report.suite_name = suite.name;
    report.rho = rho;
    report.config = config;
    const auto oracles = compute_oracles(suite, config.epoch_s, jobs);
    for (Algorithm a : kAllAlgorithms) report.rows.push_back(score_suite(suite, a, rho, config, oracles, jobs));
    return report;
}

std::string report_csv(const ScoreReport& report) {
    std::ostringstream out;
    out << "algorithm,score,mean_ratio,strandings,mean_expanded\n";
    for (const auto& row : report.rows)
        out << algorithm_name(row.algorithm) << ',' << format_number(row.score) << ',' << format_number(row.mean_ratio)
            << ',' << row.strandings << ',' << format_number(row.mean_expanded) << '\n';
    return out.str();
}

std::string cells_csv(const ScoreReport& report) {
    std::ostringstream out;
    out << "scenario,algorithm,correct,all_arrived,realized_total_s,oracle_total_s,strandings,error\n";
    for (const auto& row : report.rows)
        for (const auto& c : row.cells)
            out << c.scenario << ',' << algorithm_name(row.algorithm) << ',' << (c.correct ? "pass" : "fail") << ','
                << (c.all_arrived ? "yes" : "no") << ',' << format_number(c.realized_total) << ','
                << format_number(c.oracle_total) << ',' << c.strandings << ',' << c.error << '\n';
    return out.str();
}

std::string report_table(const ScoreReport& report) {
    std::ostringstream out;
    out << "Suite: " << report.suite_name << "   rho = " << fixed(report.rho, 2)
        << "   epoch = " << format_number(report.config.epoch_s) << " s\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-8s %-8s %-8s %-9s %-11s %-11s %-13s\n", "Algorithm", "Static", "Dynamic",
                  "Score", "Passes", "Mean ratio", "Strandings", "Mean expanded");
    out << line;
    out << std::string(86, '-') << '\n';
    for (const auto& row : report.rows) {
        const bool dynamic = refreshes_each_epoch(row.algorithm);
        const std::string passes = std::to_string(row.passes) + "/" + std::to_string(row.total);
        std::snprintf(line, sizeof line, "%-12s %-8s %-8s %-8s %-9s %-11s %-11zu %-13s\n",
                      std::string(algorithm_name(row.algorithm)).c_str(), dynamic ? "" : "x", dynamic ? "x" : "",
                      fixed(row.score, 2).c_str(), passes.c_str(), fixed(row.mean_ratio, 4).c_str(), row.strandings,
                      fixed(row.mean_expanded, 1).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace dynroute
