#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dynroute/evaluation.hpp"
#include "dynroute/fleet_sim.hpp"
#include "dynroute/planners.hpp"
#include "dynroute/scenario.hpp"
#include "json.hpp"

namespace dynroute::cli {

namespace {

using json = nlohmann::json;

struct RunConfig {
    std::vector<std::string> scenarios;
    std::string suite;
    std::string algo = "dyn_astar";
    std::string weights;
    std::size_t query = 0;
    double rho = 1.15;
    double epoch_s = 30.0;
    std::optional<double> alpha;
    double hysteresis = 0.01;
    std::uint64_t seed = 0;
    std::string out;
    unsigned jobs = 1;
    bool allow_stranded = false;
    bool no_sharing = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int code(ExitCode c) { return static_cast<int>(c); }

Algorithm algorithm_of(const RunConfig& cfg) {
    auto a = parse_algorithm(cfg.algo);
    if (!a) throw UsageError("unknown --algo " + cfg.algo);
    return *a;
}

std::optional<HeuristicWeights> weights_of(const RunConfig& cfg) {
    if (cfg.weights.empty()) return std::nullopt;
    std::vector<double> parts;
    std::stringstream ss(cfg.weights);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--weights expects four numbers wg,w1,w2,w3; got \"" + cfg.weights + "\"");
        }
    }
    if (parts.size() != 4) throw UsageError("--weights expects four numbers wg,w1,w2,w3; got \"" + cfg.weights + "\"");
    HeuristicWeights w{parts[0], parts[1], parts[2], parts[3]};
    try {
        w.validate();
    } catch (const std::invalid_argument& ex) {
        throw UsageError(std::string("--weights: ") + ex.what());
    }
    return w;
}

SimConfig sim_config_of(const RunConfig& cfg) {
    SimConfig sc;
    sc.epoch_s = cfg.epoch_s;
    sc.alpha = cfg.alpha;
    sc.hysteresis = cfg.hysteresis;
    sc.seed = cfg.seed;
    sc.share_observations = !cfg.no_sharing;
    return sc;
}

void override_weights(Scenario& sc, const std::optional<HeuristicWeights>& w) {
    if (!w) return;
    for (auto& q : sc.queries) {
        q.weights = *w;
        q.context = {};
    }
}

// Missing input files are I/O errors, not invalid scenarios.
Scenario load_single_scenario(const RunConfig& cfg) {
    if (cfg.scenarios.size() != 1) throw UsageError("exactly one --scenario is required");
    const std::filesystem::path path = cfg.scenarios.front();
    if (!std::filesystem::is_regular_file(path))
        throw std::filesystem::filesystem_error("cannot open scenario", path,
                                                std::make_error_code(std::errc::no_such_file_or_directory));
    return load_scenario_file(path);
}

int cmd_plan(const RunConfig& cfg, std::ostream& out) {
    const Algorithm algo = algorithm_of(cfg);
    const auto weights = weights_of(cfg);
    Scenario sc = load_single_scenario(cfg);
    override_weights(sc, weights);
    if (cfg.query >= sc.queries.size())
        throw UsageError("--query " + std::to_string(cfg.query) + " out of range (scenario has " +
                         std::to_string(sc.queries.size()) + " queries)");
    const auto& q = sc.queries[cfg.query];

    // World state at departure: every event up to depart_s applied.
    RoadGraph graph = sc.graph;
    HeuristicField field = sc.initial_field;
    if (cfg.alpha) field.set_smoothing_alpha(*cfg.alpha);
    for (const auto& ev : sc.events)
        if (ev.at_time_s <= q.depart_s) apply_event(graph, field, ev);
    const GraphSnapshot snap = snapshot(graph, field, q.depart_s);

    SearchParams params;
    params.weights = q.effective_weights();
    params.rng_seed = cfg.seed;
    params.hysteresis = cfg.hysteresis;
    const PlanResult r = plan(algo, snap, q.start, q.goal, params);

    const auto& topo = sc.graph.topology();
    std::vector<std::string> path;
    for (NodeId n : r.path) path.push_back(topo.node(n).id);

    out << "scenario: " << sc.meta.name << '\n'
        << "vehicle: " << q.vehicle << '\n'
        << "algorithm: " << algorithm_name(algo) << '\n'
        << "status: " << (r.found() ? "Found" : "Unreachable") << '\n';
    if (r.found()) {
        out << "path:";
        for (const auto& p : path) out << ' ' << p;
        out << '\n'
            << "g_cost: " << format_number(r.g_cost) << '\n'
            << "f_cost: " << format_number(r.f_cost_at_goal) << '\n';
    }
    out << "expanded: " << r.expanded << '\n';

    if (!cfg.out.empty()) {
        json doc = {{"scenario", sc.meta.name},
                    {"vehicle", q.vehicle},
                    {"algorithm", std::string(algorithm_name(algo))},
                    {"status", r.found() ? "Found" : "Unreachable"},
                    {"path", path},
                    {"g_cost", r.g_cost},
                    {"travel_time_s", r.travel_time_s},
                    {"f_cost", r.f_cost_at_goal},
                    {"expanded", r.expanded}};
        write_file_atomic(cfg.out, doc.dump(2) + "\n");
    }
    return code(r.found() ? ExitCode::Ok : ExitCode::Unreachable);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const Algorithm algo = algorithm_of(cfg);
    const auto weights = weights_of(cfg);
    Scenario sc = load_single_scenario(cfg);
    override_weights(sc, weights);
    SimConfig sim = sim_config_of(cfg);
    sim.algorithm = algo;
    try {
        sim.validate();
    } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
    }

    const SimulationTrace trace = run_simulation(sc, sim);
    const std::filesystem::path dir = cfg.out.empty() ? std::filesystem::path("dynroute_out") : std::filesystem::path(cfg.out);
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "trace.json", trace_json(trace));
    write_file_atomic(dir / "vehicles.csv", trace_csv(trace));

    std::size_t stranded = 0;
    for (const auto& v : trace.vehicles) {
        out << v.id << ": " << vehicle_status_name(v.status) << " realized_cost=" << format_number(v.realized_cost)
            << " replans=" << v.replans << '\n';
        if (v.status == VehicleStatus::Stranded) ++stranded;
    }
    out << "wrote " << (dir / "trace.json").string() << " and " << (dir / "vehicles.csv").string() << '\n';
    if (stranded > 0 && !cfg.allow_stranded) return code(ExitCode::Stranded);
    return code(ExitCode::Ok);
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
    if (cfg.suite.empty()) throw UsageError("--suite is required");
    const auto weights = weights_of(cfg);
    Suite suite;
    try {
        suite = load_suite(cfg.suite);
    } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
    }
    for (auto& sc : suite.scenarios) override_weights(sc, weights);
    SimConfig sim = sim_config_of(cfg);
    try {
        sim.validate();
    } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
    }

    const ScoreReport report = compare_algorithms(suite, cfg.rho, sim, cfg.jobs);
    const std::filesystem::path dir = cfg.out.empty() ? std::filesystem::path("dynroute_bench") : std::filesystem::path(cfg.out);
    std::filesystem::create_directories(dir);
    const std::string table = report_table(report);
    write_file_atomic(dir / "scores.csv", report_csv(report));
    write_file_atomic(dir / "cells.csv", cells_csv(report));
    write_file_atomic(dir / "scores.txt", table);
    out << table;
    return code(ExitCode::Ok);
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    std::vector<std::filesystem::path> files(cfg.scenarios.begin(), cfg.scenarios.end());
    if (!cfg.suite.empty()) {
        if (!std::filesystem::is_directory(cfg.suite)) throw UsageError("suite directory " + cfg.suite + " not found");
        std::vector<std::filesystem::path> found;
        for (const auto& e : std::filesystem::directory_iterator(cfg.suite))
            if (e.is_regular_file() && e.path().extension() == ".scn") found.push_back(e.path());
        std::ranges::sort(found);
        files.insert(files.end(), found.begin(), found.end());
    }
    if (files.empty()) throw UsageError("validate needs --scenario or --suite");

    bool all_ok = true;
    for (const auto& f : files) {
        try {
            (void)load_scenario_file(f);
            out << "OK " << f.string() << '\n';
        } catch (const ScenarioError& ex) {
            all_ok = false;
            json e = {{"file", f.string()},
                      {"kind", ex.kind() == ScenarioError::Kind::Parse ? "parse" : "validation"},
                      {"element", ex.element()},
                      {"line", ex.line()},
                      {"message", ex.what()}};
            out << e.dump() << '\n';
        }
    }
    return code(all_ok ? ExitCode::Ok : ExitCode::InvalidScenario);
}

void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--epoch-s", cfg.epoch_s, "Replanning epoch in simulated seconds")->check(CLI::Range(0.001, 86400.0));
    sub->add_option("--alpha", cfg.alpha, "Observation smoothing factor (default: scenario meta.alpha)")
        ->check(CLI::Range(1e-9, 1.0));
    sub->add_option("--seed", cfg.seed, "Seed for RRT and observation noise")->check(CLI::Range(0ull, ~0ull));
    sub->add_option("--weights", cfg.weights, "Override weights wg,w1,w2,w3 (each >= 0, wg > 0)");
    sub->add_option("--hysteresis", cfg.hysteresis, "Relative improvement needed to switch routes")
        ->check(CLI::Range(0.0, 0.99));
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::filesystem::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
        f << content;
        f.flush();
        if (!f) throw std::filesystem::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
    }
    std::filesystem::rename(tmp, path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Dynamic weighted-heuristic routing: planning, fleet simulation and benchmarking", "dynroute"};
    app.set_config("--config", "", "Read flags from a TOML/INI file (command-line flags win)");
    app.require_subcommand(1, 1);
    const std::string algo_help = "Algorithm: ucs, greedy, astar, rrt, dyn_astar";
    const auto algo_check = CLI::IsMember({"ucs", "greedy", "astar", "rrt", "dyn_astar"});

    auto* plan_cmd = app.add_subcommand("plan", "Plan one query on the world state at its departure time");
    plan_cmd->add_option("--scenario", cfg.scenarios, "Scenario file")->required()->expected(1);
    plan_cmd->add_option("--algo", cfg.algo, algo_help)->check(algo_check);
    plan_cmd->add_option("--query", cfg.query, "Query index")->check(CLI::Range(0ul, 1000000ul));
    plan_cmd->add_option("--out", cfg.out, "Write the plan document here");
    add_common(plan_cmd, cfg);

    auto* sim_cmd = app.add_subcommand("simulate", "Run the fleet simulation and write trace.json + vehicles.csv");
    sim_cmd->add_option("--scenario", cfg.scenarios, "Scenario file")->required()->expected(1);
    sim_cmd->add_option("--algo", cfg.algo, algo_help)->check(algo_check);
    sim_cmd->add_option("--out", cfg.out, "Output directory (default dynroute_out)");
    sim_cmd->add_flag("--allow-stranded", cfg.allow_stranded, "Exit 0 even if a vehicle is stranded");
    sim_cmd->add_flag("--no-sharing", cfg.no_sharing, "Do not ingest crowd-sensed observations");
    add_common(sim_cmd, cfg);

    auto* bench_cmd = app.add_subcommand("bench", "Score every algorithm on a scenario suite");
    bench_cmd->add_option("--suite", cfg.suite, "Directory of .scn files")->required();
    bench_cmd->add_option("--rho", cfg.rho, "Tolerance: correct iff realized <= rho x oracle")->check(CLI::Range(1.0, 1000.0));
    bench_cmd->add_option("--jobs", cfg.jobs, "Parallel scenario runs")->check(CLI::Range(1u, 256u));
    bench_cmd->add_option("--out", cfg.out, "Output directory (default dynroute_bench)");
    bench_cmd->add_flag("--no-sharing", cfg.no_sharing, "Do not ingest crowd-sensed observations");
    add_common(bench_cmd, cfg);

    auto* validate_cmd = app.add_subcommand("validate", "Parse and validate scenarios without running them");
    validate_cmd->add_option("--scenario", cfg.scenarios, "Scenario file (repeatable)");
    validate_cmd->add_option("--suite", cfg.suite, "Directory of .scn files");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? code(ExitCode::Ok) : code(ExitCode::Usage);
    }

    try {
        if (plan_cmd->parsed()) return cmd_plan(cfg, out);
        if (sim_cmd->parsed()) return cmd_simulate(cfg, out);
        if (bench_cmd->parsed()) return cmd_bench(cfg, out);
        if (validate_cmd->parsed()) return cmd_validate(cfg, out);
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return code(ExitCode::Usage);
    } catch (const ScenarioError& ex) {
        err << "invalid scenario: " << ex.what() << '\n';
        return code(ExitCode::InvalidScenario);
    } catch (const OracleRefusal& ex) {
        err << "suite configuration error: " << ex.what() << '\n';
        return code(ExitCode::SuiteConfig);
    } catch (const std::filesystem::filesystem_error& ex) {
        err << "i/o error: " << ex.what() << '\n';
        return code(ExitCode::Io);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return code(ExitCode::Internal);
    }
    return code(ExitCode::Usage);
}

}  // namespace dynroute::cli
