#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "dynroute/fleet_sim.hpp"
#include "helpers.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using dynroute::cli::ExitCode;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "dynroute");
    std::ostringstream out, err;
    const int code = dynroute::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh scratch directory per test case, removed on exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dynroute_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& content) const {
        std::ofstream(path / name, std::ios::binary) << content;
        return path / name;
    }
};

int code(ExitCode c) { return static_cast<int>(c); }

bool has_partial_files(const fs::path& dir) {
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.path().string().ends_with(".partial")) return true;
    return false;
}

const std::string kStranding = R"({
  "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 100, "y": 0}],
  "edges": [{"id": "e1", "from": "a", "to": "b", "length_m": 100, "base_time_s": 10}],
  "events": [{"t_s": 0, "kind": "block_edge", "target": "e1"}],
  "queries": [{"vehicle": "v0", "start": "a", "goal": "b", "depart_s": 0}]
}
)";

}  // namespace

TEST_CASE("plan prints the route and exits 0") {
    TempDir tmp("plan");
    const auto scn = tmp.write("d.scn", testing::diamond_doc());
    const auto r = run_cli({"plan", "--scenario", scn.string(), "--algo", "ucs", "--out", (tmp.path / "plan.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("path: a b d") != std::string::npos);
    CHECK(r.out.find("g_cost: 2") != std::string::npos);
    const auto doc = nlohmann::json::parse(read(tmp.path / "plan.json"));
    CHECK(doc["status"] == "Found");
    CHECK(doc["g_cost"] == 2.0);
    CHECK_FALSE(has_partial_files(tmp.path));
}

TEST_CASE("plan exits with the Unreachable code when blocked at departure") {
    TempDir tmp("unreach");
    const auto scn = tmp.write("s.scn", kStranding);
    const auto r = run_cli({"plan", "--scenario", scn.string()});
    CHECK(r.code == code(ExitCode::Unreachable));
    CHECK(r.out.find("status: Unreachable") != std::string::npos);
}

TEST_CASE("weights 1,0,0,0 reproduce uniform-cost search") {
    const auto scn = (testing::source_dir() / "suites/fixtures/grid10_congestion.scn").string();
    for (const char* q : {"0", "1"}) {
        const auto ucs = run_cli({"plan", "--scenario", scn, "--algo", "ucs", "--query", q});
        const auto dyn = run_cli({"plan", "--scenario", scn, "--weights", "1,0,0,0", "--query", q});
        REQUIRE(ucs.code == 0);
        REQUIRE(dyn.code == 0);
        auto g_line = [](const std::string& s) {
            const auto at = s.find("g_cost:");
            return s.substr(at, s.find('\n', at) - at);
        };
        CHECK(g_line(ucs.out) == g_line(dyn.out));
    }
}

TEST_CASE("simulate: stranded vehicles give a nonzero exit unless allowed") {
    TempDir tmp("strand");
    const auto scn = tmp.write("s.scn", kStranding);
    const auto strict = run_cli({"simulate", "--scenario", scn.string(), "--out", (tmp.path / "a").string()});
    CHECK(strict.code == code(ExitCode::Stranded));
    CHECK(strict.out.find("v0: Stranded") != std::string::npos);
    const auto lenient =
        run_cli({"simulate", "--scenario", scn.string(), "--out", (tmp.path / "b").string(), "--allow-stranded"});
    CHECK(lenient.code == 0);
    CHECK(fs::exists(tmp.path / "b" / "trace.json"));
}

TEST_CASE("simulate on a quiet scenario matches the planned cost") {
    TempDir tmp("quiet");
    const auto scn = tmp.write("m.scn", testing::diamond_doc());
    const auto plan = run_cli({"plan", "--scenario", scn.string(), "--algo", "ucs"});
    const auto sim = run_cli({"simulate", "--scenario", scn.string(), "--algo", "ucs", "--out", tmp.path.string()});
    REQUIRE(sim.code == 0);
    CHECK(plan.out.find("g_cost: 2\n") != std::string::npos);
    CHECK(read(tmp.path / "vehicles.csv") == "vehicle,status,realized_cost_s,arrival_s,replans,path\nv0,Arrived,2,2,0,a b d\n");
    CHECK_FALSE(has_partial_files(tmp.path));
}

TEST_CASE("validate") {
    TempDir tmp("validate");
    SUBCASE("valid file") {
        const auto scn = tmp.write("ok.scn", testing::minimal_doc());
        const auto r = run_cli({"validate", "--scenario", scn.string()});
        CHECK(r.code == 0);
        CHECK(r.out == "OK " + scn.string() + "\n");
    }
    SUBCASE("dangling node id names the element and line") {
        std::string doc = testing::minimal_doc();
        doc.replace(doc.find("\"to\": \"b\""), 9, "\"to\": \"n99\"");
        const auto scn = tmp.write("bad.scn", doc);
        const auto r = run_cli({"validate", "--scenario", scn.string()});
        CHECK(r.code == code(ExitCode::InvalidScenario));
        const auto line = nlohmann::json::parse(r.out);
        CHECK(line["element"] == "n99");
        CHECK(line["line"] == 3);
        CHECK(line["kind"] == "validation");
    }
    SUBCASE("unsorted events") {
        std::string doc = testing::minimal_doc();
        doc.insert(doc.find("  \"queries\""),
                   "  \"events\": [{\"t_s\": 5, \"kind\": \"block_edge\", \"target\": \"e1\"},\n"
                   "             {\"t_s\": 1, \"kind\": \"unblock_edge\", \"target\": \"e1\"}],\n");
        const auto scn = tmp.write("unsorted.scn", doc);
        const auto ok = tmp.write("ok.scn", testing::minimal_doc());
        const auto r = run_cli({"validate", "--scenario", ok.string(), "--scenario", scn.string()});
        CHECK(r.code == code(ExitCode::InvalidScenario));
        CHECK(r.out.rfind("OK ", 0) == 0);
        const auto second = nlohmann::json::parse(r.out.substr(r.out.find('\n') + 1));
        CHECK(second["element"] == "events[1]");
    }
    SUBCASE("bundled suite is valid") {
        const auto r = run_cli({"validate", "--suite", (testing::source_dir() / "suites/static").string()});
        CHECK(r.code == 0);
    }
}

TEST_CASE("bench") {
    TempDir tmp("bench");
    SUBCASE("empty suite directory is a usage error") {
        fs::create_directories(tmp.path / "empty");
        const auto r = run_cli({"bench", "--suite", (tmp.path / "empty").string(), "--out", (tmp.path / "o").string()});
        CHECK(r.code == code(ExitCode::Usage));
    }
    SUBCASE("generous rho accepts every arriving run") {
        fs::create_directories(tmp.path / "suite");
        fs::copy_file(testing::source_dir() / "suites/fixtures/v2n_two_vehicle.scn", tmp.path / "suite/a.scn");
        tmp.write("suite/b.scn", testing::diamond_doc());
        const auto r = run_cli({"bench", "--suite", (tmp.path / "suite").string(), "--rho", "10", "--out",
                                (tmp.path / "o").string()});
        REQUIRE(r.code == 0);
        const std::string csv = read(tmp.path / "o" / "scores.csv");
        CHECK(csv.find("dyn_astar,1,") != std::string::npos);
        CHECK(csv.find("ucs,1,") != std::string::npos);
        CHECK(fs::exists(tmp.path / "o" / "cells.csv"));
        CHECK(read(tmp.path / "o" / "scores.txt") == r.out);
        CHECK_FALSE(has_partial_files(tmp.path));
    }
}

TEST_CASE("config file and flags are interchangeable; flags win") {
    TempDir tmp("config");
    const auto scn = (testing::source_dir() / "suites/fixtures/grid10_congestion.scn").string();
    const auto by_flags = run_cli({"simulate", "--scenario", scn, "--algo", "astar", "--epoch-s", "60", "--out",
                                   (tmp.path / "flags").string()});
    const auto cfg = tmp.write("run.toml", "[simulate]\nalgo = \"astar\"\nepoch-s = 60\nscenario = \"" + scn + "\"\n");
    const auto by_file = run_cli({"--config", cfg.string(), "simulate", "--out", (tmp.path / "file").string()});
    REQUIRE(by_flags.code == 0);
    REQUIRE(by_file.code == 0);
    CHECK(read(tmp.path / "flags/trace.json") == read(tmp.path / "file/trace.json"));

    const auto override = run_cli({"--config", cfg.string(), "simulate", "--epoch-s", "15", "--out",
                                   (tmp.path / "override").string()});
    const auto direct = run_cli({"simulate", "--scenario", scn, "--algo", "astar", "--epoch-s", "15", "--out",
                                 (tmp.path / "direct").string()});
    REQUIRE(override.code == 0);
    CHECK(read(tmp.path / "override/trace.json") == read(tmp.path / "direct/trace.json"));
    CHECK(read(tmp.path / "override/trace.json") != read(tmp.path / "flags/trace.json"));
}

TEST_CASE("argument errors") {
    const auto scn = (testing::source_dir() / "suites/fixtures/v2n_two_vehicle.scn").string();
    CHECK(run_cli({}).code == code(ExitCode::Usage));
    CHECK(run_cli({"plan"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"plan", "--scenario", scn, "--algo", "dijkstra"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"plan", "--scenario", scn, "--weights", "1,2"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"plan", "--scenario", scn, "--weights", "0,1,1,1"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"plan", "--scenario", scn, "--query", "9"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"simulate", "--scenario", scn, "--epoch-s", "0"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"simulate", "--scenario", scn, "--alpha", "2"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"bench", "--suite", ".", "--rho", "0.5"}).code == code(ExitCode::Usage));
    CHECK(run_cli({"plan", "--scenario", "/nonexistent/x.scn"}).code == code(ExitCode::Io));
    const auto help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("simulate") != std::string::npos);
}
