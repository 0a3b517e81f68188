// Generates the bundled scenario suites. Output is a pure function of --seed.
//
//   dynroute_gen_suite --out suites --seed 20261019

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <map>
#include <set>
#include <span>
#include <tuple>
#include <string>

#include "CLI11.hpp"
#include "dynroute/planners.hpp"
#include "dynroute/scenario.hpp"

namespace fs = std::filesystem;
using namespace dynroute;

namespace {

constexpr double kSpacing = 100.0;

struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    std::vector<double> h3;

    NodeId at(std::size_t r, std::size_t c) const { return node_at(r * cols + c); }
};

// Speed for the undirected link (r1,c1)-(r2,c2).
using SpeedFn = std::function<double(std::size_t, std::size_t, std::size_t, std::size_t)>;

Grid make_speed_grid(std::size_t rows, std::size_t cols, const SpeedFn& speed) {
    Grid g;
    g.rows = rows;
    g.cols = cols;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            g.nodes.push_back({"n" + std::to_string(r * cols + c), static_cast<double>(c) * kSpacing,
                               static_cast<double>(r) * kSpacing});
    auto link = [&](std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
        const double v = speed(std::min(r1, r2), std::min(c1, c2), std::max(r1, r2), std::max(c1, c2));
        g.edges.push_back({"e" + std::to_string(g.edges.size()), node_at(r1 * cols + c1),
                           node_at(r2 * cols + c2), kSpacing, kSpacing / v});
    };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) link(r, c, r, c + 1);
            if (c > 0) link(r, c, r, c - 1);
            if (r + 1 < rows) link(r, c, r + 1, c);
            if (r > 0) link(r, c, r - 1, c);
        }
    g.h3.assign(rows * cols, 0.0);
    return g;
}

Scenario to_scenario(const Grid& g, std::string name, std::uint64_t seed) {
    Scenario sc{build_graph(g.nodes, g.edges), HeuristicField(std::vector<double>(g.h3.size(), 0.0), g.h3), {}, {},
                {std::move(name), seed}};
    return sc;
}

Query make_query(std::string vehicle, NodeId s, NodeId t, double depart) {
    Query q;
    q.vehicle = std::move(vehicle);
    q.start = s;
    q.goal = t;
    q.depart_s = depart;
    return q;
}

std::vector<EdgeId> reverse_edges(const Topology& topo, std::span<const EdgeId> edges) {
    std::vector<EdgeId> out;
    for (EdgeId e : edges) {
        const auto& rec = topo.edge(e);
        for (EdgeId f : topo.out_edges(rec.to))
            if (topo.edge(f).to == rec.from) out.push_back(f);
    }
    return out;
}

PlanResult initial_route(const Scenario& sc, const Query& q) {
    return dijkstra_ucs(snapshot(sc.graph, sc.initial_field, 0.0), q.start, q.goal);
}

void sort_events(Scenario& sc) {
    std::ranges::stable_sort(sc.events, {}, &Event::at_time_s);
}

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
    double chance() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    std::uint64_t next_seed() { return rng_(); }

    // Mostly 10 m/s with fast arterials and slow streets mixed in.
    Grid city(std::size_t rows, std::size_t cols) {
        std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> speeds;
        auto draw = [this]() {
            const double u = chance();
            return u < 0.15 ? 20.0 : (u < 0.30 ? 5.0 : 10.0);
        };
        Grid g = make_speed_grid(rows, cols, [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
            auto key = std::make_tuple(a, b, c, d);
            auto it = speeds.find(key);
            if (it == speeds.end()) it = speeds.emplace(key, draw()).first;
            return it->second;
        });
        for (auto& h : g.h3)
            if (chance() < 0.1) h = static_cast<double>(pick(1, 3));
        return g;
    }

    std::pair<NodeId, NodeId> far_pair(const Grid& g) {
        const std::size_t r0 = pick(0, 1), c0 = pick(0, 1);
        const std::size_t r1 = g.rows - 1 - pick(0, 1), c1 = g.cols - 1 - pick(0, 1);
        if (chance() < 0.5) return {g.at(r0, c0), g.at(r1, c1)};
        return {g.at(r1, c0), g.at(r0, c1)};
    }

    void maybe_context(Query& q) {
        const double u = chance();
        if (u < 0.15) q.context.passenger_prefers_comfort = true;
        else if (u < 0.25) q.context.rough_road_reported = true;
        else if (u < 0.35) q.context.heavy_traffic_reported = true;
    }

    // Congestion appears on the initial route after departure.
    Scenario congestion(std::size_t k) {
        Grid g = city(pick(7, 9), pick(7, 9));
        Scenario sc = to_scenario(g, "congestion_" + std::to_string(k), next_seed());
        auto [s, t] = far_pair(g);
        Query q = make_query("v0", s, t, 0.0);
        maybe_context(q);
        const PlanResult route = initial_route(sc, q);
        const auto& topo = sc.graph.topology();
        const std::size_t n = route.edges.size();
        const std::size_t from = pick(n / 4, n / 2);
        const std::size_t len = std::min(n - from, pick(3, 6));
        const double onset = 15.0 * static_cast<double>(pick(1, 4));
        const double factor = static_cast<double>(pick(3, 8));
        std::vector<EdgeId> hit(route.edges.begin() + static_cast<std::ptrdiff_t>(from),
                                route.edges.begin() + static_cast<std::ptrdiff_t>(from + len));
        for (EdgeId e : reverse_edges(topo, hit)) hit.push_back(e);
        for (EdgeId e : hit) sc.events.push_back({onset, SetCongestion{e, factor}});
        if (chance() < 0.5) {
            const double clear = onset + 30.0 * static_cast<double>(pick(4, 8));
            for (EdgeId e : hit) sc.events.push_back({clear, SetCongestion{e, 1.0}});
        }
        sort_events(sc);
        sc.queries.push_back(q);
        return sc;
    }

    // A link on the route closes for a while, then reopens.
    Scenario blockage(std::size_t k) {
        Grid g = city(pick(7, 9), pick(7, 9));
        Scenario sc = to_scenario(g, "blockage_" + std::to_string(k), next_seed());
        auto [s, t] = far_pair(g);
        Query q = make_query("v0", s, t, 0.0);
        maybe_context(q);
        const PlanResult route = initial_route(sc, q);
        const auto& topo = sc.graph.topology();
        const std::size_t n = route.edges.size();
        const std::size_t count = pick(1, 3);
        const double close = 30.0 * static_cast<double>(pick(0, 2));
        const double reopen = close + 30.0 * static_cast<double>(pick(2, 6));
        std::set<std::size_t> chosen;
        while (chosen.size() < std::min(count, n - n / 3)) chosen.insert(pick(n / 3, n - 1));
        std::vector<EdgeId> hit;
        for (std::size_t i : chosen) hit.push_back(route.edges[i]);
        for (EdgeId e : reverse_edges(topo, hit)) hit.push_back(e);
        for (EdgeId e : hit) {
            sc.events.push_back({close, BlockEdge{e}});
            sc.events.push_back({reopen, UnblockEdge{e}});
        }
        sort_events(sc);
        sc.queries.push_back(q);
        return sc;
    }

    // Rough surface around a few route nodes, reported to the comfort model.
    Scenario comfort(std::size_t k) {
        Grid g = city(pick(7, 9), pick(7, 9));
        Scenario sc = to_scenario(g, "comfort_" + std::to_string(k), next_seed());
        auto [s, t] = far_pair(g);
        Query q = make_query("v0", s, t, 0.0);
        if (chance() < 0.4) q.context.passenger_prefers_comfort = true;
        const PlanResult route = initial_route(sc, q);
        const auto& topo = sc.graph.topology();
        const std::size_t n = route.path.size();
        const double at = 30.0 * static_cast<double>(pick(0, 1));
        const std::size_t count = pick(1, 3);
        std::set<std::size_t> chosen;
        while (chosen.size() < count) chosen.insert(pick(n / 3, n - 2));
        for (std::size_t i : chosen) {
            const NodeId node = route.path[i];
            const double penalty = 10.0 * static_cast<double>(pick(3, 8));
            for (std::size_t e = 0; e < topo.edge_count(); ++e)
                if (topo.edge(edge_at(e)).to == node) sc.events.push_back({at, SetComfort{edge_at(e), penalty}});
            sc.events.push_back({at, SetNodeComfort{node, penalty}});
        }
        sort_events(sc);
        sc.queries.push_back(q);
        return sc;
    }

    // Straight line through slow streets; a fast ring road around them.
    Scenario deceptive(std::size_t k) {
        const std::size_t rows = pick(7, 9), cols = pick(7, 9);
        const double slow = chance() < 0.5 ? 2.0 : 2.5;
        Grid g = make_speed_grid(rows, cols, [&](std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
            const bool ring = (r1 == 0 && r2 == 0) || (r1 == rows - 1 && r2 == rows - 1) || (c1 == 0 && c2 == 0) ||
                              (c1 == cols - 1 && c2 == cols - 1);
            return ring ? 20.0 : slow;
        });
        Scenario sc = to_scenario(g, "deceptive_" + std::to_string(k), next_seed());
        const std::size_t mid = pick(2, rows - 3);
        const bool horizontal = chance() < 0.5;
        Query q = horizontal ? make_query("v0", g.at(mid, 0), g.at(std::min(rows - 1, mid + pick(0, 1)), cols - 1), 0.0)
                             : make_query("v0", g.at(0, std::min(cols - 1, mid)), g.at(rows - 1, pick(2, cols - 3)), 0.0);
        maybe_context(q);
        // Light traffic on a few interior streets.
        const auto& topo = sc.graph.topology();
        for (std::size_t i = 0, m = pick(1, 4); i < m; ++i)
            sc.events.push_back({30.0 * static_cast<double>(pick(1, 4)),
                                 SetCongestion{edge_at(pick(0, topo.edge_count() - 1)), 1.0 + 0.5 * static_cast<double>(pick(1, 3))}});
        sort_events(sc);
        sc.queries.push_back(q);
        return sc;
    }

    // Unreported rough road on the shared corridor; later vehicles can only
    // learn about it from the ones ahead.
    Scenario crowd(std::size_t k) {
        Grid g = city(pick(7, 9), pick(7, 9));
        Scenario sc = to_scenario(g, "crowd_" + std::to_string(k), next_seed());
        auto [s, t] = far_pair(g);
        const std::size_t fleet = pick(6, 9);
        const double gap = 30.0 * static_cast<double>(pick(2, 4));
        for (std::size_t v = 0; v < fleet; ++v) sc.queries.push_back(make_query("v" + std::to_string(v), s, t, gap * static_cast<double>(v)));
        const PlanResult route = initial_route(sc, sc.queries.front());
        const std::size_t n = route.edges.size();
        const std::size_t count = pick(1, 2);
        std::set<std::size_t> chosen;
        while (chosen.size() < count) chosen.insert(pick(0, n / 2));
        for (std::size_t i : chosen)
            sc.events.push_back({0.0, SetComfort{route.edges[i], 10.0 * static_cast<double>(pick(3, 7))}});
        sort_events(sc);
        return sc;
    }

    Scenario static_case(std::size_t k) {
        Grid g = city(pick(5, 9), pick(5, 9));
        std::ranges::fill(g.h3, 0.0);
        Scenario sc = to_scenario(g, "static_" + std::to_string(k), next_seed());
        const std::size_t n = g.rows * g.cols;
        for (std::size_t v = 0, m = pick(1, 3); v < m; ++v) {
            NodeId s = node_at(pick(0, n - 1)), t = node_at(pick(0, n - 1));
            while (t == s) t = node_at(pick(0, n - 1));
            sc.queries.push_back(make_query("v" + std::to_string(v), s, t, 20.0 * static_cast<double>(pick(0, 6))));
        }
        return sc;
    }

private:
    std::mt19937_64 rng_;
};

// 10x10 uniform grid with twelve congestion events, all after t = 0.
Scenario grid10_congestion() {
    Grid g = make_speed_grid(10, 10, [](std::size_t, std::size_t, std::size_t, std::size_t) { return 10.0; });
    Scenario sc = to_scenario(g, "grid10_congestion", 10);
    const auto& topo = sc.graph.topology();
    const char* hot[] = {"n1", "n2", "n3", "n4", "n5", "n6", "n16", "n26", "n36", "n46", "n56", "n66"};
    for (std::size_t i = 0; i < 12; ++i) {
        const NodeId a = topo.node_id(hot[i]);
        const EdgeId e = topo.out_edges(a).front();
        sc.events.push_back({30.0 * static_cast<double>(1 + i / 2), SetCongestion{e, 2.0 + static_cast<double>(i % 3)}});
    }
    sc.queries.push_back(make_query("v0", topo.node_id("n0"), topo.node_id("n99"), 0.0));
    sc.queries.push_back(make_query("v1", topo.node_id("n9"), topo.node_id("n90"), 45.0));
    return sc;
}

// Two routes S->A->G (20 s) and S->B->G (30 s). The short one hides a rough
// edge S->A that only the leader can report.
Scenario v2n_two_vehicle() {
    std::vector<NodeRecord> nodes = {{"A", 100, 0}, {"B", 100, -100}, {"G", 200, 0}, {"S", 0, 0}};
    const NodeId a = node_at(0), b = node_at(1), g = node_at(2), s = node_at(3);
    std::vector<EdgeRecord> edges = {{"e1", s, a, 100, 10}, {"e2", a, g, 100, 10}, {"e3", s, b, 150, 15}, {"e4", b, g, 150, 15}};
    Scenario sc{build_graph(nodes, edges), HeuristicField::zeros(4), {}, {}, {"v2n_two_vehicle", 2}};
    const auto& topo = sc.graph.topology();
    sc.events.push_back({0.0, SetComfort{topo.edge_id("e1"), 100.0}});
    sc.queries.push_back(make_query("leader", topo.node_id("S"), topo.node_id("G"), 0.0));
    sc.queries.push_back(make_query("follower", topo.node_id("S"), topo.node_id("G"), 30.0));
    return sc;
}

void write(const fs::path& path, const Scenario& sc) {
    const std::string text = serialize_scenario(sc);
    (void)load_scenario(text);  // must round-trip through the validator
    std::ofstream(path, std::ios::binary) << text;
}

std::string padded(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the bundled scenario suites", "dynroute_gen_suite"};
    std::string out = "suites";
    std::uint64_t seed = 20261019;
    std::size_t per_type = 20;
    app.add_option("--out", out, "Output root directory");
    app.add_option("--seed", seed, "Generator seed");
    app.add_option("--per-type", per_type, "Dynamic scenarios per type")->check(CLI::Range(1ul, 1000ul));
    CLI11_PARSE(app, argc, argv);

    const fs::path root(out);
    for (const char* sub : {"dynamic", "static", "fixtures"}) {
        fs::remove_all(root / sub);
        fs::create_directories(root / sub);
    }

    Generator gen(seed);
    std::size_t index = 0;
    for (std::size_t k = 0; k < per_type; ++k) {
        write(root / "dynamic" / (padded(index++) + "_congestion.scn"), gen.congestion(k));
        write(root / "dynamic" / (padded(index++) + "_blockage.scn"), gen.blockage(k));
        write(root / "dynamic" / (padded(index++) + "_comfort.scn"), gen.comfort(k));
        write(root / "dynamic" / (padded(index++) + "_deceptive.scn"), gen.deceptive(k));
        write(root / "dynamic" / (padded(index++) + "_crowd.scn"), gen.crowd(k));
    }
    for (std::size_t k = 0; k < 20; ++k) write(root / "static" / (padded(k) + "_static.scn"), gen.static_case(k));
    write(root / "fixtures" / "grid10_congestion.scn", grid10_congestion());
    write(root / "fixtures" / "v2n_two_vehicle.scn", v2n_two_vehicle());
    std::cout << "wrote " << index << " dynamic, 20 static and 2 fixture scenarios under " << root.string() << '\n';
    return 0;
}
