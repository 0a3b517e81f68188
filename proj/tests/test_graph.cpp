#include <random>

#include "doctest.h"
#include "dynroute/graph.hpp"
#include "dynroute/heuristics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dynroute;

namespace {

Event random_event(std::mt19937_64& rng, const Topology& topo, double t) {
    std::uniform_int_distribution<std::size_t> kind(0, 4);
    std::uniform_int_distribution<std::size_t> edge(0, topo.edge_count() - 1);
    std::uniform_int_distribution<std::size_t> node(0, topo.node_count() - 1);
    std::uniform_real_distribution<double> mag(0.0, 5.0);
    switch (kind(rng)) {
        case 0: return {t, SetCongestion{edge_at(edge(rng)), 1.0 + mag(rng)}};
        case 1: return {t, SetComfort{edge_at(edge(rng)), mag(rng)}};
        case 2: return {t, SetNodeComfort{node_at(node(rng)), mag(rng)}};
        case 3: return {t, BlockEdge{edge_at(edge(rng))}};
        default: return {t, UnblockEdge{edge_at(edge(rng))}};
    }
}

// Number of scalar attributes that differ between two overlay states.
std::size_t attribute_diffs(const RoadGraph& g1, const HeuristicField& f1, const RoadGraph& g2, const HeuristicField& f2) {
    std::size_t d = 0;
    for (std::size_t e = 0; e < g1.topology().edge_count(); ++e) {
        const auto& a = g1.condition(edge_at(e));
        const auto& b = g2.condition(edge_at(e));
        d += a.congestion_factor != b.congestion_factor;
        d += a.comfort_penalty != b.comfort_penalty;
        d += a.blocked != b.blocked;
    }
    for (std::size_t n = 0; n < f1.size(); ++n) {
        d += f1.comfort(node_at(n)) != f2.comfort(node_at(n));
        d += f1.safety(node_at(n)) != f2.safety(node_at(n));
    }
    return d;
}

}  // namespace

TEST_CASE("make_grid builds a 4-connected lattice") {
    SUBCASE("1x2") {
        const RoadGraph g = make_grid(1, 2, 100, 10);
        CHECK(g.topology().node_count() == 2);
        REQUIRE(g.topology().edge_count() == 2);
        for (const auto& e : g.topology().edges()) CHECK(e.base_time_s == 10.0);
    }
    SUBCASE("3x3 has 24 directed edges") {
        const RoadGraph g = make_grid(3, 3, 100, 10);
        CHECK(g.topology().node_count() == 9);
        CHECK(g.topology().edge_count() == 24);
    }
    SUBCASE("100x100") { CHECK(make_grid(100, 100, 100, 10).topology().node_count() == 10'000); }
    SUBCASE("positions lie on a regular lattice") {
        const RoadGraph g = make_grid(2, 3, 50, 5);
        const auto& topo = g.topology();
        CHECK(topo.node(topo.node_id("n5")).x == 100.0);
        CHECK(topo.node(topo.node_id("n5")).y == 50.0);
    }
    SUBCASE("zero dimensions and bad magnitudes are rejected") {
        CHECK_THROWS_AS(make_grid(0, 3, 100, 10), std::invalid_argument);
        CHECK_THROWS_AS(make_grid(3, 0, 100, 10), std::invalid_argument);
        CHECK_THROWS_AS(make_grid(3, 3, 0, 10), std::invalid_argument);
        CHECK_THROWS_AS(make_grid(3, 3, 100, -1), std::invalid_argument);
    }
}

TEST_CASE("topology validation") {
    const NodeId a = node_at(0), b = node_at(1);
    CHECK_THROWS(build_graph({{"a", 0, 0}, {"a", 1, 1}}, {}));
    CHECK_THROWS(build_graph({{"a", 0, 0}, {"b", 1, 1}}, {{"e", a, b, 1, 1}, {"e", b, a, 1, 1}}));
    CHECK_THROWS(build_graph({{"a", 0, 0}, {"b", 1, 1}}, {{"e", a, node_at(7), 1, 1}}));
    CHECK_THROWS(build_graph({{"a", 0, 0}, {"b", 1, 1}}, {{"e", a, b, 0, 1}}));
    CHECK_THROWS(build_graph({{"a", 0, 0}, {"b", 1, 1}}, {{"e", a, b, 1, 0}}));
    CHECK_THROWS(build_graph({{"a", 0, std::nan("")}}, {}));
}

TEST_CASE("adjacency matches the edge set exactly") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const RoadGraph g = oracle::random_graph(seed, 8, 0.4);
        const auto& topo = g.topology();
        std::size_t listed = 0;
        for (std::size_t n = 0; n < topo.node_count(); ++n) {
            const auto out = topo.out_edges(node_at(n));
            CHECK(std::is_sorted(out.begin(), out.end()));
            CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
            for (EdgeId e : out) CHECK(topo.edge(e).from == node_at(n));
            listed += out.size();
        }
        CHECK(listed == topo.edge_count());
    }
}

TEST_CASE("neighbors") {
    RoadGraph g = make_grid(3, 3, 100, 10);
    const auto& topo = g.topology();
    HeuristicField f = HeuristicField::zeros(9);

    SUBCASE("interior node has four successors in ascending edge order") {
        const auto nb = neighbors(snapshot(g, f, 0), topo.node_id("n4"));
        REQUIRE(nb.size() == 4);
        for (std::size_t i = 1; i < nb.size(); ++i) CHECK(index(nb[i - 1].edge) < index(nb[i].edge));
    }
    SUBCASE("effective time is base times factor") {
        const EdgeId e = topo.out_edges(topo.node_id("n0")).front();
        apply_event(g, f, {0, SetCongestion{e, 1.5}});
        const auto nb = neighbors(snapshot(g, f, 0), topo.node_id("n0"));
        CHECK(nb.front().travel_time_s == 15.0);
    }
    SUBCASE("all edges blocked gives an empty list") {
        for (EdgeId e : topo.out_edges(topo.node_id("n4"))) apply_event(g, f, {0, BlockEdge{e}});
        CHECK(neighbors(snapshot(g, f, 0), topo.node_id("n4")).empty());
    }
    SUBCASE("repeated calls are identical") {
        const auto snap = snapshot(g, f, 0);
        for (std::size_t n = 0; n < 9; ++n) CHECK(neighbors(snap, node_at(n)) == neighbors(snap, node_at(n)));
    }
    SUBCASE("unknown node throws") { CHECK_THROWS_AS(neighbors(snapshot(g, f, 0), node_at(99)), UnknownIdError); }
}

TEST_CASE("apply_event examples") {
    RoadGraph g = make_grid(2, 2, 100, 10);
    HeuristicField f({0, 0, 0, 0}, {1, 2, 3, 4});
    const EdgeId e1 = edge_at(1);

    SUBCASE("SetCongestion assigns the factor") {
        const RoadGraph before = g;
        apply_event(g, f, {0, SetCongestion{e1, 2.0}});
        CHECK(g.condition(e1).congestion_factor == 2.0);
        for (std::size_t e = 0; e < g.topology().edge_count(); ++e)
            if (e != 1) CHECK(g.condition(edge_at(e)) == before.condition(edge_at(e)));
    }
    SUBCASE("Unblock restores the pre-block factor") {
        apply_event(g, f, {0, SetCongestion{e1, 3.0}});
        apply_event(g, f, {1, BlockEdge{e1}});
        CHECK(g.condition(e1).blocked);
        apply_event(g, f, {2, UnblockEdge{e1}});
        CHECK_FALSE(g.condition(e1).blocked);
        CHECK(g.condition(e1).congestion_factor == 3.0);
    }
    SUBCASE("SetNodeComfortH writes h2 only") {
        apply_event(g, f, {0, SetNodeComfort{node_at(3), 4.0}});
        CHECK(f.comfort(node_at(3)) == 4.0);
        CHECK(f.safety(node_at(3)) == 4.0);
        CHECK(f.safety(node_at(0)) == 1.0);
    }
    SUBCASE("bounds and ids are enforced") {
        CHECK_THROWS_AS(apply_event(g, f, {0, SetCongestion{e1, 0.5}}), std::invalid_argument);
        CHECK_THROWS_AS(apply_event(g, f, {0, SetComfort{e1, -1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(apply_event(g, f, {0, SetCongestion{edge_at(99), 2.0}}), UnknownIdError);
        CHECK_THROWS_AS(apply_event(g, f, {0, SetNodeComfort{node_at(99), 2.0}}), UnknownIdError);
    }
}

TEST_CASE("event isolation: each event changes at most one attribute of one element") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        RoadGraph g = make_grid(2, 3, 100, 10);
        HeuristicField f({0, 0, 0, 0, 0, 0}, {1, 0, 2, 0, 3, 0});
        for (int step = 0; step < 40; ++step) {
            const Event ev = random_event(rng, g.topology(), step);
            RoadGraph g2 = g;
            HeuristicField f2 = f;
            apply_event(g2, f2, ev);
            CHECK(attribute_diffs(g, f, g2, f2) <= 1);
            g = std::move(g2);
            f = std::move(f2);
        }
    }
}

TEST_CASE("snapshots never change after later events") {
    struct Taken {
        GraphSnapshot snap;
        std::vector<EdgeCondition> conditions;
        std::vector<double> comfort;
    };
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        RoadGraph g = make_grid(3, 3, 100, 10);
        HeuristicField f = HeuristicField::zeros(9);
        std::vector<Taken> taken;
        for (int step = 0; step < 30; ++step) {
            if (rng() % 3 == 0)
                taken.push_back({snapshot(g, f, step), {g.conditions().begin(), g.conditions().end()},
                                 {f.comfort_values().begin(), f.comfort_values().end()}});
            apply_event(g, f, random_event(rng, g.topology(), step));
        }
        for (const auto& t : taken) {
            for (std::size_t e = 0; e < 24; ++e) CHECK(t.snap.condition(edge_at(e)) == t.conditions[e]);
            for (std::size_t n = 0; n < 9; ++n) CHECK(t.snap.comfort(node_at(n)) == t.comfort[n]);
        }
    }
}

TEST_CASE("snapshot reads the old value after a later SetCongestion") {
    RoadGraph g = make_grid(1, 2, 100, 10);
    HeuristicField f = HeuristicField::zeros(2);
    const GraphSnapshot s = snapshot(g, f, 0);
    apply_event(g, f, {0, SetCongestion{edge_at(0), 4.0}});
    CHECK(s.condition(edge_at(0)).congestion_factor == 1.0);
    CHECK(s.effective_time(edge_at(0)) == 10.0);
    CHECK(snapshot(g, f, 0) == snapshot(g, f, 0));
}

TEST_CASE("h3 survives every event kind") {
    std::mt19937_64 rng(3);
    RoadGraph g = make_grid(3, 3, 100, 10);
    const std::vector<double> h3 = {1, 0, 2, 0, 3, 0, 4, 0, 5};
    HeuristicField f(std::vector<double>(9, 0.0), h3);
    for (int i = 0; i < 500; ++i) apply_event(g, f, random_event(rng, g.topology(), i));
    CHECK(std::equal(h3.begin(), h3.end(), f.safety_values().begin(), f.safety_values().end()));
}

TEST_CASE("natural id ordering") {
    CHECK(natural_less("e2", "e10"));
    CHECK_FALSE(natural_less("e10", "e2"));
    CHECK(natural_less("a", "b"));
    CHECK(natural_less("n9", "n10"));
}

TEST_CASE("grid10_congestion fixture") {
    const Scenario sc = testing::fixture("suites/fixtures/grid10_congestion.scn");
    CHECK(sc.graph.topology().node_count() == 100);
    CHECK(sc.events.size() == 12);
    const GraphSnapshot s = snapshot(sc.graph, sc.initial_field, 0.0);
    for (std::size_t e = 0; e < sc.graph.topology().edge_count(); ++e) CHECK(s.condition(edge_at(e)).congestion_factor == 1.0);
}
