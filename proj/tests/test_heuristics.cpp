#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dynroute/heuristics.hpp"
#include "oracles.hpp"

using namespace dynroute;

namespace {

// All-pairs minimum travel time by Floyd-Warshall.
std::vector<std::vector<double>> all_pairs(const RoadGraph& g) {
    const auto& topo = g.topology();
    const std::size_t n = topo.node_count();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, oracle::kInf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
    for (std::size_t e = 0; e < topo.edge_count(); ++e) {
        const auto& rec = topo.edge(edge_at(e));
        const auto& c = g.condition(edge_at(e));
        if (c.blocked) continue;
        auto& cell = d[index(rec.from)][index(rec.to)];
        cell = std::min(cell, rec.base_time_s * c.congestion_factor);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

}  // namespace

TEST_CASE("time_heuristic") {
    SUBCASE("3-4-5 triangle at 10 m/s") {
        const RoadGraph g = build_graph({{"a", 0, 0}, {"b", 300, 400}}, {{"e", node_at(0), node_at(1), 500, 50}});
        CHECK(time_heuristic(g.topology(), node_at(0), node_at(1)) == doctest::Approx(50.0).epsilon(1e-12));
        CHECK(time_heuristic(g.topology(), node_at(1), node_at(1)) == 0.0);
    }
    SUBCASE("3x3 grid corner to corner is below the true 40 s") {
        const RoadGraph g = make_grid(3, 3, 100, 10);
        const double h = time_heuristic(g.topology(), node_at(0), node_at(8));
        CHECK(h == doctest::Approx(100.0 * std::sqrt(8.0) / 10.0));
        CHECK(h <= all_pairs(g)[0][8]);
        CHECK(all_pairs(g)[0][8] == 40.0);
    }
    SUBCASE("unknown node throws") {
        const RoadGraph g = make_grid(2, 2, 100, 10);
        CHECK_THROWS_AS(time_heuristic(g.topology(), node_at(9), node_at(0)), UnknownIdError);
    }
}

TEST_CASE("h1 is admissible on random grids under random congestion") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t rows = 2 + seed % 9, cols = 10 - seed % 7;
        RoadGraph g = oracle::random_grid(seed, rows, cols);
        HeuristicField f = HeuristicField::zeros(rows * cols);
        for (std::size_t e = 0; e < g.topology().edge_count(); ++e)
            if (rng() % 4 == 0) apply_event(g, f, {0, SetCongestion{edge_at(e), 1.0 + static_cast<double>(rng() % 5)}});
        const auto d = all_pairs(g);
        for (std::size_t u = 0; u < rows * cols; ++u)
            for (std::size_t v = 0; v < rows * cols; ++v)
                CHECK(time_heuristic(g.topology(), node_at(u), node_at(v)) <= d[u][v] + 1e-9);
    }
}

TEST_CASE("h1 is consistent across every edge at free flow") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const RoadGraph g = oracle::random_grid(seed, 4, 5);
        const auto& topo = g.topology();
        for (std::size_t goal = 0; goal < topo.node_count(); ++goal)
            for (const auto& rec : topo.edges())
                CHECK(time_heuristic(topo, rec.from, node_at(goal)) <=
                      rec.base_time_s + time_heuristic(topo, rec.to, node_at(goal)) + 1e-9);
    }
}

TEST_CASE("comfort and safety lookups") {
    HeuristicField f({0, 4.0, 0}, {1.0, 0, 0});
    CHECK(comfort_heuristic(f, node_at(1)) == 4.0);
    CHECK(comfort_heuristic(f, node_at(0)) == 0.0);
    CHECK(safety_heuristic(f, node_at(0)) == 1.0);
    CHECK(safety_heuristic(f, node_at(2)) == 0.0);
    RoadGraph g = make_grid(1, 3, 100, 10);
    apply_event(g, f, {0, SetNodeComfort{node_at(2), 7.5}});
    CHECK(comfort_heuristic(f, node_at(2)) == 7.5);
    CHECK_THROWS(HeuristicField({-1.0}, {0.0}));
    CHECK_THROWS(HeuristicField({0.0}, {std::nan("")}));
    CHECK_THROWS(HeuristicField({0.0, 1.0}, {0.0}));
}

TEST_CASE("combined_f") {
    CHECK(combined_f(5, 2, 1, 0.5, {1, 1, 1, 1}) == 8.5);
    CHECK(combined_f(10, 4, 2, 1, {1, 2, 0.5, 3}) == 22.0);
    CHECK(combined_f(7.25, 3, 9, 1, {1, 0, 0, 0}) == 7.25);
    CHECK_THROWS_AS(combined_f(std::nan(""), 0, 0, 0, {}), std::invalid_argument);
    CHECK_THROWS_AS(combined_f(1, std::numeric_limits<double>::infinity(), 0, 0, {}), std::invalid_argument);
    CHECK_THROWS_AS(combined_f(1, -1, 0, 0, {}), std::invalid_argument);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double g = u(rng), h1 = u(rng), h2 = u(rng), h3 = u(rng), a = u(rng);
        const HeuristicWeights w{0.5 + u(rng), u(rng), u(rng), u(rng)};
        const HeuristicWeights aw{a * w.wg, a * w.w1, a * w.w2, a * w.w3};
        CHECK(combined_f(g, h1, h2, h3, aw) == doctest::Approx(a * combined_f(g, h1, h2, h3, w)).epsilon(1e-12));
    }
}

TEST_CASE("weights validation") {
    CHECK_NOTHROW(HeuristicWeights{1, 0, 0, 0}.validate());
    CHECK_THROWS(HeuristicWeights{0, 1, 1, 1}.validate());
    CHECK_THROWS(HeuristicWeights{1, -1, 1, 1}.validate());
    CHECK_THROWS(HeuristicWeights{1, 1, std::nan(""), 1}.validate());
}

TEST_CASE("ingest_observations") {
    auto setup = [](double alpha) {
        RoadGraph g = build_graph({{"a", 0, 0}, {"b", 100, 0}}, {{"e", node_at(0), node_at(1), 100, 10}});
        return std::pair{g, HeuristicField({0, 0}, {0, 2.0}, alpha)};
    };
    SUBCASE("alpha 1 replaces the factor") {
        auto [g, f] = setup(1.0);
        ingest_observations(g, f, {{edge_at(0), 15.0, 0.0, "v", 1}});
        CHECK(g.condition(edge_at(0)).congestion_factor == 1.5);
    }
    SUBCASE("alpha 0.5 averages") {
        auto [g, f] = setup(0.5);
        ingest_observations(g, f, {{edge_at(0), 20.0, 4.0, "v", 1}});
        CHECK(g.condition(edge_at(0)).congestion_factor == 1.5);
        CHECK(g.condition(edge_at(0)).comfort_penalty == 2.0);
        CHECK(f.comfort(node_at(1)) == 2.0);
        CHECK(f.comfort(node_at(0)) == 0.0);
        CHECK(f.safety(node_at(1)) == 2.0);
    }
    SUBCASE("faster than free flow clamps to 1") {
        auto [g, f] = setup(1.0);
        ingest_observations(g, f, {{edge_at(0), 5.0, 0.0, "v", 1}});
        CHECK(g.condition(edge_at(0)).congestion_factor == 1.0);
    }
    SUBCASE("unknown edge and bad values throw") {
        auto [g, f] = setup(0.3);
        CHECK_THROWS_AS(ingest_observations(g, f, {{edge_at(5), 10.0, 0.0, "v", 1}}), UnknownIdError);
        CHECK_THROWS(ingest_observations(g, f, {{edge_at(0), 0.0, 0.0, "v", 1}}));
        CHECK_THROWS(ingest_observations(g, f, {{edge_at(0), 10.0, -1.0, "v", 1}}));
    }
    SUBCASE("idempotent at alpha 1") {
        auto [g, f] = setup(1.0);
        const std::vector<Observation> batch = {{edge_at(0), 30.0, 6.0, "v", 1}};
        ingest_observations(g, f, batch);
        const RoadGraph g1 = g;
        const HeuristicField f1 = f;
        ingest_observations(g, f, batch);
        CHECK(g == g1);
        CHECK(f == f1);
    }
}

TEST_CASE("ingestion result does not depend on batch order") {
    std::mt19937_64 rng(21);
    const RoadGraph base = make_grid(2, 3, 100, 10);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Observation> batch;
        for (int i = 0; i < 12; ++i)
            batch.push_back({edge_at(rng() % base.topology().edge_count()), 5.0 + static_cast<double>(rng() % 40),
                             static_cast<double>(rng() % 7), "v" + std::to_string(rng() % 3), static_cast<double>(rng() % 4)});
        RoadGraph g1 = base, g2 = base;
        HeuristicField f1 = HeuristicField::zeros(6), f2 = HeuristicField::zeros(6);
        ingest_observations(g1, f1, batch);
        std::shuffle(batch.begin(), batch.end(), rng);
        ingest_observations(g2, f2, batch);
        CHECK(g1 == g2);
        CHECK(f1 == f2);
    }
}

TEST_CASE("adapt_weights rule table") {
    const HeuristicWeights base{1, 1, 1, 1};
    CHECK(adapt_weights(base, {}) == base);
    CHECK(adapt_weights(base, {true, true, false}).w2 == 3.0);
    CHECK(adapt_weights(base, {false, false, true}) == HeuristicWeights{1, 1.5, 1, 1});
    const HeuristicWeights odd{0.7, 0.2, 0.9, 4.0};
    for (int mask = 0; mask < 8; ++mask) {
        const ContextFlags ctx{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
        const HeuristicWeights w = adapt_weights(odd, ctx);
        CHECK(w == adapt_weights(odd, ctx));
        CHECK(w.wg == odd.wg);
        CHECK(w.w3 == odd.w3);
        CHECK_NOTHROW(w.validate());
    }
}
