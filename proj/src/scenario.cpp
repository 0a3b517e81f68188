#include "dynroute/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace dynroute {

using json = nlohmann::json;

ScenarioError::ScenarioError(Kind kind, std::string element, std::size_t line, const std::string& message)
    : std::runtime_error(message), kind_(kind), element_(std::move(element)), line_(line) {}

namespace {

std::size_t line_at(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Best-effort source locations; the JSON library does not keep positions.
class Locator {
public:
    explicit Locator(std::string_view text) : text_(text) {}

    // Line of the first `"value"` token after the section key.
    std::size_t string_token(std::string_view section, std::string_view value) const {
        const std::size_t from = section_start(section);
        const std::string needle = "\"" + std::string(value) + "\"";
        auto pos = text_.find(needle, from);
        if (pos == std::string_view::npos) pos = text_.find(needle);
        return pos == std::string_view::npos ? 0 : line_at(text_, pos);
    }

    // Line of the k-th occurrence of `"key"` after the section key.
    std::size_t nth_key(std::string_view section, std::string_view key, std::size_t k) const {
        std::size_t pos = section_start(section);
        const std::string needle = "\"" + std::string(key) + "\"";
        for (std::size_t i = 0; i <= k; ++i) {
            pos = text_.find(needle, i == 0 ? pos : pos + 1);
            if (pos == std::string_view::npos) return 0;
        }
        return line_at(text_, pos);
    }

    std::size_t key(std::string_view key) const { return nth_key({}, key, 0); }

private:
    std::size_t section_start(std::string_view section) const {
        if (section.empty()) return 0;
        auto pos = text_.find("\"" + std::string(section) + "\"");
        return pos == std::string_view::npos ? 0 : pos;
    }

    std::string_view text_;
};

[[noreturn]] void fail(std::string element, std::size_t line, const std::string& message) {
    std::string full = message;
    if (line > 0) full += " (line " + std::to_string(line) + ")";
    throw ScenarioError(ScenarioError::Kind::Validation, std::move(element), line, full);
}

class Parser {
public:
    Parser(std::string_view text, const json& doc) : doc_(doc), loc_(text) {}

    Scenario run();

private:
    void expect_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> required,
                     std::initializer_list<std::string_view> optional, std::size_t line) const;
    double number(const json& obj, std::string_view key, const std::string& where, std::size_t line) const;
    std::string text(const json& obj, std::string_view key, const std::string& where, std::size_t line) const;
    bool flag(const json& obj, std::string_view key, const std::string& where, std::size_t line) const;
    const json& array(std::string_view key) const;

    NodeId resolve_node(const std::string& id, const std::string& where, std::size_t line) const;
    EdgeId resolve_edge(const std::string& id, const std::string& where, std::size_t line) const;

    const json& doc_;
    Locator loc_;
    std::shared_ptr<const Topology> topo_;
};

void Parser::expect_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional, std::size_t line) const {
    if (!obj.is_object()) fail(where, line, where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const auto& k = it.key();
        const bool known = std::ranges::find(required, k) != required.end() || std::ranges::find(optional, k) != optional.end();
        if (!known) fail(k, line ? line : loc_.key(k), "unknown key \"" + k + "\" in " + where);
    }
    for (auto k : required)
        if (!obj.contains(k)) fail(where, line, where + " is missing required key \"" + std::string(k) + "\"");
}

double Parser::number(const json& obj, std::string_view key, const std::string& where, std::size_t line) const {
    const auto& v = obj.at(std::string(key));
    if (!v.is_number()) fail(where, line, where + "." + std::string(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, line, where + "." + std::string(key) + " must be finite");
    return d;
}

std::string Parser::text(const json& obj, std::string_view key, const std::string& where, std::size_t line) const {
    const auto& v = obj.at(std::string(key));
    if (!v.is_string()) fail(where, line, where + "." + std::string(key) + " must be a string");
    return v.get<std::string>();
}

bool Parser::flag(const json& obj, std::string_view key, const std::string& where, std::size_t line) const {
    const auto& v = obj.at(std::string(key));
    if (!v.is_boolean()) fail(where, line, where + "." + std::string(key) + " must be a boolean");
    return v.get<bool>();
}

const json& Parser::array(std::string_view key) const {
    const auto& v = doc_.at(std::string(key));
    if (!v.is_array()) fail(std::string(key), loc_.key(key), "\"" + std::string(key) + "\" must be an array");
    return v;
}

NodeId Parser::resolve_node(const std::string& id, const std::string& where, std::size_t line) const {
    if (auto n = topo_->find_node(id)) return *n;
    fail(id, line, where + " references unknown node \"" + id + "\"");
}

EdgeId Parser::resolve_edge(const std::string& id, const std::string& where, std::size_t line) const {
    if (auto e = topo_->find_edge(id)) return *e;
    fail(id, line, where + " references unknown edge \"" + id + "\"");
}

Scenario Parser::run() {
    expect_keys(doc_, "document", {"nodes", "edges", "queries"}, {"heuristics", "events", "meta"}, 1);

    // nodes
    std::vector<NodeRecord> nodes;
    for (const auto& jn : array("nodes")) {
        const std::size_t idx = nodes.size();
        const std::size_t line = loc_.nth_key("nodes", "id", idx);
        expect_keys(jn, "nodes[" + std::to_string(idx) + "]", {"id", "x", "y"}, {}, line);
        const std::string where = "nodes[" + std::to_string(idx) + "]";
        nodes.push_back({text(jn, "id", where, line), number(jn, "x", where, line), number(jn, "y", where, line)});
    }
    std::ranges::sort(nodes, [](const NodeRecord& a, const NodeRecord& b) { return natural_less(a.id, b.id); });
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].id == nodes[i - 1].id)
            fail(nodes[i].id, loc_.string_token("nodes", nodes[i].id), "duplicate node id \"" + nodes[i].id + "\"");
    if (nodes.empty()) fail("nodes", loc_.key("nodes"), "scenario has no nodes");

    std::unordered_map<std::string, NodeId> node_index;
    for (std::size_t i = 0; i < nodes.size(); ++i) node_index.emplace(nodes[i].id, node_at(i));

    // edges
    struct RawEdge {
        std::string id, from, to;
        double length, time;
        std::size_t line;
    };
    std::vector<RawEdge> raw;
    for (const auto& je : array("edges")) {
        const std::size_t idx = raw.size();
        const std::size_t line = loc_.nth_key("edges", "id", idx);
        const std::string where = "edges[" + std::to_string(idx) + "]";
        expect_keys(je, where, {"id", "from", "to", "length_m", "base_time_s"}, {}, line);
        raw.push_back({text(je, "id", where, line), text(je, "from", where, line), text(je, "to", where, line),
                       number(je, "length_m", where, line), number(je, "base_time_s", where, line), line});
    }
    std::ranges::stable_sort(raw, [](const RawEdge& a, const RawEdge& b) { return natural_less(a.id, b.id); });
    std::vector<EdgeRecord> edges;
    edges.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& r = raw[i];
        const std::string where = "edge \"" + r.id + "\"";
        if (i > 0 && raw[i - 1].id == r.id) fail(r.id, r.line, "duplicate edge id \"" + r.id + "\"");
        auto f = node_index.find(r.from);
        if (f == node_index.end()) fail(r.from, r.line, where + " references unknown node \"" + r.from + "\"");
        auto t = node_index.find(r.to);
        if (t == node_index.end()) fail(r.to, r.line, where + " references unknown node \"" + r.to + "\"");
        if (!(r.length > 0.0)) fail(r.id, r.line, where + " length_m must be > 0");
        if (!(r.time > 0.0)) fail(r.id, r.line, where + " base_time_s must be > 0");
        edges.push_back({r.id, f->second, t->second, r.length, r.time});
    }
    try {
        topo_ = Topology::build(std::move(nodes), std::move(edges));
    } catch (const std::exception& ex) {
        fail("graph", 0, ex.what());
    }

    // meta
    ScenarioMeta meta;
    double alpha = kDefaultSmoothingAlpha;
    if (doc_.contains("meta")) {
        const auto& jm = doc_.at("meta");
        const std::size_t line = loc_.key("meta");
        expect_keys(jm, "meta", {}, {"name", "seed", "alpha"}, line);
        if (jm.contains("name")) meta.name = text(jm, "name", "meta", line);
        if (jm.contains("seed")) {
            const auto& s = jm.at("seed");
            if (!s.is_number_unsigned()) fail("seed", line, "meta.seed must be a non-negative integer");
            meta.seed = s.get<std::uint64_t>();
        }
        if (jm.contains("alpha")) {
            alpha = number(jm, "alpha", "meta", line);
            if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha", line, "meta.alpha must lie in (0, 1]");
        }
    }

    // heuristics
    const std::size_t n = topo_->node_count();
    std::vector<double> h2(n, 0.0), h3(n, 0.0);
    std::vector<bool> seen(n, false);
    if (doc_.contains("heuristics")) {
        std::size_t idx = 0;
        for (const auto& jh : array("heuristics")) {
            const std::size_t line = loc_.nth_key("heuristics", "node", idx);
            const std::string where = "heuristics[" + std::to_string(idx++) + "]";
            expect_keys(jh, where, {"node"}, {"h2", "h3"}, line);
            const NodeId node = resolve_node(text(jh, "node", where, line), where, line);
            if (seen[index(node)]) fail(topo_->node(node).id, line, "duplicate heuristics entry for node");
            seen[index(node)] = true;
            if (jh.contains("h2")) h2[index(node)] = number(jh, "h2", where, line);
            if (jh.contains("h3")) h3[index(node)] = number(jh, "h3", where, line);
            if (h2[index(node)] < 0.0 || h3[index(node)] < 0.0)
                fail(topo_->node(node).id, line, where + " heuristic values must be >= 0");
        }
    }

    Scenario sc{RoadGraph(topo_), HeuristicField(std::move(h2), std::move(h3), alpha), {}, {}, std::move(meta)};

    // events
    if (doc_.contains("events")) {
        std::size_t idx = 0;
        double last_t = 0.0;
        for (const auto& jv : array("events")) {
            const std::size_t line = loc_.nth_key("events", "t_s", idx);
            const std::string where = "events[" + std::to_string(idx) + "]";
            expect_keys(jv, where, {"t_s", "kind", "target"}, {"value"}, line);
            const double t = number(jv, "t_s", where, line);
            if (t < 0.0) fail(where, line, where + " t_s must be >= 0");
            if (idx > 0 && t < last_t)
                fail(where, line, where + " (t_s=" + jv.at("t_s").dump() + ") is out of order: precedes the previous event");
            last_t = t;
            const std::string kind = text(jv, "kind", where, line);
            const std::string target = text(jv, "target", where, line);
            auto value = [&]() {
                if (!jv.contains("value")) fail(where, line, where + " of kind " + kind + " requires a value");
                return number(jv, "value", where, line);
            };
            auto no_value = [&]() {
                if (jv.contains("value") && !jv.at("value").is_null())
                    fail(where, line, where + " of kind " + kind + " takes no value");
            };
            EventAction action;
            if (kind == "set_congestion") {
                const double f = value();
                if (f < 1.0) fail(where, line, where + " congestion factor must be >= 1");
                action = SetCongestion{resolve_edge(target, where, line), f};
            } else if (kind == "set_comfort") {
                const double p = value();
                if (p < 0.0) fail(where, line, where + " comfort penalty must be >= 0");
                action = SetComfort{resolve_edge(target, where, line), p};
            } else if (kind == "set_node_comfort_h") {
                const double v = value();
                if (v < 0.0) fail(where, line, where + " comfort heuristic must be >= 0");
                action = SetNodeComfort{resolve_node(target, where, line), v};
            } else if (kind == "block_edge") {
                no_value();
                action = BlockEdge{resolve_edge(target, where, line)};
            } else if (kind == "unblock_edge") {
                no_value();
                action = UnblockEdge{resolve_edge(target, where, line)};
            } else if (kind.find("safety") != std::string::npos) {
                fail(where, line, where + " attempts to mutate the safety heuristic, which is fixed at load");
            } else {
                fail(kind, line, where + " has unknown kind \"" + kind + "\"");
            }
            sc.events.push_back({t, action});
            ++idx;
        }
    }

    // queries
    std::size_t idx = 0;
    for (const auto& jq : array("queries")) {
        const std::size_t line = loc_.nth_key("queries", "vehicle", idx);
        const std::string where = "queries[" + std::to_string(idx++) + "]";
        expect_keys(jq, where, {"vehicle", "start", "goal"}, {"depart_s", "weights", "context"}, line);
        Query q;
        q.vehicle = text(jq, "vehicle", where, line);
        q.start = resolve_node(text(jq, "start", where, line), where, line);
        q.goal = resolve_node(text(jq, "goal", where, line), where, line);
        if (jq.contains("depart_s")) {
            q.depart_s = number(jq, "depart_s", where, line);
            if (q.depart_s < 0.0) fail(where, line, where + " depart_s must be >= 0");
        }
        if (jq.contains("weights")) {
            const auto& jw = jq.at("weights");
            expect_keys(jw, where + ".weights", {}, {"wg", "w1", "w2", "w3"}, line);
            if (jw.contains("wg")) q.weights.wg = number(jw, "wg", where, line);
            if (jw.contains("w1")) q.weights.w1 = number(jw, "w1", where, line);
            if (jw.contains("w2")) q.weights.w2 = number(jw, "w2", where, line);
            if (jw.contains("w3")) q.weights.w3 = number(jw, "w3", where, line);
            try {
                q.weights.validate();
            } catch (const std::invalid_argument& ex) {
                fail(where, line, where + ": " + ex.what());
            }
        }
        if (jq.contains("context")) {
            const auto& jc = jq.at("context");
            expect_keys(jc, where + ".context", {},
                        {"passenger_prefers_comfort", "rough_road_reported", "heavy_traffic_reported"}, line);
            if (jc.contains("passenger_prefers_comfort"))
                q.context.passenger_prefers_comfort = flag(jc, "passenger_prefers_comfort", where, line);
            if (jc.contains("rough_road_reported"))
                q.context.rough_road_reported = flag(jc, "rough_road_reported", where, line);
            if (jc.contains("heavy_traffic_reported"))
                q.context.heavy_traffic_reported = flag(jc, "heavy_traffic_reported", where, line);
        }
        for (const auto& prev : sc.queries)
            if (prev.vehicle == q.vehicle) fail(q.vehicle, line, "duplicate vehicle id \"" + q.vehicle + "\"");

        // Reachability on the initial graph (no edge starts blocked).
        std::vector<char> reached(n, 0);
        std::vector<NodeId> stack{q.start};
        reached[index(q.start)] = 1;
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (EdgeId e : topo_->out_edges(u)) {
                const NodeId v = topo_->edge(e).to;
                if (!reached[index(v)]) {
                    reached[index(v)] = 1;
                    stack.push_back(v);
                }
            }
        }
        if (!reached[index(q.goal)])
            fail(q.vehicle, line,
                 where + ": goal \"" + topo_->node(q.goal).id + "\" is unreachable from \"" + topo_->node(q.start).id + "\"");
        sc.queries.push_back(std::move(q));
    }
    return sc;
}

}  // namespace

Scenario load_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& ex) {
        const std::size_t line = line_at(text, ex.byte > 0 ? ex.byte - 1 : 0);
        throw ScenarioError(ScenarioError::Kind::Parse, "document", line,
                            std::string("malformed scenario document (line ") + std::to_string(line) + "): " + ex.what());
    }
    try {
        return Parser(text, doc).run();
    } catch (const ScenarioError&) {
        throw;
    } catch (const json::exception& ex) {
        throw ScenarioError(ScenarioError::Kind::Validation, "document", 0, ex.what());
    }
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(ScenarioError::Kind::Parse, path.string(), 0, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& sc) {
    const auto& topo = sc.graph.topology();
    json doc = json::object();

    json nodes = json::array();
    for (const auto& nrec : topo.nodes()) nodes.push_back({{"id", nrec.id}, {"x", nrec.x}, {"y", nrec.y}});
    doc["nodes"] = std::move(nodes);

    json edges = json::array();
    for (const auto& e : topo.edges())
        edges.push_back({{"id", e.id},
                         {"from", topo.node(e.from).id},
                         {"to", topo.node(e.to).id},
                         {"length_m", e.length_m},
                         {"base_time_s", e.base_time_s}});
    doc["edges"] = std::move(edges);

    json heur = json::array();
    for (std::size_t i = 0; i < topo.node_count(); ++i) {
        const double h2 = sc.initial_field.comfort(node_at(i));
        const double h3 = sc.initial_field.safety(node_at(i));
        if (h2 == 0.0 && h3 == 0.0) continue;
        heur.push_back({{"node", topo.nodes()[i].id}, {"h2", h2}, {"h3", h3}});
    }
    doc["heuristics"] = std::move(heur);

    json events = json::array();
    for (const auto& ev : sc.events) {
        json je = {{"t_s", ev.at_time_s}, {"kind", std::string(event_kind_name(ev.action))}};
        std::visit(
            [&](const auto& a) {
                using A = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<A, SetNodeComfort>) {
                    je["target"] = topo.node(a.node).id;
                    je["value"] = a.value;
                } else {
                    je["target"] = topo.edge(a.edge).id;
                    if constexpr (std::is_same_v<A, SetCongestion>) je["value"] = a.factor;
                    if constexpr (std::is_same_v<A, SetComfort>) je["value"] = a.penalty;
                }
            },
            ev.action);
        events.push_back(std::move(je));
    }
    doc["events"] = std::move(events);

    json queries = json::array();
    for (const auto& q : sc.queries) {
        queries.push_back({{"vehicle", q.vehicle},
                           {"start", topo.node(q.start).id},
                           {"goal", topo.node(q.goal).id},
                           {"depart_s", q.depart_s},
                           {"weights", {{"wg", q.weights.wg}, {"w1", q.weights.w1}, {"w2", q.weights.w2}, {"w3", q.weights.w3}}},
                           {"context",
                            {{"passenger_prefers_comfort", q.context.passenger_prefers_comfort},
                             {"rough_road_reported", q.context.rough_road_reported},
                             {"heavy_traffic_reported", q.context.heavy_traffic_reported}}}});
    }
    doc["queries"] = std::move(queries);

    doc["meta"] = {{"name", sc.meta.name}, {"seed", sc.meta.seed}, {"alpha", sc.initial_field.smoothing_alpha()}};
    return doc.dump(2) + "\n";
}

}  // namespace dynroute
