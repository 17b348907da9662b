#include "tabscout/join_graph.hpp"

#include <json.hpp>

#include "tabscout/error.hpp"

namespace tabscout {

using nlohmann::json;

JoinGraph::JoinGraph(std::vector<TableId> nodes) {
    for (auto& node : nodes) {
        if (adjacency_.emplace(node, std::set<TableId>{}).second) {
            nodes_.push_back(std::move(node));
        }
    }
}

bool JoinGraph::add_edge(JoinEdge edge) {
    if (edge.a == edge.b) {
        return false;
    }
    auto ia = adjacency_.find(edge.a);
    auto ib = adjacency_.find(edge.b);
    if (ia == adjacency_.end() || ib == adjacency_.end()) {
        return false;
    }
    if (!ia->second.insert(edge.b).second) {
        return false;
    }
    ib->second.insert(edge.a);
    edges_.push_back(std::move(edge));
    return true;
}

const std::set<TableId>& JoinGraph::neighbors(const TableId& id) const {
    static const std::set<TableId> kEmpty;
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? kEmpty : it->second;
}

bool JoinGraph::is_connected(const std::set<TableId>& tables) const {
    if (tables.empty()) {
        return false;
    }
    std::set<TableId> seen{*tables.begin()};
    std::vector<TableId> stack{*tables.begin()};
    while (!stack.empty()) {
        TableId cur = std::move(stack.back());
        stack.pop_back();
        for (const auto& next : neighbors(cur)) {
            if (tables.count(next) != 0 && seen.insert(next).second) {
                stack.push_back(next);
            }
        }
    }
    return seen.size() == tables.size();
}

JoinGraph parse_join_graph(const std::string& json_text, const Corpus& corpus) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw MalformedGraph(std::string("join graph is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_array()) {
        throw MalformedGraph("join graph must be an object with an \"edges\" array");
    }
    std::vector<TableId> nodes;
    nodes.reserve(corpus.size());
    for (const auto& table : corpus.tables()) {
        nodes.push_back(table.id);
    }
    JoinGraph graph(std::move(nodes));
    std::size_t position = 0;
    for (const auto& item : doc["edges"]) {
        const std::string where = "edge #" + std::to_string(position++);
        if (!item.is_array() || item.size() < 2 || item.size() > 3 || !item[0].is_string() ||
            !item[1].is_string()) {
            throw MalformedGraph(where + ": expected [table, table, [col, col]?]");
        }
        JoinEdge edge{item[0].get<std::string>(), item[1].get<std::string>(), std::nullopt};
        if (item.size() == 3 && !item[2].is_null()) {
            const auto& keys = item[2];
            if (!keys.is_array() || keys.size() != 2 || !keys[0].is_string() || !keys[1].is_string()) {
                throw MalformedGraph(where + ": key pair must be [col, col]");
            }
            edge.keys = std::make_pair(keys[0].get<std::string>(), keys[1].get<std::string>());
        }
        if (edge.a == edge.b) {
            graph.add_warning(where + ": self loop on '" + edge.a + "' dropped");
            continue;
        }
        if (!graph.has_node(edge.a) || !graph.has_node(edge.b)) {
            graph.add_warning(where + ": unknown table in ('" + edge.a + "', '" + edge.b + "') dropped");
            continue;
        }
        if (!graph.add_edge(edge)) {
            graph.add_warning(where + ": duplicate edge dropped");
        }
    }
    return graph;
}

JoinGraph load_join_graph(const std::filesystem::path& path, const Corpus& corpus) {
    return parse_join_graph(read_file(path), corpus);
}

std::string dump_join_graph(const JoinGraph& graph) {
    json edges = json::array();
    for (const auto& edge : graph.edges()) {
        json item = json::array({edge.a, edge.b});
        if (edge.keys) {
            item.push_back(json::array({edge.keys->first, edge.keys->second}));
        }
        edges.push_back(std::move(item));
    }
    return json{{"edges", edges}}.dump(2);
}

} // namespace tabscout
