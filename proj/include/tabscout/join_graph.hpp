#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tabscout/corpus.hpp"

namespace tabscout {

struct JoinEdge {
    TableId a;
    TableId b;
    std::optional<std::pair<std::string, std::string>> keys;
};

/// Undirected PK-FK joinability graph over corpus tables. No self loops,
/// symmetric adjacency, every endpoint is a node.
class JoinGraph {
  public:
    JoinGraph() = default;
    explicit JoinGraph(std::vector<TableId> nodes);

    /// Adds an undirected edge. Returns false (and leaves the graph unchanged)
    /// for self loops, unknown endpoints and duplicates.
    bool add_edge(JoinEdge edge);

    const std::vector<TableId>& nodes() const { return nodes_; }
    const std::vector<JoinEdge>& edges() const { return edges_; }
    bool has_node(const TableId& id) const { return adjacency_.count(id) != 0; }
    const std::set<TableId>& neighbors(const TableId& id) const;
    std::size_t degree(const TableId& id) const { return neighbors(id).size(); }

    /// True when `tables` induces a connected subgraph.
    bool is_connected(const std::set<TableId>& tables) const;

    /// Warnings collected while loading from file.
    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string warning) { warnings_.push_back(std::move(warning)); }

  private:
    std::vector<TableId> nodes_;
    std::vector<JoinEdge> edges_;
    std::map<TableId, std::set<TableId>> adjacency_;
    std::vector<std::string> warnings_;
};

/// Reads {"edges": [[a, b, [col_a, col_b]?], ...]}. Nodes are the corpus
/// tables; edges naming unknown tables are dropped with a warning.
JoinGraph load_join_graph(const std::filesystem::path& path, const Corpus& corpus);
JoinGraph parse_join_graph(const std::string& json_text, const Corpus& corpus);

/// Serializes edges in the same format.
std::string dump_join_graph(const JoinGraph& graph);

} // namespace tabscout
