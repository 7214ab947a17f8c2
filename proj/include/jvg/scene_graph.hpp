#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace jvg {

using TokenSeq = std::vector<std::string>;

struct SgNode {
  int id = 0;
  TokenSeq head;                    // non-empty
  std::vector<TokenSeq> attributes;
};

struct SgEdge {
  int subject = 0;
  TokenSeq relation;  // non-empty
  int object = 0;
};

// Directed tree parsed from a referring expression. Nodes are the
// mentioned objects, edges their relationships; the referent is the
// node the expression ultimately refers to.
struct SceneGraph {
  std::vector<SgNode> nodes;
  std::vector<SgEdge> edges;
  int referent = 0;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  const SgNode* find_node(int id) const;
};

// Returns an empty list iff all invariants hold: unique ids, non-empty
// heads/relations, edges between existing distinct nodes, at most one
// edge per unordered pair, acyclic and connected skeleton, and a stored
// referent with zero in-degree. Violations are data, not failures.
std::vector<std::string> validate_graph(const SceneGraph& g);

// The unique node with in-degree zero. With several candidates
// (degenerate input) picks the one earliest in source order; throws if
// every node has positive in-degree.
int referent_of(const SceneGraph& g);

nlohmann::json scene_graph_to_json(const SceneGraph& g);
SceneGraph scene_graph_from_json(const nlohmann::json& j);

// Convenience wrappers over the document form.
std::string scene_graph_to_string(const SceneGraph& g);
SceneGraph scene_graph_from_string(const std::string& text);

bool structurally_equal(const SceneGraph& a, const SceneGraph& b);

}  // namespace jvg
