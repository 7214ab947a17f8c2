#include "jvg/scene_graph.hpp"

#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace jvg {

using nlohmann::json;

const SgNode* SceneGraph::find_node(int id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // returns false if already joined (a cycle in the skeleton)
  bool join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

std::vector<std::string> validate_graph(const SceneGraph& g) {
  std::vector<std::string> out;
  const int m = g.node_count();

  std::unordered_map<int, int> id_to_pos;
  for (int i = 0; i < m; ++i) {
    const SgNode& n = g.nodes[i];
    if (!id_to_pos.emplace(n.id, i).second)
      out.push_back("duplicate node id " + std::to_string(n.id));
    if (n.head.empty())
      out.push_back("node " + std::to_string(n.id) + ": empty head");
    for (const auto& a : n.attributes)
      if (a.empty())
        out.push_back("node " + std::to_string(n.id) + ": empty attribute");
  }
  if (m == 0) {
    out.push_back("graph has no nodes");
    return out;
  }

  UnionFind uf(m);
  std::set<std::pair<int, int>> seen_pairs;
  std::unordered_map<int, int> in_degree;
  bool cycle = false;
  for (size_t k = 0; k < g.edges.size(); ++k) {
    const SgEdge& e = g.edges[k];
    const std::string tag = "edge " + std::to_string(k);
    if (e.relation.empty()) out.push_back(tag + ": empty relation");
    auto s = id_to_pos.find(e.subject);
    auto o = id_to_pos.find(e.object);
    if (s == id_to_pos.end())
      out.push_back(tag + ": unknown subject id " + std::to_string(e.subject));
    if (o == id_to_pos.end())
      out.push_back(tag + ": unknown object id " + std::to_string(e.object));
    if (e.subject == e.object) {
      out.push_back(tag + ": self-loop on node " + std::to_string(e.subject));
      continue;
    }
    if (s == id_to_pos.end() || o == id_to_pos.end()) continue;
    auto pair = std::minmax(e.subject, e.object);
    if (!seen_pairs.insert({pair.first, pair.second}).second)
      out.push_back(tag + ": duplicate edge between nodes " +
                    std::to_string(pair.first) + " and " +
                    std::to_string(pair.second));
    if (!uf.join(s->second, o->second)) cycle = true;
    in_degree[e.object] += 1;
  }
  if (cycle) out.push_back("cycle in graph skeleton");

  int components = 0;
  for (int i = 0; i < m; ++i)
    if (uf.find(i) == i) ++components;
  if (components > 1 && !cycle)
    out.push_back("disconnected: " + std::to_string(components) +
                  " components");
  // A connected acyclic skeleton forces |E| = |V| - 1; report a count
  // mismatch explicitly when the causes above did not fire.
  if (!cycle && components == 1 &&
      g.edge_count() != m - 1)
    out.push_back("edge count " + std::to_string(g.edge_count()) +
                  " does not match node count " + std::to_string(m));

  if (!id_to_pos.count(g.referent)) {
    out.push_back("referent id " + std::to_string(g.referent) +
                  " is not a node");
  } else if (in_degree[g.referent] > 0) {
    out.push_back("referent node " + std::to_string(g.referent) +
                  " has positive in-degree");
  }
  return out;
}

int referent_of(const SceneGraph& g) {
  if (g.nodes.empty()) throw std::invalid_argument("referent_of: empty graph");
  std::unordered_set<int> has_incoming;
  for (const auto& e : g.edges) has_incoming.insert(e.object);
  for (const auto& n : g.nodes)  // nodes are in source order
    if (!has_incoming.count(n.id)) return n.id;
  throw std::runtime_error(
      "referent_of: every node has positive in-degree (cycle)");
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw std::runtime_error("scene graph json: " + path + ": " + what);
}

TokenSeq read_token_seq(const json& j, const std::string& path,
                        bool allow_empty = false) {
  if (!j.is_array()) schema_error(path, "expected array of strings");
  TokenSeq out;
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string())
      schema_error(path + "/" + std::to_string(i), "expected string");
    out.push_back(j[i].get<std::string>());
  }
  if (!allow_empty && out.empty()) schema_error(path, "empty token sequence");
  return out;
}

int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected integer");
  return j.get<int>();
}

}  // namespace

json scene_graph_to_json(const SceneGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json attrs = json::array();
    for (const auto& a : n.attributes) attrs.push_back(a);
    nodes.push_back({{"id", n.id}, {"head", n.head}, {"attributes", attrs}});
  }
  json edges = json::array();
  for (const auto& e : g.edges)
    edges.push_back(
        {{"subject", e.subject}, {"relation", e.relation}, {"object", e.object}});
  return {{"nodes", nodes}, {"edges", edges}, {"referent", g.referent}};
}

SceneGraph scene_graph_from_json(const json& j) {
  if (!j.is_object()) schema_error("/", "expected object");
  for (const char* key : {"nodes", "edges", "referent"})
    if (!j.contains(key)) schema_error("/", std::string("missing key ") + key);

  SceneGraph g;
  const json& nodes = j.at("nodes");
  if (!nodes.is_array()) schema_error("/nodes", "expected array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    const json& jn = nodes[i];
    if (!jn.is_object()) schema_error(path, "expected object");
    SgNode n;
    n.id = read_int(jn.at("id"), path + "/id");
    n.head = read_token_seq(jn.at("head"), path + "/head");
    const json& attrs = jn.at("attributes");
    if (!attrs.is_array()) schema_error(path + "/attributes", "expected array");
    for (size_t k = 0; k < attrs.size(); ++k)
      n.attributes.push_back(read_token_seq(
          attrs[k], path + "/attributes/" + std::to_string(k)));
    g.nodes.push_back(std::move(n));
  }

  const json& edges = j.at("edges");
  if (!edges.is_array()) schema_error("/edges", "expected array");
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    const json& je = edges[i];
    if (!je.is_object()) schema_error(path, "expected object");
    SgEdge e;
    e.subject = read_int(je.at("subject"), path + "/subject");
    e.relation = read_token_seq(je.at("relation"), path + "/relation");
    e.object = read_int(je.at("object"), path + "/object");
    g.edges.push_back(std::move(e));
  }
  g.referent = read_int(j.at("referent"), "/referent");

  auto violations = validate_graph(g);
  if (!violations.empty())
    throw std::runtime_error("scene graph json: invalid graph: " +
                             violations.front());
  return g;
}

std::string scene_graph_to_string(const SceneGraph& g) {
  return scene_graph_to_json(g).dump();
}

SceneGraph scene_graph_from_string(const std::string& text) {
  return scene_graph_from_json(json::parse(text));
}

bool structurally_equal(const SceneGraph& a, const SceneGraph& b) {
  return scene_graph_to_json(a) == scene_graph_to_json(b);
}

}  // namespace jvg
