#include "jvg/factor_graph.hpp"

#include <stdexcept>
#include <unordered_map>

namespace jvg {

bool FactorGraph::is_tree() const {
  if (num_vars == 0) return false;
  if (static_cast<int>(binaries.size()) != num_vars - 1) return false;
  // connectivity via BFS over the binary factors
  std::vector<int> stack{0};
  std::vector<bool> seen(num_vars, false);
  seen[0] = true;
  int visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int f : var_factors[v]) {
      const auto& bf = binaries[f];
      const int other = bf.subject == v ? bf.object : bf.subject;
      if (!seen[other]) {
        seen[other] = true;
        ++visited;
        stack.push_back(other);
      }
    }
  }
  return visited == num_vars;
}

namespace {

FactorGraph assemble(const SceneGraph& g, const Mat& log_unary,
                     const std::vector<Mat>& log_binary) {
  const int m = g.node_count();
  if (m == 0) throw std::invalid_argument("build_factor_graph: empty graph");
  if (log_unary.rows() != m)
    throw std::invalid_argument("build_factor_graph: unary table has " +
                                std::to_string(log_unary.rows()) +
                                " rows for " + std::to_string(m) + " nodes");
  const int n = static_cast<int>(log_unary.cols());
  if (n < 1) throw std::invalid_argument("build_factor_graph: empty domain");
  if (log_binary.size() != g.edges.size())
    throw std::invalid_argument("build_factor_graph: need one binary table per edge");

  auto violations = validate_graph(g);
  if (!violations.empty())
    throw std::invalid_argument("build_factor_graph: invalid scene graph: " +
                                violations.front());

  std::unordered_map<int, int> id_to_var;
  for (int i = 0; i < m; ++i) id_to_var.emplace(g.nodes[i].id, i);

  FactorGraph fg;
  fg.num_vars = m;
  fg.domain = n;
  fg.referent = id_to_var.at(g.referent);
  fg.log_unary = log_unary;
  fg.var_factors.resize(m);
  for (size_t k = 0; k < g.edges.size(); ++k) {
    if (log_binary[k].rows() != n || log_binary[k].cols() != n)
      throw std::invalid_argument("build_factor_graph: binary table " +
                                  std::to_string(k) + " is not N x N");
    FactorGraph::BinaryFactor bf;
    bf.subject = id_to_var.at(g.edges[k].subject);
    bf.object = id_to_var.at(g.edges[k].object);
    bf.log_table = log_binary[k];
    fg.var_factors[bf.subject].push_back(static_cast<int>(k));
    fg.var_factors[bf.object].push_back(static_cast<int>(k));
    fg.binaries.push_back(std::move(bf));
  }
  return fg;
}

}  // namespace

FactorGraph build_factor_graph(const SceneGraph& g, const UnaryTable& unary,
                               const std::vector<BinaryTable>& binary) {
  std::vector<Mat> log_binary;
  log_binary.reserve(binary.size());
  for (const auto& t : binary) log_binary.push_back(t.array().log().matrix());
  return assemble(g, unary.array().log().matrix(), log_binary);
}

FactorGraph build_factor_graph_log(const SceneGraph& g, const Mat& log_unary,
                                   const std::vector<Mat>& log_binary) {
  return assemble(g, log_unary, log_binary);
}

}  // namespace jvg
