#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jvg/factor_graph.hpp"
#include "jvg/types.hpp"

namespace jvg {

// Every directed message of the factor graph, log domain, length-N each.
// Binary-factor messages are indexed by factor; unary-factor messages are
// rows of the M x N matrices.
struct MessageStore {
  std::vector<Vec> var_to_factor_s;  // variable (subject side) -> factor
  std::vector<Vec> var_to_factor_o;
  std::vector<Vec> factor_to_var_s;  // factor -> subject variable
  std::vector<Vec> factor_to_var_o;
  Mat unary_to_var;  // row v: message of v's unary factor
  Mat var_to_unary;  // row v: message of v into its unary factor
};

// Recorded two-pass run: the rooted schedule plus all messages, enough to
// replay the computation backwards for gradients.
struct BpRun {
  int root = 0;
  std::vector<int> preorder;       // root first
  std::vector<int> parent_factor;  // binary factor toward parent, -1 at root
  MessageStore messages;
  Mat beliefs;  // M x N log-domain beliefs
};

struct GroundingResult {
  Mat marginals;                // M x N, rows sum to 1
  std::vector<int> groundings;  // per-node argmax, ties -> lowest index
  int referent = 0;
  Scalar log_partition = 0;
};

// Exact marginals by sum-product message passing, leaves -> root ->
// leaves with the referent as root (overridable for schedule tests).
// Messages are kept in the log domain with max-subtracted log-sum-exp.
// Throws on NaN messages (corrupted potentials).
GroundingResult run_belief_propagation(const FactorGraph& fg,
                                       BpRun* run = nullptr,
                                       int root_override = -1);

// Recomputes every message once from the current store, in place.
// Returns the largest absolute change; exact runs are already at the
// fixed point, so this is ~0 after the two passes.
Scalar sweep_messages(const FactorGraph& fg, BpRun& run);

struct BpGradients {
  Mat d_log_unary;                  // M x N
  std::vector<Mat> d_log_tables;    // per binary factor, N x N
};

// Reverse-mode pass through the recorded run. `d_log_marginals` holds
// the adjoints of the log marginal rows (zeros for untouched nodes).
BpGradients bp_backward(const FactorGraph& fg, const BpRun& run,
                        const Mat& d_log_marginals);

// Per-row argmax with ties broken toward the lowest region index.
std::vector<int> ground(const Mat& marginals);
inline std::vector<int> ground(const GroundingResult& r) { return ground(r.marginals); }

nlohmann::json grounding_to_json(const GroundingResult& r);

}  // namespace jvg
