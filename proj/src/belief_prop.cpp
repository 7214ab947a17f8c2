#include "jvg/belief_prop.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jvg/numeric.hpp"

namespace jvg {

namespace {

void check_finite(const Vec& m) {
  if (m.hasNaN())
    throw std::runtime_error(
        "belief propagation: non-finite message (corrupted potentials)");
}

// lse over rows, one value per column
Vec lse_cols(const Mat& a) {
  Vec out(a.cols());
  for (Index j = 0; j < a.cols(); ++j) out[j] = log_sum_exp(a.col(j));
  return out;
}

// Message a binary factor sends after absorbing the message from its
// other neighbor. Table rows index the subject, columns the object.
Vec collapse(const Mat& log_table, const Vec& incoming, bool toward_object) {
  if (toward_object)  // out(j) = lse_i T(i,j) + in(i)
    return lse_cols(log_table.colwise() + incoming);
  // out(i) = lse_j T(i,j) + in(j)
  return lse_cols(log_table.transpose().colwise() + incoming);
}

// Softmax weights of one collapse, used by the reverse pass:
// W(i,j) = exp(T(i,j) + in(.) - out(.)) with broadcasting per direction.
Mat collapse_weights(const Mat& log_table, const Vec& incoming, const Vec& out,
                     bool toward_object) {
  if (toward_object)
    return ((log_table.colwise() + incoming).rowwise() - out.transpose())
        .array()
        .exp()
        .matrix();
  return ((log_table.rowwise() + incoming.transpose()).colwise() - out)
      .array()
      .exp()
      .matrix();
}

struct Schedule {
  std::vector<int> preorder;
  std::vector<int> parent_factor;
};

Schedule build_schedule(const FactorGraph& fg, int root) {
  Schedule s;
  s.parent_factor.assign(fg.num_vars, -1);
  std::vector<bool> seen(fg.num_vars, false);
  std::vector<int> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    s.preorder.push_back(v);
    for (int f : fg.var_factors[v]) {
      const auto& bf = fg.binaries[f];
      const int other = bf.subject == v ? bf.object : bf.subject;
      if (!seen[other]) {
        seen[other] = true;
        s.parent_factor[other] = f;
        stack.push_back(other);
      }
    }
  }
  if (static_cast<int>(s.preorder.size()) != fg.num_vars)
    throw std::invalid_argument("belief propagation: factor graph is not connected");
  return s;
}

// m_{v -> f}: product (log-sum) of all other incoming factor messages.
Vec gather_var_to_factor(const FactorGraph& fg, const MessageStore& ms, int v,
                         int except_factor) {
  Vec m = ms.unary_to_var.row(v).transpose();
  for (int f : fg.var_factors[v]) {
    if (f == except_factor) continue;
    const auto& bf = fg.binaries[f];
    m += bf.subject == v ? ms.factor_to_var_s[f] : ms.factor_to_var_o[f];
  }
  return m;
}

void store_var_to_factor(const FactorGraph& fg, MessageStore& ms, int v, int f,
                         Vec m) {
  check_finite(m);
  if (fg.binaries[f].subject == v)
    ms.var_to_factor_s[f] = std::move(m);
  else
    ms.var_to_factor_o[f] = std::move(m);
}

// Sends across factor f away from variable v; returns the receiving var.
int send_factor_message(const FactorGraph& fg, MessageStore& ms, int f, int v) {
  const auto& bf = fg.binaries[f];
  const bool from_subject = bf.subject == v;
  const Vec& incoming = from_subject ? ms.var_to_factor_s[f] : ms.var_to_factor_o[f];
  Vec out = collapse(bf.log_table, incoming, from_subject);
  check_finite(out);
  if (from_subject) {
    ms.factor_to_var_o[f] = std::move(out);
    return bf.object;
  }
  ms.factor_to_var_s[f] = std::move(out);
  return bf.subject;
}

}  // namespace

GroundingResult run_belief_propagation(const FactorGraph& fg, BpRun* run,
                                       int root_override) {
  const int m = fg.num_vars;
  const int n = fg.domain;
  if (m == 0) throw std::invalid_argument("belief propagation: empty graph");
  if (!fg.is_tree())
    throw std::invalid_argument("belief propagation: factor graph is not a tree");
  const int root = root_override >= 0 ? root_override : fg.referent;

  BpRun local;
  BpRun& r = run != nullptr ? *run : local;
  const Schedule sched = build_schedule(fg, root);
  r.root = root;
  r.preorder = sched.preorder;
  r.parent_factor = sched.parent_factor;

  MessageStore& ms = r.messages;
  const int k = static_cast<int>(fg.binaries.size());
  // initialized to the all-ones message (zero in log domain)
  ms.var_to_factor_s.assign(k, Vec::Zero(n));
  ms.var_to_factor_o.assign(k, Vec::Zero(n));
  ms.factor_to_var_s.assign(k, Vec::Zero(n));
  ms.factor_to_var_o.assign(k, Vec::Zero(n));
  ms.unary_to_var = fg.log_unary;  // unary factors have no other neighbors
  ms.var_to_unary = Mat::Zero(m, n);

  // leaves to root
  for (auto it = r.preorder.rbegin(); it != r.preorder.rend(); ++it) {
    const int v = *it;
    const int pf = r.parent_factor[v];
    if (pf < 0) continue;
    store_var_to_factor(fg, ms, v, pf, gather_var_to_factor(fg, ms, v, pf));
    send_factor_message(fg, ms, pf, v);
  }
  // root to leaves
  for (const int v : r.preorder) {
    const int pf = r.parent_factor[v];
    if (pf < 0) continue;
    const auto& bf = fg.binaries[pf];
    const int u = bf.subject == v ? bf.object : bf.subject;  // parent
    store_var_to_factor(fg, ms, u, pf, gather_var_to_factor(fg, ms, u, pf));
    send_factor_message(fg, ms, pf, u);
  }

  // beliefs: product of every incoming factor message
  r.beliefs.resize(m, n);
  for (int v = 0; v < m; ++v) {
    Vec b = gather_var_to_factor(fg, ms, v, /*except_factor=*/-1);
    check_finite(b);
    ms.var_to_unary.row(v) = (b - ms.unary_to_var.row(v).transpose()).transpose();
    r.beliefs.row(v) = b.transpose();
  }

  GroundingResult out;
  out.referent = fg.referent;
  out.marginals.resize(m, n);
  for (int v = 0; v < m; ++v)
    out.marginals.row(v) = softmax(r.beliefs.row(v).transpose()).transpose();
  out.groundings = ground(out.marginals);
  out.log_partition = log_sum_exp(r.beliefs.row(root).transpose());
  return out;
}

Scalar sweep_messages(const FactorGraph& fg, BpRun& run) {
  MessageStore& ms = run.messages;
  Scalar max_delta = 0;
  auto track = [&max_delta](const Vec& before, const Vec& after) {
    max_delta = std::max(max_delta, (after - before).cwiseAbs().maxCoeff());
  };

  for (int v = 0; v < fg.num_vars; ++v) {
    // unary factor -> variable: constant at the log potential row
    track(ms.unary_to_var.row(v).transpose(), fg.log_unary.row(v).transpose());
    ms.unary_to_var.row(v) = fg.log_unary.row(v);
  }
  for (size_t f = 0; f < fg.binaries.size(); ++f) {
    const auto& bf = fg.binaries[f];
    const int fi = static_cast<int>(f);
    Vec m = gather_var_to_factor(fg, ms, bf.subject, fi);
    track(ms.var_to_factor_s[f], m);
    ms.var_to_factor_s[f] = std::move(m);
    m = gather_var_to_factor(fg, ms, bf.object, fi);
    track(ms.var_to_factor_o[f], m);
    ms.var_to_factor_o[f] = std::move(m);

    m = collapse(bf.log_table, ms.var_to_factor_s[f], /*toward_object=*/true);
    track(ms.factor_to_var_o[f], m);
    ms.factor_to_var_o[f] = std::move(m);
    m = collapse(bf.log_table, ms.var_to_factor_o[f], /*toward_object=*/false);
    track(ms.factor_to_var_s[f], m);
    ms.factor_to_var_s[f] = std::move(m);
  }
  for (int v = 0; v < fg.num_vars; ++v) {
    const Vec m = gather_var_to_factor(fg, ms, v, -1) -
                  ms.unary_to_var.row(v).transpose();
    track(ms.var_to_unary.row(v).transpose(), m);
    ms.var_to_unary.row(v) = m.transpose();
  }
  return max_delta;
}

BpGradients bp_backward(const FactorGraph& fg, const BpRun& run,
                        const Mat& d_log_marginals) {
  const int m = fg.num_vars;
  const int n = fg.domain;
  const int k = static_cast<int>(fg.binaries.size());
  const MessageStore& ms = run.messages;

  BpGradients out;
  out.d_log_unary = Mat::Zero(m, n);
  out.d_log_tables.assign(k, Mat::Zero(n, n));

  // adjoints of the stored messages
  std::vector<Vec> d_vf_s(k, Vec::Zero(n)), d_vf_o(k, Vec::Zero(n));
  std::vector<Vec> d_fv_s(k, Vec::Zero(n)), d_fv_o(k, Vec::Zero(n));

  auto d_fv = [&](int f, int v) -> Vec& {
    return fg.binaries[f].subject == v ? d_fv_s[f] : d_fv_o[f];
  };
  auto d_vf = [&](int f, int v) -> Vec& {
    return fg.binaries[f].subject == v ? d_vf_s[f] : d_vf_o[f];
  };
  auto stored_vf = [&](int f, int v) -> const Vec& {
    return fg.binaries[f].subject == v ? ms.var_to_factor_s[f]
                                       : ms.var_to_factor_o[f];
  };
  auto stored_fv = [&](int f, int v) -> const Vec& {
    return fg.binaries[f].subject == v ? ms.factor_to_var_s[f]
                                       : ms.factor_to_var_o[f];
  };

  // seed: log marginal row = log_softmax(belief row)
  for (int v = 0; v < m; ++v) {
    const Vec d_row = d_log_marginals.row(v).transpose();
    if (d_row.isZero(0)) continue;
    const Vec log_marg =
        log_softmax(Vec(run.beliefs.row(v).transpose()));
    const Vec d_b = log_softmax_backward(log_marg, d_row);
    out.d_log_unary.row(v) += d_b.transpose();
    for (int f : fg.var_factors[v]) d_fv(f, v) += d_b;
  }

  // backward through the collapse of factor f away from variable v
  auto collapse_backward = [&](int f, int v) {
    const auto& bf = fg.binaries[f];
    const bool from_subject = bf.subject == v;
    const int to = from_subject ? bf.object : bf.subject;
    const Vec& d_out = d_fv(f, to);
    if (d_out.isZero(0)) return;
    const Vec& incoming = stored_vf(f, v);
    const Vec& sent = stored_fv(f, to);
    const Mat w = collapse_weights(bf.log_table, incoming, sent, from_subject);
    if (from_subject) {  // d_out indexes the columns (object side)
      out.d_log_tables[f] +=
          (w.array().rowwise() * d_out.transpose().array()).matrix();
      d_vf(f, v) += w * d_out;
    } else {  // d_out indexes the rows (subject side)
      out.d_log_tables[f] += (w.array().colwise() * d_out.array()).matrix();
      d_vf(f, v) += w.transpose() * d_out;
    }
  };

  // unpack the adjoint of m_{v -> f} into unary row + other factor messages
  auto gather_backward = [&](int f, int v) {
    const Vec d = d_vf(f, v);
    if (d.isZero(0)) return;
    out.d_log_unary.row(v) += d.transpose();
    for (int f2 : fg.var_factors[v]) {
      if (f2 == f) continue;
      d_fv(f2, v) += d;
    }
  };

  // reverse of the root-to-leaves pass
  for (auto it = run.preorder.rbegin(); it != run.preorder.rend(); ++it) {
    const int v = *it;
    const int pf = run.parent_factor[v];
    if (pf < 0) continue;
    const auto& bf = fg.binaries[pf];
    const int u = bf.subject == v ? bf.object : bf.subject;
    collapse_backward(pf, u);   // produced m_{pf -> v}
    gather_backward(pf, u);     // produced m_{u -> pf}
  }
  // reverse of the leaves-to-root pass
  for (const int v : run.preorder) {
    const int pf = run.parent_factor[v];
    if (pf < 0) continue;
    collapse_backward(pf, v);  // produced the message toward the parent
    gather_backward(pf, v);    // produced m_{v -> pf}
  }
  return out;
}

std::vector<int> ground(const Mat& marginals) {
  std::vector<int> out(marginals.rows());
  for (Index v = 0; v < marginals.rows(); ++v) {
    Index best = 0;
    for (Index i = 1; i < marginals.cols(); ++i)
      if (marginals(v, i) > marginals(v, best)) best = i;
    out[v] = static_cast<int>(best);
  }
  return out;
}

nlohmann::json grounding_to_json(const GroundingResult& r) {
  nlohmann::json marg = nlohmann::json::array();
  for (Index v = 0; v < r.marginals.rows(); ++v) {
    std::vector<Scalar> row(static_cast<size_t>(r.marginals.cols()));
    for (Index i = 0; i < r.marginals.cols(); ++i)
      row[static_cast<size_t>(i)] = r.marginals(v, i);
    marg.push_back(row);
  }
  return {{"marginals", marg},
          {"groundings", r.groundings},
          {"referent", r.referent}};
}

}  // namespace jvg
