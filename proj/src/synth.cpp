#include "jvg/synth.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "jvg/rng.hpp"

namespace jvg {

using nlohmann::json;

namespace {

std::string join(const TokenSeq& phrase) {
  std::string out;
  for (const auto& t : phrase) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

enum class Rel { kLeftOf, kRightOf, kAbove, kBelow };

Rel rel_of(const TokenSeq& relation) {
  const std::string name = join(relation);
  if (name == "left of") return Rel::kLeftOf;
  if (name == "right of") return Rel::kRightOf;
  if (name == "above") return Rel::kAbove;
  if (name == "below") return Rel::kBelow;
  throw std::runtime_error("synth: unplaceable relation '" + name + "'");
}

Scalar center_x(const Box& b) { return (b[0] + b[2]) / 2; }
Scalar center_y(const Box& b) { return (b[1] + b[3]) / 2; }

}  // namespace

bool relation_holds(const TokenSeq& relation, const Box& subject,
                    const Box& object, Scalar canvas) {
  const Scalar margin = 0.12 * canvas;
  switch (rel_of(relation)) {
    case Rel::kLeftOf:
      return center_x(subject) < center_x(object) - margin;
    case Rel::kRightOf:
      return center_x(subject) > center_x(object) + margin;
    case Rel::kAbove:
      return center_y(subject) < center_y(object) - margin;
    case Rel::kBelow:
      return center_y(subject) > center_y(object) + margin;
  }
  return false;
}

Grammar grammar_of(const SynthSpec& spec) {
  Grammar g;
  g.determiners.insert(spec.determiners.begin(), spec.determiners.end());
  g.attributes.insert(spec.attributes.begin(), spec.attributes.end());
  g.nouns.insert(spec.nouns.begin(), spec.nouns.end());
  g.relations = spec.relations;
  validate_grammar(g);
  return g;
}

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.nouns.empty() || spec.attributes.empty() || spec.relations.empty())
    throw std::invalid_argument("synth spec: empty inventory");
  if (spec.regions_per_scene < 2)
    throw std::invalid_argument(
        "synth spec: need at least 2 regions per scene (disambiguation "
        "requires context)");
  if (spec.attributes.size() < 2)
    throw std::invalid_argument("synth spec: need at least 2 attributes");
  const int max_nodes = spec.p_three_nodes > 0 ? 3 : 2;
  if (spec.regions_per_scene < max_nodes + spec.referent_distractors)
    throw std::invalid_argument(
        "synth spec: regions_per_scene too small for graph nodes plus "
        "distractors");
  if (static_cast<int>(spec.nouns.size() * spec.attributes.size()) < max_nodes)
    throw std::invalid_argument("synth spec: too few object classes");
  if (spec.referent_pool_bias < 0 || spec.referent_pool_bias > 1)
    throw std::invalid_argument("synth spec: referent_pool_bias outside [0,1]");
  if (spec.setting != "gt" && spec.setting != "det")
    throw std::invalid_argument("synth spec: setting must be gt or det");
  if (spec.num_train < 0 || spec.num_val < 0 || spec.num_test < 0 ||
      spec.num_train + spec.num_val + spec.num_test == 0)
    throw std::invalid_argument("synth spec: bad split sizes");
  for (const auto& r : spec.relations) rel_of(r);  // throws on unknown
  grammar_of(spec);                                // throws on token clashes
}

json synth_spec_to_json(const SynthSpec& s) {
  json rels = json::array();
  for (const auto& r : s.relations) rels.push_back(r);
  return {{"num_train", s.num_train},
          {"num_val", s.num_val},
          {"num_test", s.num_test},
          {"regions_per_scene", s.regions_per_scene},
          {"canvas", s.canvas},
          {"nouns", s.nouns},
          {"attributes", s.attributes},
          {"relations", rels},
          {"determiners", s.determiners},
          {"appearance_dim", s.appearance_dim},
          {"appearance_noise", s.appearance_noise},
          {"p_three_nodes", s.p_three_nodes},
          {"p_hard", s.p_hard},
          {"p_context_dup", s.p_context_dup},
          {"referent_distractors", s.referent_distractors},
          {"referent_pool_bias", s.referent_pool_bias},
          {"back_family_scale", s.back_family_scale},
          {"setting", s.setting},
          {"det_jitters", s.det_jitters},
          {"max_attempts", s.max_attempts}};
}

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  s.num_train = j.value("num_train", s.num_train);
  s.num_val = j.value("num_val", s.num_val);
  s.num_test = j.value("num_test", s.num_test);
  s.regions_per_scene = j.value("regions_per_scene", s.regions_per_scene);
  s.canvas = j.value("canvas", s.canvas);
  s.nouns = j.at("nouns").get<std::vector<std::string>>();
  s.attributes = j.at("attributes").get<std::vector<std::string>>();
  for (const auto& r : j.at("relations")) s.relations.push_back(r.get<TokenSeq>());
  if (j.contains("determiners"))
    s.determiners = j.at("determiners").get<std::vector<std::string>>();
  s.appearance_dim = j.value("appearance_dim", s.appearance_dim);
  s.appearance_noise = j.value("appearance_noise", s.appearance_noise);
  s.p_three_nodes = j.value("p_three_nodes", s.p_three_nodes);
  s.p_hard = j.value("p_hard", s.p_hard);
  s.p_context_dup = j.value("p_context_dup", s.p_context_dup);
  s.referent_distractors = j.value("referent_distractors", s.referent_distractors);
  s.referent_pool_bias = j.value("referent_pool_bias", s.referent_pool_bias);
  s.back_family_scale = j.value("back_family_scale", s.back_family_scale);
  s.setting = j.value("setting", s.setting);
  s.det_jitters = j.value("det_jitters", s.det_jitters);
  s.max_attempts = j.value("max_attempts", s.max_attempts);
  validate_synth_spec(s);
  return s;
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synth spec: " + path);
  return synth_spec_from_json(json::parse(in));
}

namespace {

struct ObjClass {
  std::string noun;
  std::string attr;
  bool operator==(const ObjClass& o) const {
    return noun == o.noun && attr == o.attr;
  }
};

struct Placed {
  Box box{};
  ObjClass cls;
};

class Generator {
 public:
  Generator(const SynthSpec& spec, std::uint64_t seed)
      : spec_(spec), rng_(seed), proto_seed_(seed ^ 0x9e3779b97f4a7c15ull) {
    grammar_ = grammar_of(spec);
  }

  const Grammar& grammar() const { return grammar_; }

  Example generate() {
    for (int attempt = 0; attempt < spec_.max_attempts; ++attempt) {
      Example ex;
      if (try_generate(ex)) return ex;
    }
    throw std::runtime_error(
        "synth: unsatisfiable placement constraints after bounded retries");
  }

 private:
  Box random_box() {
    const Scalar c = spec_.canvas;
    const Scalar w = rng_.uniform(0.10, 0.28) * c;
    const Scalar h = rng_.uniform(0.10, 0.28) * c;
    const Scalar x = rng_.uniform(0, c - w);
    const Scalar y = rng_.uniform(0, c - h);
    return {x, y, x + w, y + h};
  }

  const std::string& pick(const std::vector<std::string>& v) {
    return v[rng_.below(v.size())];
  }

  const std::string& pick_noun(bool referent_role) {
    const size_t front = (spec_.nouns.size() + 1) / 2;
    const Scalar p_front = referent_role ? spec_.referent_pool_bias
                                         : 1 - spec_.referent_pool_bias;
    if (rng_.uniform() < p_front)
      return spec_.nouns[rng_.below(front)];
    return spec_.nouns[front + rng_.below(spec_.nouns.size() - front)];
  }

  // Every (noun, attribute) pair owns one prototype; regions add noise.
  // Back-pool nouns form fine-grained families: they share a per-attribute
  // base and differ by a scaled offset, so telling them apart takes far
  // more supervision than the front-pool classes need.
  Vec appearance_of(const ObjClass& cls) {
    const size_t front = (spec_.nouns.size() + 1) / 2;
    bool in_front = false;
    for (size_t i = 0; i < front; ++i)
      if (spec_.nouns[i] == cls.noun) in_front = true;
    Vec out;
    if (in_front || spec_.back_family_scale >= 1.0) {
      out = proto(cls.noun + "|" + cls.attr);
    } else {
      out = proto("#family|" + cls.attr) +
            spec_.back_family_scale * proto(cls.noun + "|" + cls.attr);
    }
    for (int d = 0; d < spec_.appearance_dim; ++d)
      out[d] += spec_.appearance_noise * rng_.normal();
    return out;
  }

  const Vec& proto(const std::string& key) {
    auto it = protos_.find(key);
    if (it != protos_.end()) return it->second;
    Rng r(fnv1a(key, proto_seed_));
    Vec p(spec_.appearance_dim);
    for (int d = 0; d < spec_.appearance_dim; ++d) p[d] = r.uniform(-1, 1);
    return protos_.emplace(key, std::move(p)).first->second;
  }

  bool try_generate(Example& out) {
    const int n_true = spec_.regions_per_scene;
    const int m = rng_.uniform() < spec_.p_three_nodes ? 3 : 2;

    // node classes: referent first, contexts with distinct classes
    std::vector<ObjClass> node_cls(m);
    node_cls[0] = {pick_noun(true), pick(spec_.attributes)};
    for (int k = 1; k < m; ++k) {
      bool found = false;
      for (int t = 0; t < 100 && !found; ++t) {
        ObjClass c{pick_noun(false), pick(spec_.attributes)};
        bool clash = false;
        for (int p = 0; p < k; ++p)
          if (node_cls[p] == c) clash = true;
        if (!clash) {
          node_cls[k] = c;
          found = true;
        }
      }
      if (!found) return false;
    }
    std::vector<TokenSeq> rels(m - 1);
    for (auto& r : rels) r = spec_.relations[rng_.below(spec_.relations.size())];

    // Subject of a relation chain plus one satisfying object per
    // relation. Decoys are drawn through the same procedure (their
    // anchors are discarded), so the box distribution alone carries no
    // referent-vs-distractor signal; the uniqueness check below rejects
    // decoys that accidentally line up with the true contexts.
    auto place_chain = [&](std::vector<Box>& boxes) {
      boxes.assign(1, random_box());
      for (const auto& rel : rels) {
        bool ok = false;
        for (int t = 0; t < 60 && !ok; ++t) {
          Box b = random_box();
          if (relation_holds(rel, boxes[0], b, spec_.canvas)) {
            boxes.push_back(b);
            ok = true;
          }
        }
        if (!ok) return false;
      }
      return true;
    };

    // true regions: referent, contexts, referent-class distractors,
    // optional context duplicate, fillers
    std::vector<Placed> placed;
    {
      std::vector<Box> chain;
      if (!place_chain(chain)) return false;
      placed.push_back({chain[0], node_cls[0]});
      for (int k = 1; k < m; ++k) placed.push_back({chain[k], node_cls[k]});
    }

    for (int d = 0; d < spec_.referent_distractors; ++d) {
      const bool hard = rng_.uniform() < spec_.p_hard;
      ObjClass cls = node_cls[0];
      if (!hard) {
        bool found = false;
        for (int t = 0; t < 100 && !found; ++t) {
          cls.attr = pick(spec_.attributes);
          ObjClass probe{node_cls[0].noun, cls.attr};
          bool clash = probe == node_cls[0];
          for (int k = 1; k < m; ++k)
            if (probe == node_cls[k]) clash = true;
          if (!clash) found = true;
        }
        if (!found) return false;
      }
      std::vector<Box> chain;
      if (!place_chain(chain)) return false;
      placed.push_back({chain[0], cls});
    }

    if (static_cast<int>(placed.size()) < n_true &&
        rng_.uniform() < spec_.p_context_dup && m >= 2) {
      const int k = 1 + static_cast<int>(rng_.below(m - 1));
      // same placement law as a true context, against a discarded anchor
      const Box anchor = random_box();
      for (int t = 0; t < 60; ++t) {
        Box b = random_box();
        if (relation_holds(rels[k - 1], anchor, b, spec_.canvas)) {
          placed.push_back({b, node_cls[k]});
          break;
        }
      }
      // no duplicate this scene if placement kept failing
    }

    for (int tries = 0; static_cast<int>(placed.size()) < n_true; ++tries) {
      if (tries > 100 * n_true) return false;
      ObjClass cls{pick(spec_.nouns), pick(spec_.attributes)};
      bool clash = false;
      for (int k = 0; k < m; ++k)
        if (cls == node_cls[k]) clash = true;
      if (clash) continue;
      placed.push_back({random_box(), cls});
    }

    // unique-assignment check over class-consistent candidates
    std::vector<std::vector<int>> cands(m);
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < n_true; ++i)
        if (placed[i].cls == node_cls[k]) cands[k].push_back(i);
    const std::vector<int> intended = [&] {
      std::vector<int> a(m);
      for (int k = 0; k < m; ++k) a[k] = k;  // construction order
      return a;
    }();
    int consistent = 0;
    std::vector<int> pickidx(m, 0), found;
    while (true) {
      std::vector<int> assign(m);
      for (int k = 0; k < m; ++k) assign[k] = cands[k][pickidx[k]];
      bool ok = true;
      for (int k = 1; k < m && ok; ++k)
        ok = relation_holds(rels[k - 1], placed[assign[0]].box,
                            placed[assign[k]].box, spec_.canvas);
      if (ok) {
        ++consistent;
        found = assign;
        if (consistent > 1) break;
      }
      int k = m - 1;
      while (k >= 0 && ++pickidx[k] == static_cast<int>(cands[k].size())) {
        pickidx[k] = 0;
        --k;
      }
      if (k < 0) break;
    }
    if (consistent != 1 || found != intended) return false;

    // detection setting: add jittered candidate boxes
    std::vector<Placed> regions = placed;
    if (spec_.setting == "det") {
      for (int i = 0; i < n_true; ++i)
        for (int jit = 0; jit < spec_.det_jitters; ++jit)
          regions.push_back({jitter_box(placed[i].box), placed[i].cls});
    }

    // shuffle region order so index carries no signal
    std::vector<int> perm(regions.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    for (size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng_.below(i)]);
    std::vector<int> where(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) where[perm[i]] = static_cast<int>(i);

    out.scene.width = spec_.canvas;
    out.scene.height = spec_.canvas;
    out.scene.regions.resize(regions.size());
    for (size_t i = 0; i < regions.size(); ++i) {
      Region r;
      r.box = regions[perm[i]].box;
      r.appearance = appearance_of(regions[perm[i]].cls);
      out.scene.regions[i] = std::move(r);
    }

    out.gt_regions.resize(m);
    for (int k = 0; k < m; ++k) out.gt_regions[k] = where[k];
    out.setting = spec_.setting;

    // expression and its parse
    const std::string det =
        spec_.determiners.empty() ? "" : spec_.determiners.front() + " ";
    std::string expr = det + node_cls[0].attr + " " + node_cls[0].noun;
    for (int k = 1; k < m; ++k)
      expr += " " + join(rels[k - 1]) + " " + det + node_cls[k].attr + " " +
              node_cls[k].noun;
    out.expression = expr;
    out.graph = parse_expression(expr, grammar_);
    if (out.graph.node_count() != m) return false;
    return true;
  }

  Box jitter_box(const Box& b) {
    const Scalar w = b[2] - b[0], h = b[3] - b[1];
    const Scalar cx = center_x(b) + rng_.uniform(-0.45, 0.45) * w;
    const Scalar cy = center_y(b) + rng_.uniform(-0.45, 0.45) * h;
    const Scalar sw = w * std::exp(rng_.uniform(-0.35, 0.35));
    const Scalar sh = h * std::exp(rng_.uniform(-0.35, 0.35));
    Box out{cx - sw / 2, cy - sh / 2, cx + sw / 2, cy + sh / 2};
    out[0] = std::max(Scalar(0), out[0]);
    out[1] = std::max(Scalar(0), out[1]);
    out[2] = std::min(spec_.canvas, out[2]);
    out[3] = std::min(spec_.canvas, out[3]);
    if (out[2] - out[0] < 2) out[2] = std::min(spec_.canvas, out[0] + 2);
    if (out[3] - out[1] < 2) out[3] = std::min(spec_.canvas, out[1] + 2);
    if (out[2] - out[0] < 2) out[0] = out[2] - 2;
    if (out[3] - out[1] < 2) out[1] = out[3] - 2;
    return out;
  }

  const SynthSpec& spec_;
  Rng rng_;
  std::uint64_t proto_seed_;
  Grammar grammar_;
  std::unordered_map<std::string, Vec> protos_;
};

}  // namespace

Dataset generate_synthetic_dataset(const SynthSpec& spec, std::uint64_t seed) {
  validate_synth_spec(spec);
  Generator gen(spec, seed);

  Dataset ds;
  ds.grammar = gen.grammar();
  ds.vocab = vocabulary_from_grammar(ds.grammar);
  auto fill = [&](const char* name, int count) {
    auto& split = ds.splits[name];
    for (int i = 0; i < count; ++i) split.push_back(gen.generate());
  };
  fill("train", spec.num_train);
  fill("val", spec.num_val);
  fill("test", spec.num_test);
  return ds;
}

}  // namespace jvg
