#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jvg/grammar.hpp"
#include "jvg/loss.hpp"
#include "jvg/scene.hpp"
#include "jvg/scene_graph.hpp"
#include "jvg/vocabulary.hpp"

namespace jvg {

// One grounding example. gt_regions holds the correct region per node
// (node order); only the referent's entry supervises training, the rest
// is read by supporting-accuracy evaluation alone.
struct Example {
  Scene scene;
  std::string expression;
  SceneGraph graph;
  std::vector<int> gt_regions;
  std::string setting = "gt";  // "gt" or "det"

  int referent_index() const;
  int gt_referent_region() const { return gt_regions[referent_index()]; }
};

// Training target: region index in the gt setting, IoU soft label in det.
Target target_of(const Example& ex, Scalar eta = 0.5);

nlohmann::json example_to_json(const Example& ex);
Example example_from_json(const nlohmann::json& j);

struct Dataset {
  Grammar grammar;
  Vocabulary vocab;
  std::map<std::string, std::vector<Example>> splits;
};

// Directory layout: manifest.json, grammar.json, vocab.json and one JSON
// file per example under examples/.
void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& dir);

}  // namespace jvg
