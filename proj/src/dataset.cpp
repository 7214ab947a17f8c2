#include "jvg/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jvg/soft_label.hpp"

namespace jvg {

namespace fs = std::filesystem;
using nlohmann::json;

int Example::referent_index() const {
  for (int i = 0; i < graph.node_count(); ++i)
    if (graph.nodes[i].id == graph.referent) return i;
  throw std::runtime_error("example: referent id missing from graph");
}

Target target_of(const Example& ex, Scalar eta) {
  const int gt = ex.gt_referent_region();
  if (gt < 0 || gt >= ex.scene.size())
    throw std::runtime_error("example: ground-truth region out of range");
  if (ex.setting == "gt") return Target(gt);
  return Target(make_soft_labels(ex.scene, ex.scene.regions[gt].box, eta));
}

json example_to_json(const Example& ex) {
  return {{"scene", scene_to_json(ex.scene)},
          {"expression", ex.expression},
          {"graph", scene_graph_to_json(ex.graph)},
          {"gt_regions", ex.gt_regions},
          {"setting", ex.setting}};
}

Example example_from_json(const json& j) {
  Example ex;
  ex.scene = scene_from_json(j.at("scene"));
  ex.expression = j.at("expression").get<std::string>();
  ex.graph = scene_graph_from_json(j.at("graph"));
  ex.gt_regions = j.at("gt_regions").get<std::vector<int>>();
  ex.setting = j.at("setting").get<std::string>();
  if (ex.setting != "gt" && ex.setting != "det")
    throw std::runtime_error("example: setting must be gt or det");
  if (static_cast<int>(ex.gt_regions.size()) != ex.graph.node_count())
    throw std::runtime_error("example: gt_regions length mismatch");
  for (int r : ex.gt_regions)
    if (r < 0 || r >= ex.scene.size())
      throw std::runtime_error("example: gt region index out of range");
  return ex;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  fs::create_directories(fs::path(dir) / "examples");
  auto write = [](const fs::path& p, const json& j) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << j.dump();
  };
  write(fs::path(dir) / "grammar.json", grammar_to_json(ds.grammar));
  write(fs::path(dir) / "vocab.json", vocabulary_to_json(ds.vocab));

  json splits = json::object();
  int counter = 0;
  for (const auto& [name, examples] : ds.splits) {
    std::vector<std::string> files;
    for (const auto& ex : examples) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "examples/ex_%06d.json", counter++);
      write(fs::path(dir) / buf, example_to_json(ex));
      files.emplace_back(buf);
    }
    splits[name] = files;
  }
  write(fs::path(dir) / "manifest.json", json{{"format", "jvg-dataset"},
                                              {"version", 1},
                                              {"grammar", "grammar.json"},
                                              {"vocab", "vocab.json"},
                                              {"splits", splits}});
}

Dataset load_dataset(const std::string& dir) {
  auto read = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return json::parse(in);
  };
  const json manifest = read(fs::path(dir) / "manifest.json");
  if (manifest.value("format", "") != "jvg-dataset")
    throw std::runtime_error("dataset: unrecognized manifest format");
  Dataset ds;
  ds.grammar = grammar_from_json(
      read(fs::path(dir) / manifest.at("grammar").get<std::string>()));
  ds.vocab = vocabulary_from_json(
      read(fs::path(dir) / manifest.at("vocab").get<std::string>()));
  for (const auto& [name, files] : manifest.at("splits").items()) {
    std::vector<Example>& out = ds.splits[name];
    for (const auto& f : files)
      out.push_back(example_from_json(read(fs::path(dir) / f.get<std::string>())));
  }
  return ds;
}

}  // namespace jvg
