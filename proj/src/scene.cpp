#include "jvg/scene.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jvg {

using nlohmann::json;

void validate_scene(const Scene& s) {
  if (s.regions.empty()) throw std::runtime_error("scene: no regions");
  if (s.width <= 0 || s.height <= 0)
    throw std::runtime_error("scene: non-positive canvas size");
  const Index dim = s.regions.front().appearance.size();
  for (size_t i = 0; i < s.regions.size(); ++i) {
    const auto& r = s.regions[i];
    const std::string tag = "scene region " + std::to_string(i);
    if (!(r.box[0] < r.box[2]) || !(r.box[1] < r.box[3]))
      throw std::runtime_error(tag + ": degenerate box");
    if (r.box[0] < 0 || r.box[1] < 0 || r.box[2] > s.width || r.box[3] > s.height)
      throw std::runtime_error(tag + ": box outside canvas");
    if (r.appearance.size() != dim)
      throw std::runtime_error(tag + ": appearance dimension mismatch");
    if (!r.appearance.allFinite())
      throw std::runtime_error(tag + ": non-finite appearance");
  }
}

Vec spatial_features(const Box& box, Scalar width, Scalar height) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("spatial_features: non-positive canvas size");
  Vec f(5);
  f << box[0] / width, box[1] / height, box[2] / width, box[3] / height,
      (box[2] - box[0]) * (box[3] - box[1]) / (width * height);
  return f;
}

json scene_to_json(const Scene& s) {
  json regions = json::array();
  for (const auto& r : s.regions) {
    std::vector<Scalar> app(r.appearance.data(),
                            r.appearance.data() + r.appearance.size());
    regions.push_back(
        {{"box", {r.box[0], r.box[1], r.box[2], r.box[3]}}, {"appearance", app}});
  }
  return {{"width", s.width}, {"height", s.height}, {"regions", regions}};
}

Scene scene_from_json(const json& j) {
  if (!j.is_object() || !j.contains("width") || !j.contains("height") ||
      !j.contains("regions"))
    throw std::runtime_error("scene json: expected width/height/regions");
  Scene s;
  s.width = j.at("width").get<Scalar>();
  s.height = j.at("height").get<Scalar>();
  const json& regions = j.at("regions");
  if (!regions.is_array()) throw std::runtime_error("scene json: /regions: expected array");
  for (size_t i = 0; i < regions.size(); ++i) {
    const std::string path = "/regions/" + std::to_string(i);
    const json& jr = regions[i];
    if (!jr.is_object() || !jr.contains("box") || !jr.contains("appearance"))
      throw std::runtime_error("scene json: " + path + ": expected box/appearance");
    const json& jb = jr.at("box");
    if (!jb.is_array() || jb.size() != 4)
      throw std::runtime_error("scene json: " + path + "/box: expected 4 numbers");
    Region r;
    for (int k = 0; k < 4; ++k) r.box[k] = jb[k].get<Scalar>();
    const auto app = jr.at("appearance").get<std::vector<Scalar>>();
    r.appearance = Eigen::Map<const Vec>(app.data(), app.size());
    s.regions.push_back(std::move(r));
  }
  validate_scene(s);
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  return scene_from_json(json::parse(in));
}

}  // namespace jvg
