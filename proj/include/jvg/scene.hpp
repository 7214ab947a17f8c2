#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jvg/types.hpp"

namespace jvg {

using Box = std::array<Scalar, 4>;  // x_tl, y_tl, x_br, y_br in pixels

struct Region {
  Box box{};
  Vec appearance;
};

// The label space of the grounding variables: candidate regions of one image.
struct Scene {
  Scalar width = 0;
  Scalar height = 0;
  std::vector<Region> regions;

  int size() const { return static_cast<int>(regions.size()); }
};

// Throws on empty region set, degenerate boxes, boxes outside the canvas,
// or inconsistent appearance dimensions.
void validate_scene(const Scene& s);

// [x_tl/W, y_tl/H, x_br/W, y_br/H, area/(W*H)]; throws when W or H <= 0.
Vec spatial_features(const Box& box, Scalar width, Scalar height);

nlohmann::json scene_to_json(const Scene& s);
Scene scene_from_json(const nlohmann::json& j);
Scene load_scene(const std::string& path);

}  // namespace jvg
