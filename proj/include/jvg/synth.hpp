#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jvg/dataset.hpp"

namespace jvg {

// Controls the synthetic benchmark generator. Every expression has a
// unique correct joint grounding: the referent is disambiguated from
// same-class distractors by its relations to context objects, and each
// context object has exactly one consistent region.
struct SynthSpec {
  int num_train = 2000;
  int num_val = 0;
  int num_test = 500;
  int regions_per_scene = 8;
  Scalar canvas = 128;

  std::vector<std::string> nouns;
  std::vector<std::string> attributes;
  std::vector<TokenSeq> relations;  // drawn from the placeable set below
  std::vector<std::string> determiners = {"the"};

  int appearance_dim = 16;
  Scalar appearance_noise = 0.08;

  Scalar p_three_nodes = 0.5;   // otherwise two-node graphs
  Scalar p_hard = 0.6;          // distractor shares the referent's attribute
  Scalar p_context_dup = 0.35;  // add a same-class copy of one context
  int referent_distractors = 2; // same-noun regions beyond the referent

  // Noun usage skew. Referent nouns come from the front half of `nouns`
  // with this probability and from the back half otherwise; context
  // nouns use the opposite bias. At 0.5 both roles draw uniformly.
  // A high bias yields classes that are seen mostly as contexts, the
  // regime where supervision has to travel through the graph.
  Scalar referent_pool_bias = 0.5;

  // Below 1, back-pool prototypes sharing an attribute collapse toward a
  // family base with offsets of this scale: fine-grained classes that
  // need many sightings to separate.
  Scalar back_family_scale = 1.0;

  std::string setting = "gt";   // "gt" or "det"
  int det_jitters = 1;          // extra IoU-jittered candidates per region

  int max_attempts = 200;
};

// Placeable relations: "left of", "right of", "above", "below",
// interpreted on box centers with a margin of 0.12 * canvas.
bool relation_holds(const TokenSeq& relation, const Box& subject,
                    const Box& object, Scalar canvas);

Grammar grammar_of(const SynthSpec& spec);

void validate_synth_spec(const SynthSpec& spec);

nlohmann::json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);
SynthSpec load_synth_spec(const std::string& path);

// Deterministic in the seed, down to the serialized bytes.
Dataset generate_synthetic_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace jvg
