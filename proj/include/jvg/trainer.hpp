#pragma once

#include <cstdint>
#include <vector>

#include "jvg/dataset.hpp"
#include "jvg/model.hpp"

namespace jvg {

struct TrainConfig {
  Scalar learning_rate = 1e-3;
  Scalar decay = 0.9;   // applied every decay_every epochs
  int decay_every = 10;
  int epochs = 20;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool marginalize = true;  // marginalization during training
  bool freeze_embeddings = false;
  Scalar eta = 0.5;  // soft-label threshold for det examples
  // Adam moments
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
};

struct EpochMetrics {
  int epoch = 0;
  Scalar mean_loss = 0;
  Scalar referent_acc = 0;  // on the training split, same inference arm
  Scalar learning_rate = 0;
};

// Adam with bias correction over the flat parameter vector; batch
// gradients are summed in fixed example order and example order is
// shuffled per epoch from the config seed, so runs are reproducible
// bit for bit. Throws when the loss turns non-finite.
std::vector<EpochMetrics> fit(ModelParams& params,
                              const std::vector<Example>& train,
                              const Vocabulary& vocab, const TrainConfig& cfg);

}  // namespace jvg
