#include "jvg/trainer.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "jvg/eval.hpp"
#include "jvg/pipeline.hpp"
#include "jvg/rng.hpp"

namespace jvg {

std::vector<EpochMetrics> fit(ModelParams& params,
                              const std::vector<Example>& train,
                              const Vocabulary& vocab, const TrainConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("fit: empty dataset");
  if (cfg.learning_rate < 0 || cfg.batch_size < 1 || cfg.epochs < 0 ||
      cfg.decay <= 0 || cfg.decay > 1)
    throw std::invalid_argument("fit: bad training config");

  const Index p = params.flat.size();
  Vec m1 = Vec::Zero(p), m2 = Vec::Zero(p), grad = Vec::Zero(p);
  const Index emb_size =
      static_cast<Index>(params.cfg.vocab_size) * params.cfg.embed_dim;

  Rng rng(cfg.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  PipelineOptions popts;
  popts.marginalize = cfg.marginalize;
  EvalOptions eopts;
  eopts.marginalize = cfg.marginalize;

  std::vector<EpochMetrics> metrics;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Scalar lr =
        cfg.learning_rate * std::pow(cfg.decay, epoch / cfg.decay_every);

    // Fisher-Yates from the run seed
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = rng.below(i);
      std::swap(order[i - 1], order[j]);
    }

    Scalar loss_sum = 0;
    for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const size_t end = std::min(order.size(), begin + cfg.batch_size);
      grad.setZero();
      for (size_t k = begin; k < end; ++k) {
        const Example& ex = train[order[k]];
        loss_sum += example_loss_grad(ex.scene, ex.graph, target_of(ex, cfg.eta),
                                      vocab, params, popts, grad);
      }
      if (!std::isfinite(loss_sum))
        throw std::runtime_error("fit: loss diverged at epoch " +
                                 std::to_string(epoch) + " step " +
                                 std::to_string(step));
      if (cfg.freeze_embeddings) grad.head(emb_size).setZero();

      ++step;
      const Scalar bc1 = 1 - std::pow(cfg.beta1, static_cast<Scalar>(step));
      const Scalar bc2 = 1 - std::pow(cfg.beta2, static_cast<Scalar>(step));
      m1 = cfg.beta1 * m1 + (1 - cfg.beta1) * grad;
      m2 = (cfg.beta2 * m2.array() + (1 - cfg.beta2) * grad.array().square())
               .matrix();
      params.flat -=
          (lr * (m1 / bc1).array() / ((m2 / bc2).array().sqrt() + cfg.epsilon))
              .matrix();
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.mean_loss = loss_sum / static_cast<Scalar>(train.size());
    em.referent_acc = evaluate(train, vocab, params, eopts).referent_acc;
    em.learning_rate = lr;
    metrics.push_back(em);
  }
  return metrics;
}

}  // namespace jvg
