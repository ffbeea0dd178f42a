#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "biocom/concept_id.hpp"
#include "biocom/corpus.hpp"
#include "biocom/encoder.hpp"
#include "biocom/metric_learning.hpp"
#include "biocom/rng.hpp"

namespace biocom {

struct TrainConfig {
  std::size_t concepts_per_batch = 16;
  std::size_t sentences_per_concept = 2;
  // Plain gradient descent. The original transformer setup used 1e-5; the
  // hashing encoder trains at a much larger step.
  double learning_rate = 1e-2;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  MSLossParams loss;
  unsigned threads = 1;

  void validate() const;
};

/// Mentions grouped by concept and then by distinct sentence (doc_id, sent_id).
/// Refers into `store`, which must outlive the pool.
struct TrainingPool {
  std::span<const LinkedSentence> store;
  std::vector<ConceptId> concepts;
  std::vector<std::vector<std::vector<MentionRef>>> sentences;  // [concept][sentence] -> refs
  std::size_t dropped_concepts = 0;

  std::size_t size() const { return concepts.size(); }
};

/// Throws Error if no concept has min_sentences distinct sentences.
TrainingPool build_pool(std::span<const LinkedSentence> store, std::size_t min_sentences);

struct BatchItem {
  MentionInput input;
  ConceptId label;
  MentionRef ref;
};

/// concepts_per_batch distinct concepts, each with sentences_per_concept
/// mentions taken from distinct sentences.
std::vector<BatchItem> sample_minibatch(const TrainingPool& pool, const TrainConfig& config, Rng& rng);

MentionInput mention_input(const LinkedSentence& sentence, std::size_t mention);

struct StepResult {
  double loss = 0.0;  // before the update
  bool zero_gradient = false;
};

/// Loss and projection gradient of one batch.
struct BatchGradient {
  double loss = 0.0;
  ProjectionGrad grad;
};
BatchGradient batch_gradient(const EncoderParams& params, std::span<const BatchItem> batch, const MSLossParams& loss,
                             unsigned threads = 1);

double batch_loss(const EncoderParams& params, std::span<const BatchItem> batch, const MSLossParams& loss);

/// One gradient-descent step in place. Throws NumericError on a non-finite
/// loss or gradient, leaving params untouched.
StepResult train_step(EncoderParams& params, std::span<const BatchItem> batch, const TrainConfig& config);

struct TrainResult {
  EncoderParams params;
  std::vector<double> loss_curve;
};

TrainResult train(const TrainingPool& pool, EncoderParams initial, const TrainConfig& config);

}  // namespace biocom
