#include "biocom/trainer.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "biocom/error.hpp"
#include "biocom/parallel.hpp"

namespace biocom {

void TrainConfig::validate() const {
  if (concepts_per_batch < 2) throw std::invalid_argument("concepts_per_batch must be >= 2");
  if (sentences_per_concept < 2) throw std::invalid_argument("sentences_per_concept must be >= 2");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning_rate must be finite and >= 0");
  loss.validate();
}

TrainingPool build_pool(std::span<const LinkedSentence> store, std::size_t min_sentences) {
  using SentenceKey = std::pair<std::string, std::int64_t>;
  std::vector<ConceptId> order;
  std::map<ConceptId, std::size_t> index;
  std::vector<std::vector<SentenceKey>> keys;
  std::vector<std::vector<std::vector<MentionRef>>> groups;

  for (std::size_t s = 0; s < store.size(); ++s) {
    const SentenceKey key{store[s].doc_id, store[s].sent_id};
    for (std::size_t m = 0; m < store[s].mentions.size(); ++m) {
      const ConceptId& c = store[s].mentions[m].concept_id;
      auto [it, inserted] = index.try_emplace(c, order.size());
      if (inserted) {
        order.push_back(c);
        keys.emplace_back();
        groups.emplace_back();
      }
      auto& ks = keys[it->second];
      auto& gs = groups[it->second];
      std::size_t g = 0;
      while (g < ks.size() && ks[g] != key) ++g;
      if (g == ks.size()) {
        ks.push_back(key);
        gs.emplace_back();
      }
      gs[g].push_back({s, m});
    }
  }

  TrainingPool pool;
  pool.store = store;
  for (std::size_t c = 0; c < order.size(); ++c) {
    if (groups[c].size() < min_sentences) {
      ++pool.dropped_concepts;
      continue;
    }
    pool.concepts.push_back(order[c]);
    pool.sentences.push_back(std::move(groups[c]));
  }
  if (pool.concepts.empty()) throw Error("training pool is empty: no concept has " + std::to_string(min_sentences) + " distinct sentences");
  return pool;
}

MentionInput mention_input(const LinkedSentence& sentence, std::size_t mention) {
  const auto& m = sentence.mentions.at(mention);
  return MentionInput::from_text(sentence.text, m.start, m.end);
}

std::vector<BatchItem> sample_minibatch(const TrainingPool& pool, const TrainConfig& config, Rng& rng) {
  if (pool.size() < config.concepts_per_batch) {
    throw Error("pool has " + std::to_string(pool.size()) + " concepts, batch needs " + std::to_string(config.concepts_per_batch));
  }
  std::vector<BatchItem> batch;
  batch.reserve(config.concepts_per_batch * config.sentences_per_concept);
  for (std::size_t c : rng.sample_indices(pool.size(), config.concepts_per_batch)) {
    const auto& groups = pool.sentences[c];
    if (groups.size() < config.sentences_per_concept) {
      throw Error("concept " + pool.concepts[c].str() + " has too few sentences for the batch");
    }
    for (std::size_t g : rng.sample_indices(groups.size(), config.sentences_per_concept)) {
      const auto& refs = groups[g];
      const MentionRef ref = refs[rng.uniform(refs.size())];
      batch.push_back({mention_input(pool.store[ref.sentence], ref.mention), pool.concepts[c], ref});
    }
  }
  return batch;
}

namespace {

struct Forward {
  std::vector<FeatureVector> features;
  std::vector<std::vector<double>> raw;
  std::vector<ConceptId> labels;
};

Forward forward(const EncoderParams& params, std::span<const BatchItem> batch, unsigned threads) {
  Forward f;
  f.features.resize(batch.size());
  f.raw.resize(batch.size());
  f.labels.reserve(batch.size());
  for (const auto& item : batch) f.labels.push_back(item.label);
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    f.features[i] = featurize(batch[i].input, params.window, params.feature_dim, params.hash_seed);
    f.raw[i] = encode_features(params, f.features[i]).raw;
  });
  return f;
}

}  // namespace

BatchGradient batch_gradient(const EncoderParams& params, std::span<const BatchItem> batch, const MSLossParams& loss,
                             unsigned threads) {
  const Forward f = forward(params, batch, threads);
  const LossAndGrad lg = ms_loss_grad(f.raw, f.labels, loss);
  BatchGradient out{lg.loss, ProjectionGrad(params.dim)};
  // Sequential reduction keeps the sum order fixed.
  for (std::size_t i = 0; i < batch.size(); ++i) out.grad.accumulate(f.features[i], lg.grads[i]);
  return out;
}

double batch_loss(const EncoderParams& params, std::span<const BatchItem> batch, const MSLossParams& loss) {
  const Forward f = forward(params, batch, 1);
  return ms_loss_grad(f.raw, f.labels, loss).loss;
}

StepResult train_step(EncoderParams& params, std::span<const BatchItem> batch, const TrainConfig& config) {
  BatchGradient bg = batch_gradient(params, batch, config.loss, config.threads);
  if (!std::isfinite(bg.loss) || !bg.grad.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite training state: loss=" << bg.loss << ", batch=" << batch.size() << ", touched rows=" << bg.grad.rows().size();
    throw NumericError(msg.str());
  }
  StepResult r;
  r.loss = bg.loss;
  r.zero_gradient = true;
  for (const auto& [feature, g] : bg.grad.rows()) {
    for (double v : g) {
      if (v != 0.0) r.zero_gradient = false;
    }
  }
  if (!r.zero_gradient) bg.grad.apply(params, config.learning_rate);
  return r;
}

TrainResult train(const TrainingPool& pool, EncoderParams initial, const TrainConfig& config) {
  config.validate();
  initial.validate();
  TrainResult result{std::move(initial), {}};
  result.loss_curve.reserve(config.steps);
  Rng rng(config.seed);
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto batch = sample_minibatch(pool, config, rng);
    result.loss_curve.push_back(train_step(result.params, batch, config).loss);
  }
  return result;
}

}  // namespace biocom
