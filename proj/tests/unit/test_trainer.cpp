#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "biocom/error.hpp"
#include "biocom/synthetic.hpp"
#include "biocom/trainer.hpp"

using namespace biocom;

namespace {

std::vector<LinkedSentence> synth_store(std::size_t concepts, std::uint64_t seed = 1) {
  SynthSpec spec;
  spec.n_concepts = concepts;
  spec.sentences_per_concept = 12;
  spec.seed = seed;
  const auto data = generate(spec);
  return link_corpus(Matcher(data.make_dictionary()), data.corpus, LinkMode::all, {});
}

EncoderConfig small_encoder() {
  EncoderConfig c;
  c.dim = 16;
  c.feature_dim = 1 << 12;
  return c;
}

LinkedSentence sentence(std::string doc, std::int64_t sent, std::string text, std::vector<MentionSpan> m) {
  return {std::move(doc), sent, std::move(text), std::move(m)};
}

}  // namespace

TEST_CASE("pool drops concepts with too few sentences") {
  std::vector<LinkedSentence> store;
  store.push_back(sentence("d", 0, "flu", {{0, 3, ConceptId("RARE")}}));
  for (int i = 0; i < 5; ++i) store.push_back(sentence("d", i + 1, "fever", {{0, 5, ConceptId("COMMON")}}));
  // A repeated (doc, sent) pair is the same sentence.
  store.push_back(sentence("d", 1, "fever", {{0, 5, ConceptId("COMMON")}}));
  const auto pool = build_pool(store, 2);
  REQUIRE(pool.size() == 1);
  CHECK(pool.concepts[0] == ConceptId("COMMON"));
  CHECK(pool.sentences[0].size() == 5);
  CHECK(pool.dropped_concepts == 1);
  CHECK_THROWS_AS(build_pool(store, 10), Error);
  CHECK_THROWS_AS(build_pool({}, 2), Error);
}

TEST_CASE("pool counts follow the generator manifest") {
  SynthSpec spec;
  spec.n_concepts = 20;
  spec.sentences_per_concept = 6;
  const auto data = generate(spec);
  const auto store = link_corpus(Matcher(data.make_dictionary()), data.corpus, LinkMode::all, {});
  const auto pool = build_pool(store, 2);
  CHECK(pool.size() == data.manifest.concepts);
  std::size_t refs = 0;
  for (const auto& c : pool.sentences) {
    for (const auto& s : c) refs += s.size();
  }
  CHECK(refs == data.manifest.mentions);
}

TEST_CASE("sampled batches follow the concept-balanced contract") {
  const auto store = synth_store(30);
  const TrainConfig cfg;
  const auto pool = build_pool(store, cfg.sentences_per_concept);
  Rng rng(3);
  for (int b = 0; b < 200; ++b) {
    const auto batch = sample_minibatch(pool, cfg, rng);
    REQUIRE(batch.size() == 32);
    std::map<ConceptId, std::set<std::pair<std::string, std::int64_t>>> per_concept;
    for (const auto& item : batch) {
      const auto& s = store[item.ref.sentence];
      per_concept[item.label].insert({s.doc_id, s.sent_id});
      CHECK(s.mentions[item.ref.mention].concept_id == item.label);
    }
    CHECK(per_concept.size() == 16);
    for (const auto& [c, sents] : per_concept) CHECK(sents.size() == 2);
  }
}

TEST_CASE("small batch config and undersized pools") {
  std::vector<LinkedSentence> store;
  for (const char* c : {"A", "B", "C"}) {
    for (int i = 0; i < 3; ++i) store.push_back(sentence(c, i, "flu", {{0, 3, ConceptId(c)}}));
  }
  const auto pool = build_pool(store, 2);
  TrainConfig cfg;
  cfg.concepts_per_batch = 2;
  Rng rng(1);
  const auto batch = sample_minibatch(pool, cfg, rng);
  CHECK(batch.size() == 4);
  std::set<ConceptId> labels;
  for (const auto& b : batch) labels.insert(b.label);
  CHECK(labels.size() == 2);

  cfg.concepts_per_batch = 4;
  CHECK_THROWS_AS(sample_minibatch(pool, cfg, rng), Error);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto store = synth_store(20);
  const TrainConfig cfg;
  const auto pool = build_pool(store, 2);
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) {
    const auto x = sample_minibatch(pool, cfg, a), y = sample_minibatch(pool, cfg, b);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(x[k].ref == y[k].ref);
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.concepts_per_batch = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.sentences_per_concept = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("zero learning rate leaves parameters alone") {
  const auto store = synth_store(20);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  const auto pool = build_pool(store, 2);
  Rng rng(5);
  const auto batch = sample_minibatch(pool, cfg, rng);
  auto params = EncoderParams::random(small_encoder(), 1);
  const auto before = params;
  const auto r = train_step(params, batch, cfg);
  CHECK(params == before);
  CHECK(r.loss > 0.0);
  CHECK(r.loss == batch_loss(before, batch, cfg.loss));
}

TEST_CASE("a batch with nothing mined does not move parameters") {
  const std::vector<BatchItem> batch{{MentionInput::from_tokens({"flu"}, 0, 1), ConceptId("A"), {}}};
  auto params = EncoderParams::random(small_encoder(), 2);
  const auto before = params;
  const auto r = train_step(params, batch, TrainConfig{});
  CHECK(r.zero_gradient);
  CHECK(r.loss == 0.0);
  CHECK(params == before);
}

TEST_CASE("non-finite state aborts without touching parameters") {
  const std::vector<BatchItem> batch{{MentionInput::from_tokens({"flu"}, 0, 1), ConceptId("A"), {}},
                                     {MentionInput::from_tokens({"fever"}, 0, 1), ConceptId("B"), {}}};
  auto params = EncoderParams::random(small_encoder(), 3);
  const auto f = featurize(batch[0].input, params.window, params.feature_dim, params.hash_seed);
  params.projection[f.indices[0] * params.dim] = std::numeric_limits<double>::infinity();
  const auto before = params;
  CHECK_THROWS_AS(train_step(params, batch, TrainConfig{}), NumericError);
  CHECK(params.projection == before.projection);
}

TEST_CASE("repeated steps on one batch do not increase the loss") {
  const auto store = synth_store(20);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  const auto pool = build_pool(store, 2);
  Rng rng(7);
  const auto batch = sample_minibatch(pool, cfg, rng);
  auto params = EncoderParams::random(small_encoder(), 4);
  double prev = batch_loss(params, batch, cfg.loss);
  for (int i = 0; i < 10; ++i) {
    train_step(params, batch, cfg);
    const double now = batch_loss(params, batch, cfg.loss);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("training is reproducible and independent of thread count") {
  const auto store = synth_store(20);
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.seed = 11;
  const auto pool = build_pool(store, 2);
  const auto init = EncoderParams::random(small_encoder(), 5);
  const auto a = train(pool, init, cfg);
  const auto b = train(pool, init, cfg);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.params == b.params);
  cfg.threads = 3;
  const auto c = train(pool, init, cfg);
  CHECK(c.loss_curve == a.loss_curve);
  CHECK(c.params == a.params);

  cfg.steps = 0;
  const auto none = train(pool, init, cfg);
  CHECK(none.params == init);
  CHECK(none.loss_curve.empty());
}

TEST_CASE("training on the synthetic task halves the batch loss") {
  const auto store = synth_store(30, 2);
  TrainConfig cfg;
  cfg.steps = 600;
  cfg.learning_rate = 0.1;
  cfg.seed = 1;
  const auto pool = build_pool(store, 2);
  EncoderConfig enc;
  enc.feature_dim = 1 << 14;
  const auto r = train(pool, EncoderParams::random(enc, 3), cfg);
  const auto mean = [&](std::size_t from, std::size_t to) {
    return std::accumulate(r.loss_curve.begin() + from, r.loss_curve.begin() + to, 0.0) / static_cast<double>(to - from);
  };
  const double first = mean(0, 50), last = mean(r.loss_curve.size() - 50, r.loss_curve.size());
  CHECK(last < 0.5 * first);
}
