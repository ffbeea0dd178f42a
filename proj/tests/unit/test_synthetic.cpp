#include <doctest.h>

#include <set>

#include "biocom/synthetic.hpp"
#include "biocom/text.hpp"
#include "temp_dir.hpp"

using namespace biocom;

TEST_CASE("minimal spec produces forced counts") {
  SynthSpec spec;
  spec.n_concepts = 2;
  spec.synonyms_per_concept = 1;
  spec.sentences_per_concept = 1;
  const auto d = generate(spec);
  CHECK(d.corpus.size() == 2);
  CHECK(d.gold.size() == 2);
  CHECK(d.dictionary.size() == 2);
  CHECK(d.manifest.sentences == 2);
}

TEST_CASE("same seed gives byte-identical files") {
  SynthSpec spec;
  spec.n_concepts = 10;
  spec.sentences_per_concept = 5;
  spec.seed = 17;
  testing::TempDir a, b;
  write_synth(generate(spec), a.path());
  write_synth(generate(spec), b.path());
  for (const char* f : {"dictionary.tsv", "corpus.jsonl", "gold.jsonl", "heldout.jsonl", "manifest.json"}) {
    const auto content = testing::read_file(a / f);
    CHECK(!content.empty());
    CHECK(content == testing::read_file(b / f));
  }
  spec.seed = 18;
  testing::TempDir c;
  write_synth(generate(spec), c.path());
  CHECK(testing::read_file(a / "corpus.jsonl") != testing::read_file(c / "corpus.jsonl"));
}

TEST_CASE("zero context signal places no cue words") {
  SynthSpec spec;
  spec.n_concepts = 20;
  spec.sentences_per_concept = 10;
  spec.context_signal = 0.0;
  spec.cue_words_per_concept = 3;
  const auto d = generate(spec);
  std::set<std::string> cues;
  for (const auto& c : d.cue_words) cues.insert(c.begin(), c.end());
  CHECK(d.manifest.cue_sentences == 0);
  for (const auto& s : d.corpus) {
    for (const auto& t : text::tokenize(s.text)) CHECK(cues.count(text::normalize_key(t.text, {})) == 0);
  }
}

TEST_CASE("cue words appear at the requested rate") {
  SynthSpec spec;
  spec.context_signal = 0.9;
  const auto d = generate(spec);
  const double rate = static_cast<double>(d.manifest.cue_sentences) / static_cast<double>(d.manifest.sentences);
  CHECK(rate > 0.85);
  CHECK(rate < 0.95);
}

TEST_CASE("every generated mention is found by the linker") {
  SynthSpec spec;
  spec.seed = 3;
  const auto d = generate(spec);
  const auto linked = link_corpus(Matcher(d.make_dictionary()), d.corpus, LinkMode::all, {});
  REQUIRE(linked.size() == d.gold.size());
  for (std::size_t i = 0; i < linked.size(); ++i) {
    REQUIRE(linked[i].mentions.size() == 1);
    CHECK(linked[i].mentions[0].start == d.gold[i].start);
    CHECK(linked[i].mentions[0].end == d.gold[i].end);
    CHECK(linked[i].mentions[0].concept_id == d.gold[i].gold_concept);
  }
  const auto st = corpus_stats(linked);
  CHECK(st.sentences == d.manifest.sentences);
  CHECK(st.mentions == d.manifest.mentions);
  CHECK(st.concepts == d.manifest.concepts);
}

TEST_CASE("held-out synonyms are absent from the dictionary") {
  const auto d = generate(SynthSpec{});
  const auto dict = d.make_dictionary();
  const Matcher m(dict);
  CHECK(d.heldout.size() == d.manifest.heldout_mentions);
  for (const auto& g : d.heldout) {
    CHECK_FALSE(dict.lookup(text::substr_chars(g.text, g.start, g.end)).has_value());
    CHECK(m.find(g.text).empty());
  }
}

TEST_CASE("clean synonyms never match inside each other") {
  const auto d = generate(SynthSpec{});
  const auto dict = d.make_dictionary();
  for (const auto& [c, s] : d.dictionary) {
    const auto all = Matcher(dict).all_occurrences(s);
    REQUIRE(all.size() == 1);
    CHECK(all[0].concept_id == c);
  }
}

TEST_CASE("adversarial overlap forces the longer match") {
  SynthSpec spec;
  spec.n_concepts = 6;
  spec.adversarial_overlap = true;
  const auto d = generate(spec);
  const auto dict = d.make_dictionary();
  std::size_t nested = 0;
  for (const auto& [c, s] : d.dictionary) {
    const auto all = Matcher(dict).all_occurrences(s);
    if (all.size() > 1) ++nested;
    const auto found = find_matches(dict, s);
    REQUIRE(found.size() == 1);
    CHECK(found[0].concept_id == c);
  }
  CHECK(nested == 3);
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec;
  spec.context_signal = 1.5;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = {};
  spec.n_concepts = 0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}
