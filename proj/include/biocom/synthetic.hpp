#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "biocom/corpus.hpp"
#include "biocom/evaluation.hpp"

namespace biocom {

/// Knobs of the synthetic entity-linking task. Each concept owns a set of
/// synonyms and a private pool of cue words; sentences are filler words from
/// a shared vocabulary plus one synonym, with cue words placed near the
/// mention with probability `context_signal`.
struct SynthSpec {
  std::size_t n_concepts = 50;
  std::size_t synonyms_per_concept = 3;
  std::size_t sentences_per_concept = 40;
  double context_signal = 0.9;
  std::size_t vocab_size = 400;
  std::uint64_t seed = 0;

  std::size_t cue_words_per_concept = 1;
  std::size_t filler_words_per_sentence = 12;
  /// Synonyms kept out of the dictionary; their sentences form the held-out set.
  std::size_t heldout_synonyms_per_concept = 1;
  std::size_t heldout_sentences_per_concept = 10;
  /// Replaces every odd concept's last synonym with "<word> " + the previous
  /// concept's first synonym, so linking must prefer the longer match.
  bool adversarial_overlap = false;

  void validate() const;
};

struct SynthManifest {
  std::size_t concepts = 0;
  std::size_t synonyms = 0;
  std::size_t sentences = 0;
  std::size_t mentions = 0;
  std::size_t heldout_synonyms = 0;
  std::size_t heldout_sentences = 0;
  std::size_t heldout_mentions = 0;
  std::size_t cue_sentences = 0;  // corpus sentences that carry a cue word
};

struct SynthData {
  SynthSpec spec;
  std::vector<std::pair<ConceptId, std::string>> dictionary;  // (concept, synonym) in file order
  std::vector<RawSentence> corpus;
  std::vector<GoldMention> gold;     // every corpus mention
  std::vector<GoldMention> heldout;  // mentions of held-out synonyms
  std::vector<std::vector<std::string>> cue_words;  // per concept
  SynthManifest manifest;

  Dictionary make_dictionary(const text::NormalizationPolicy& policy = {}) const;
};

SynthData generate(const SynthSpec& spec);

/// Writes dictionary.tsv, corpus.jsonl, gold.jsonl, heldout.jsonl and
/// manifest.json into `dir` (created if needed).
void write_synth(const SynthData& data, const std::filesystem::path& dir);

std::string manifest_json(const SynthData& data);

}  // namespace biocom
