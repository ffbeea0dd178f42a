#include "biocom/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "biocom/error.hpp"
#include "biocom/rng.hpp"
#include "biocom/text.hpp"

namespace biocom {
namespace {

constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                        "br", "dr", "gl", "kr", "pl", "st", "th", "sh", "ch", "tr"};
constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea", "io"};
constexpr std::string_view kCodas[] = {"", "", "", "n", "r", "s", "x", "m", "l"};

/// Hands out pseudo-words that are never repeated across the whole run.
class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string next() {
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.uniform(2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng_.uniform(std::size(kOnsets))];
        w += kVowels[rng_.uniform(std::size(kVowels))];
      }
      w += kCodas[rng_.uniform(std::size(kCodas))];
      if (used_.insert(w).second) return w;
    }
  }

  /// Random-letter word, so synonym n-grams overlap little with each other.
  std::string next_term() {
    for (;;) {
      std::string w;
      const std::size_t len = 5 + rng_.uniform(5);
      for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng_.uniform(26)));
      if (used_.insert(w).second) return w;
    }
  }

  std::string phrase(std::size_t words) {
    std::string p;
    for (std::size_t i = 0; i < words; ++i) {
      if (i > 0) p.push_back(' ');
      p += next_term();
    }
    return p;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct BuiltSentence {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  bool has_cue = false;
};

BuiltSentence build_sentence(Rng& rng, const SynthSpec& spec, const std::vector<std::string>& vocab,
                             const std::vector<std::string>& cues, const std::string& synonym) {
  std::vector<std::string> words;
  const std::size_t n_filler = spec.filler_words_per_sentence;
  for (std::size_t i = 0; i < n_filler; ++i) words.push_back(vocab[rng.uniform(vocab.size())]);
  const std::size_t pos = rng.uniform(n_filler + 1);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), synonym);

  BuiltSentence out;
  if (!cues.empty() && rng.bernoulli(spec.context_signal)) {
    out.has_cue = true;
    const std::size_t n_cues = 1 + rng.uniform(2);
    std::size_t mention = pos;
    for (std::size_t c = 0; c < n_cues; ++c) {
      const std::string& cue = cues[rng.uniform(cues.size())];
      // Within three words of the mention, on either side.
      const std::size_t offset = 1 + rng.uniform(3);
      if (rng.bernoulli(0.5)) {
        const std::size_t at = mention >= offset - 1 ? mention - (offset - 1) : 0;
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), cue);
        ++mention;
      } else {
        const std::size_t at = std::min(words.size(), mention + offset);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), cue);
      }
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i] == synonym) {
        mention = i;
        break;
      }
    }
    if (words[mention] != synonym) throw std::logic_error("synonym lost while placing cue words");
  }

  std::size_t chars = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w = words[i];
    if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (i > 0) {
      out.text.push_back(' ');
      ++chars;
    }
    if (words[i] == synonym && out.end == 0) {
      out.start = chars;
      out.end = chars + text::char_length(w);
    }
    out.text += w;
    chars += text::char_length(w);
  }
  out.text.push_back('.');
  return out;
}

std::string concept_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "SYN%05zu", i);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_concepts < 1 || synonyms_per_concept < 1 || sentences_per_concept < 1 || vocab_size < 1) {
    throw std::invalid_argument("synth counts must be >= 1");
  }
  if (!(context_signal >= 0.0 && context_signal <= 1.0)) throw std::invalid_argument("context_signal must be in [0, 1]");
  if (adversarial_overlap && n_concepts < 2) throw std::invalid_argument("adversarial_overlap needs >= 2 concepts");
}

Dictionary SynthData::make_dictionary(const text::NormalizationPolicy& policy) const {
  Dictionary dict(policy);
  for (const auto& [c, s] : dictionary) dict.add(c, s);
  return dict;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  WordFactory words(rng);
  SynthData data;
  data.spec = spec;

  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < spec.vocab_size; ++i) vocab.push_back(words.next());

  std::vector<std::vector<std::string>> synonyms(spec.n_concepts);
  std::vector<std::vector<std::string>> heldout(spec.n_concepts);
  data.cue_words.resize(spec.n_concepts);
  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    for (std::size_t s = 0; s < spec.synonyms_per_concept; ++s) synonyms[c].push_back(words.phrase(1 + rng.uniform(3)));
    for (std::size_t s = 0; s < spec.heldout_synonyms_per_concept; ++s) heldout[c].push_back(words.phrase(1 + rng.uniform(3)));
    for (std::size_t w = 0; w < spec.cue_words_per_concept; ++w) data.cue_words[c].push_back(words.next());
  }
  if (spec.adversarial_overlap) {
    for (std::size_t c = 1; c < spec.n_concepts; c += 2) synonyms[c].back() = words.next() + " " + synonyms[c - 1].front();
  }

  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    for (const auto& s : synonyms[c]) data.dictionary.emplace_back(ConceptId(concept_name(c)), s);
  }

  const auto& cues_for = [&](std::size_t c) -> const std::vector<std::string>& { return data.cue_words[c]; };
  struct Pending {
    std::size_t concept_id;
    BuiltSentence sentence;
  };
  std::vector<Pending> corpus;
  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    for (std::size_t k = 0; k < spec.sentences_per_concept; ++k) {
      const std::string& syn = synonyms[c][k % synonyms[c].size()];
      corpus.push_back({c, build_sentence(rng, spec, vocab, cues_for(c), syn)});
    }
  }
  // Interleave concepts with a seeded shuffle.
  for (std::size_t i = corpus.size(); i > 1; --i) std::swap(corpus[i - 1], corpus[rng.uniform(i)]);

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus[i];
    RawSentence raw{"doc" + std::to_string(i / 4), static_cast<std::int64_t>(i % 4), p.sentence.text};
    data.gold.push_back({raw.doc_id, raw.sent_id, raw.text, p.sentence.start, p.sentence.end, ConceptId(concept_name(p.concept_id))});
    data.corpus.push_back(std::move(raw));
    if (p.sentence.has_cue) ++data.manifest.cue_sentences;
  }

  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    if (heldout[c].empty()) continue;
    for (std::size_t k = 0; k < spec.heldout_sentences_per_concept; ++k) {
      const std::string& syn = heldout[c][k % heldout[c].size()];
      const auto s = build_sentence(rng, spec, vocab, cues_for(c), syn);
      data.heldout.push_back({"heldout-" + concept_name(c), static_cast<std::int64_t>(k), s.text, s.start, s.end,
                              ConceptId(concept_name(c))});
    }
  }

  auto& m = data.manifest;
  m.concepts = spec.n_concepts;
  m.synonyms = data.dictionary.size();
  m.sentences = data.corpus.size();
  m.mentions = data.gold.size();
  m.heldout_synonyms = spec.n_concepts * spec.heldout_synonyms_per_concept;
  m.heldout_sentences = data.heldout.size();
  m.heldout_mentions = data.heldout.size();
  return data;
}

std::string manifest_json(const SynthData& data) {
  const auto& s = data.spec;
  const auto& m = data.manifest;
  nlohmann::ordered_json j;
  j["spec"] = {{"n_concepts", s.n_concepts},
               {"synonyms_per_concept", s.synonyms_per_concept},
               {"sentences_per_concept", s.sentences_per_concept},
               {"context_signal", s.context_signal},
               {"vocab_size", s.vocab_size},
               {"seed", s.seed},
               {"cue_words_per_concept", s.cue_words_per_concept},
               {"filler_words_per_sentence", s.filler_words_per_sentence},
               {"heldout_synonyms_per_concept", s.heldout_synonyms_per_concept},
               {"heldout_sentences_per_concept", s.heldout_sentences_per_concept},
               {"adversarial_overlap", s.adversarial_overlap}};
  j["counts"] = {{"concepts", m.concepts},
                 {"synonyms", m.synonyms},
                 {"sentences", m.sentences},
                 {"mentions", m.mentions},
                 {"heldout_synonyms", m.heldout_synonyms},
                 {"heldout_sentences", m.heldout_sentences},
                 {"heldout_mentions", m.heldout_mentions},
                 {"cue_sentences", m.cue_sentences}};
  return j.dump(2) + "\n";
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("dictionary.tsv");
    for (const auto& [c, s] : data.dictionary) out << c.str() << '\t' << s << '\n';
  }
  {
    auto out = open("corpus.jsonl");
    for (const auto& r : data.corpus) out << to_json_line(r) << '\n';
  }
  {
    auto out = open("gold.jsonl");
    write_gold(out, data.gold);
  }
  {
    auto out = open("heldout.jsonl");
    write_gold(out, data.heldout);
  }
  {
    auto out = open("manifest.json");
    out << manifest_json(data);
  }
}

}  // namespace biocom
