#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biocom/concept_id.hpp"
#include "biocom/dictionary.hpp"

namespace biocom {

struct RawSentence {
  std::string doc_id;
  std::int64_t sent_id = 0;
  std::string text;
};

/// [start, end) in Unicode scalar values of the sentence text.
struct MentionSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  ConceptId concept_id;

  friend bool operator==(const MentionSpan&, const MentionSpan&) = default;
};

struct LinkedSentence {
  std::string doc_id;
  std::int64_t sent_id = 0;
  std::string text;
  std::vector<MentionSpan> mentions;  // ordered by start, non-overlapping

  friend bool operator==(const LinkedSentence&, const LinkedSentence&) = default;
};

/// (sentence index in a store, mention index within the sentence)
struct MentionRef {
  std::size_t sentence = 0;
  std::size_t mention = 0;

  friend auto operator<=>(const MentionRef&, const MentionRef&) = default;
};

enum class LinkMode {
  all,  // one output sentence carrying every match
  one,  // one copy of the sentence per match, each linking a single mention
};

LinkMode parse_link_mode(std::string_view name);
std::string_view link_mode_name(LinkMode mode);

/// Multi-pattern matcher compiled from a dictionary (Aho-Corasick over
/// normalized code points). Immutable and safe to share between threads.
class Matcher {
 public:
  explicit Matcher(const Dictionary& dict);

  /// Every word-boundary-aligned synonym occurrence, before overlap
  /// resolution. Offsets index the original text.
  std::vector<MentionSpan> all_occurrences(std::string_view text) const;

  /// Occurrences after longest-wins overlap resolution, sorted by start.
  std::vector<MentionSpan> find(std::string_view text) const;

  const text::NormalizationPolicy& policy() const { return policy_; }
  std::size_t pattern_count() const { return patterns_.size(); }

 private:
  struct Node {
    std::vector<std::pair<char32_t, std::uint32_t>> next;  // sorted by char
    std::uint32_t fail = 0;
    std::uint32_t output_link = 0;  // nearest proper suffix node with a pattern; 0 = none
    std::int32_t pattern = -1;
  };
  struct Pattern {
    std::size_t length = 0;
    std::size_t concept_index = 0;
  };
  struct Candidate {
    std::size_t start = 0;  // normalized offsets
    std::size_t end = 0;
    std::size_t concept_index = 0;
  };

  std::uint32_t child(std::uint32_t node, char32_t c) const;
  std::vector<Candidate> candidates(const text::NormalizedText& norm) const;
  MentionSpan to_span(const text::NormalizedText& norm, const Candidate& c) const;

  text::NormalizationPolicy policy_;
  std::vector<Node> nodes_;
  std::vector<Pattern> patterns_;
  std::vector<ConceptId> concepts_;
};

/// Convenience wrapper that compiles a matcher for a single call.
std::vector<MentionSpan> find_matches(const Dictionary& dict, std::string_view text);
inline std::vector<MentionSpan> find_matches(const Matcher& matcher, std::string_view text) {
  return matcher.find(text);
}

/// Links one sentence; returns 0, 1 (ALL) or k (ONE) linked sentences.
std::vector<LinkedSentence> link_sentence(const Matcher& matcher, const RawSentence& sentence, LinkMode mode);

std::vector<LinkedSentence> link_corpus(const Matcher& matcher, std::span<const RawSentence> sentences, LinkMode mode,
                                        const std::set<std::string>& exclude_doc_ids, unsigned threads = 1);

struct LinkSummary {
  std::size_t read = 0;
  std::size_t excluded = 0;
  std::size_t unmatched = 0;
  std::size_t emitted = 0;
};

/// Streams RawSentence JSONL to LinkedSentence JSONL, in input order.
LinkSummary link_stream(const Matcher& matcher, std::istream& in, std::ostream& out, LinkMode mode,
                        const std::set<std::string>& exclude_doc_ids, unsigned threads = 1,
                        const std::string& source_name = "<stdin>");

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t mentions = 0;
  std::size_t concepts = 0;
  std::map<ConceptId, std::size_t> sentences_per_concept;
  std::map<std::size_t, std::size_t> histogram;  // sentence count -> number of concepts
};

CorpusStats corpus_stats(std::span<const LinkedSentence> linked);

// JSON-Lines records.
RawSentence parse_raw_sentence(std::string_view line, const std::string& source, std::size_t lineno);
LinkedSentence parse_linked_sentence(std::string_view line, const std::string& source, std::size_t lineno);
std::string to_json_line(const LinkedSentence& s);
std::string to_json_line(const RawSentence& s);

std::vector<RawSentence> read_raw_sentences(std::istream& in, const std::string& source = "<stream>");
std::vector<LinkedSentence> read_linked_sentences(std::istream& in, const std::string& source = "<stream>");
std::vector<LinkedSentence> load_linked_sentences(const std::string& path);
void write_linked_sentences(std::ostream& out, std::span<const LinkedSentence> linked);

/// One id per line; blank lines ignored.
std::set<std::string> read_id_list(std::istream& in);

}  // namespace biocom
