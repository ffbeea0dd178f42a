#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "biocom/corpus.hpp"
#include "biocom/error.hpp"
#include "biocom/parallel.hpp"
#include "biocom/text.hpp"

namespace biocom {

using nlohmann::json;

LinkMode parse_link_mode(std::string_view name) {
  if (name == "all") return LinkMode::all;
  if (name == "one") return LinkMode::one;
  throw std::invalid_argument("unknown link mode '" + std::string(name) + "' (expected all|one)");
}

std::string_view link_mode_name(LinkMode mode) { return mode == LinkMode::all ? "all" : "one"; }

std::vector<LinkedSentence> link_sentence(const Matcher& matcher, const RawSentence& sentence, LinkMode mode) {
  auto spans = matcher.find(sentence.text);
  std::vector<LinkedSentence> out;
  if (spans.empty()) return out;
  if (mode == LinkMode::all) {
    out.push_back({sentence.doc_id, sentence.sent_id, sentence.text, std::move(spans)});
    return out;
  }
  out.reserve(spans.size());
  for (auto& span : spans) out.push_back({sentence.doc_id, sentence.sent_id, sentence.text, {std::move(span)}});
  return out;
}

std::vector<LinkedSentence> link_corpus(const Matcher& matcher, std::span<const RawSentence> sentences, LinkMode mode,
                                        const std::set<std::string>& exclude_doc_ids, unsigned threads) {
  std::vector<std::vector<LinkedSentence>> slots(sentences.size());
  parallel_for(sentences.size(), threads, [&](std::size_t i) {
    if (exclude_doc_ids.count(sentences[i].doc_id) != 0) return;
    slots[i] = link_sentence(matcher, sentences[i], mode);
  });
  std::vector<LinkedSentence> out;
  for (auto& slot : slots) {
    for (auto& s : slot) out.push_back(std::move(s));
  }
  return out;
}

LinkSummary link_stream(const Matcher& matcher, std::istream& in, std::ostream& out, LinkMode mode,
                        const std::set<std::string>& exclude_doc_ids, unsigned threads, const std::string& source_name) {
  constexpr std::size_t kChunk = 8192;
  LinkSummary summary;
  std::vector<RawSentence> chunk;
  std::size_t lineno = 0;
  auto flush = [&] {
    std::vector<std::vector<LinkedSentence>> slots(chunk.size());
    std::vector<char> excluded(chunk.size(), 0);
    parallel_for(chunk.size(), threads, [&](std::size_t i) {
      if (exclude_doc_ids.count(chunk[i].doc_id) != 0) {
        excluded[i] = 1;
        return;
      }
      slots[i] = link_sentence(matcher, chunk[i], mode);
    });
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      if (excluded[i] != 0) {
        ++summary.excluded;
      } else if (slots[i].empty()) {
        ++summary.unmatched;
      }
      for (const auto& s : slots[i]) {
        out << to_json_line(s) << '\n';
        ++summary.emitted;
      }
    }
    if (!out) throw Error("write error while linking " + source_name);
    chunk.clear();
  };
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    chunk.push_back(parse_raw_sentence(line, source_name, lineno));
    ++summary.read;
    if (chunk.size() == kChunk) flush();
  }
  if (in.bad()) throw Error("read error on " + source_name + " after line " + std::to_string(lineno));
  flush();
  return summary;
}

CorpusStats corpus_stats(std::span<const LinkedSentence> linked) {
  CorpusStats stats;
  stats.sentences = linked.size();
  for (const auto& s : linked) {
    stats.mentions += s.mentions.size();
    std::set<ConceptId> seen;
    for (const auto& m : s.mentions) seen.insert(m.concept_id);
    for (const auto& c : seen) ++stats.sentences_per_concept[c];
  }
  stats.concepts = stats.sentences_per_concept.size();
  for (const auto& [concept_id, n] : stats.sentences_per_concept) ++stats.histogram[n];
  return stats;
}

namespace {

json parse_object(std::string_view line, const std::string& source, std::size_t lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source, lineno, "expected a JSON object");
  return j;
}

template <class T>
T field(const json& j, const char* key, const std::string& source, std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(source, lineno, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(source, lineno, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

RawSentence parse_raw_sentence(std::string_view line, const std::string& source, std::size_t lineno) {
  const json j = parse_object(line, source, lineno);
  RawSentence s;
  s.doc_id = field<std::string>(j, "doc_id", source, lineno);
  s.sent_id = field<std::int64_t>(j, "sent_id", source, lineno);
  s.text = field<std::string>(j, "text", source, lineno);
  if (s.text.empty()) throw ParseError(source, lineno, "empty text (doc " + s.doc_id + ", sent " + std::to_string(s.sent_id) + ")");
  return s;
}

LinkedSentence parse_linked_sentence(std::string_view line, const std::string& source, std::size_t lineno) {
  const json j = parse_object(line, source, lineno);
  LinkedSentence s;
  s.doc_id = field<std::string>(j, "doc_id", source, lineno);
  s.sent_id = field<std::int64_t>(j, "sent_id", source, lineno);
  s.text = field<std::string>(j, "text", source, lineno);
  const std::size_t length = text::char_length(s.text);
  const auto mentions = field<json>(j, "mentions", source, lineno);
  if (!mentions.is_array()) throw ParseError(source, lineno, "'mentions' must be an array");
  for (const auto& m : mentions) {
    MentionSpan span;
    span.start = field<std::size_t>(m, "start", source, lineno);
    span.end = field<std::size_t>(m, "end", source, lineno);
    span.concept_id = ConceptId(field<std::string>(m, "concept", source, lineno));
    if (span.start >= span.end || span.end > length) throw ParseError(source, lineno, "mention span out of range");
    if (!s.mentions.empty() && span.start < s.mentions.back().end) {
      throw ParseError(source, lineno, "mentions must be sorted and non-overlapping");
    }
    s.mentions.push_back(std::move(span));
  }
  return s;
}

std::string to_json_line(const LinkedSentence& s) {
  json mentions = json::array();
  for (const auto& m : s.mentions) mentions.push_back({{"start", m.start}, {"end", m.end}, {"concept", m.concept_id.str()}});
  json j = {{"doc_id", s.doc_id}, {"sent_id", s.sent_id}, {"text", s.text}, {"mentions", std::move(mentions)}};
  return j.dump();
}

std::string to_json_line(const RawSentence& s) {
  return json{{"doc_id", s.doc_id}, {"sent_id", s.sent_id}, {"text", s.text}}.dump();
}

std::vector<RawSentence> read_raw_sentences(std::istream& in, const std::string& source) {
  std::vector<RawSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    out.push_back(parse_raw_sentence(line, source, lineno));
  }
  return out;
}

std::vector<LinkedSentence> read_linked_sentences(std::istream& in, const std::string& source) {
  std::vector<LinkedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    out.push_back(parse_linked_sentence(line, source, lineno));
  }
  return out;
}

std::vector<LinkedSentence> load_linked_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_linked_sentences(in, path);
}

void write_linked_sentences(std::ostream& out, std::span<const LinkedSentence> linked) {
  for (const auto& s : linked) out << to_json_line(s) << '\n';
}

std::set<std::string> read_id_list(std::istream& in) {
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    ids.insert(line.substr(b));
  }
  return ids;
}

}  // namespace biocom
