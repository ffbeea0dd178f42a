#include "biocom/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

#include "biocom/error.hpp"
#include "biocom/parallel.hpp"
#include "biocom/simd/kernels.hpp"
#include "biocom/text.hpp"

namespace biocom {

using nlohmann::json;

std::vector<GoldMention> read_gold(std::istream& in, const std::string& source) {
  std::vector<GoldMention> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    try {
      const json j = json::parse(line);
      const std::string doc = j.at("doc_id").get<std::string>();
      const auto sent = j.at("sent_id").get<std::int64_t>();
      const std::string text = j.at("text").get<std::string>();
      const std::size_t length = text::char_length(text);
      for (const auto& m : j.at("mentions")) {
        GoldMention g{doc, sent, text, m.at("start").get<std::size_t>(), m.at("end").get<std::size_t>(),
                      ConceptId(m.at("gold_concept").get<std::string>())};
        if (g.start >= g.end || g.end > length) throw ParseError(source, lineno, "gold span out of range");
        out.push_back(std::move(g));
      }
    } catch (const json::exception& e) {
      throw ParseError(source, lineno, std::string("bad gold record: ") + e.what());
    }
  }
  return out;
}

std::vector<GoldMention> load_gold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open gold file " + path);
  return read_gold(in, path);
}

void write_gold(std::ostream& out, std::span<const GoldMention> gold) {
  std::size_t i = 0;
  while (i < gold.size()) {
    const auto& first = gold[i];
    json mentions = json::array();
    std::size_t j = i;
    while (j < gold.size() && gold[j].doc_id == first.doc_id && gold[j].sent_id == first.sent_id && gold[j].text == first.text) {
      mentions.push_back({{"start", gold[j].start}, {"end", gold[j].end}, {"gold_concept", gold[j].gold_concept.str()}});
      ++j;
    }
    out << json{{"doc_id", first.doc_id}, {"sent_id", first.sent_id}, {"text", first.text}, {"mentions", std::move(mentions)}}.dump()
        << '\n';
    i = j;
  }
}

std::vector<GoldMention> filter_gold(std::span<const GoldMention> gold, const Dictionary& dict) {
  std::vector<GoldMention> out;
  for (const auto& g : gold) {
    if (dict.contains(g.gold_concept)) out.push_back(g);
  }
  return out;
}

double evaluate_accuracy(std::span<const ConceptId> predictions, std::span<const GoldMention> gold) {
  if (predictions.size() != gold.size()) throw std::invalid_argument("predictions and gold differ in length");
  if (gold.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == gold[i].gold_concept) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

ConfusionCounts confusion_counts(std::span<const ConceptId> predictions, std::span<const GoldMention> gold) {
  if (predictions.size() != gold.size()) throw std::invalid_argument("predictions and gold differ in length");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < gold.size(); ++i) ++counts[{gold[i].gold_concept, predictions[i]}];
  return counts;
}

void write_confusion_csv(std::ostream& out, const ConfusionCounts& counts) {
  out << "gold,predicted,count\n";
  for (const auto& [key, n] : counts) out << key.first.str() << ',' << key.second.str() << ',' << n << '\n';
}

std::vector<ConceptId> predict_gold(const NeighborIndex& index, const EncoderParams& params, std::span<const GoldMention> gold,
                                    std::size_t k, unsigned threads) {
  const HashingEncoder encoder(params);
  std::vector<ConceptId> out(gold.size());
  parallel_for(gold.size(), threads, [&](std::size_t i) {
    out[i] = predict_concept(index, encoder, MentionInput::from_text(gold[i].text, gold[i].start, gold[i].end), k).concept_id;
  });
  return out;
}

SimilaritySummary similarity_summary(std::span<const std::vector<double>> embeddings, std::span<const ConceptId> labels) {
  if (embeddings.size() != labels.size()) throw std::invalid_argument("one label per embedding required");
  SimilaritySummary s;
  double intra = 0.0;
  double inter = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      const double v = simd::dot(embeddings[i], embeddings[j]);
      if (labels[i] == labels[j]) {
        intra += v;
        ++s.intra_pairs;
      } else {
        inter += v;
        ++s.inter_pairs;
      }
    }
  }
  s.intra = s.intra_pairs == 0 ? 0.0 : intra / static_cast<double>(s.intra_pairs);
  s.inter = s.inter_pairs == 0 ? 0.0 : inter / static_cast<double>(s.inter_pairs);
  return s;
}

std::vector<std::string> char_ngrams_1_2(std::string_view normalized) {
  const auto chars = text::decode_utf8(normalized);
  std::vector<std::string> out;
  const std::u32string_view v(chars);
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(text::encode_utf8(v.substr(i, 1)));
  for (std::size_t i = 0; i + 1 < v.size(); ++i) out.push_back(text::encode_utf8(v.substr(i, 2)));
  return out;
}

namespace {

void normalize_l2(TfidfModel::SparseVector& v) {
  double sq = 0.0;
  for (double w : v.weights) sq += w * w;
  if (sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& w : v.weights) w *= inv;
}

}  // namespace

TfidfModel TfidfModel::fit(const Dictionary& dict) {
  if (dict.empty()) throw std::invalid_argument("tf-idf needs a non-empty dictionary");
  TfidfModel m;
  m.policy_ = dict.policy();

  std::vector<std::pair<std::string, ConceptId>> syns;
  for (const auto& e : dict.entries()) {
    for (const auto& s : e.synonyms) syns.emplace_back(s.normalized, e.concept_id);
  }
  std::sort(syns.begin(), syns.end());

  std::vector<std::map<std::string, std::size_t>> tfs(syns.size());
  std::map<std::string, std::size_t> df;
  for (std::size_t i = 0; i < syns.size(); ++i) {
    for (auto& g : char_ngrams_1_2(syns[i].first)) ++tfs[i][g];
    for (const auto& [g, n] : tfs[i]) ++df[g];
  }
  const double n_docs = static_cast<double>(syns.size());
  for (const auto& [g, count] : df) {
    m.vocabulary_.emplace(g, static_cast<std::uint32_t>(m.idf_.size()));
    m.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  m.postings_.resize(m.idf_.size());
  for (std::size_t i = 0; i < syns.size(); ++i) {
    SparseVector v;
    for (const auto& [g, n] : tfs[i]) {  // std::map order == vocabulary order
      const std::uint32_t t = m.vocabulary_.at(g);
      v.terms.push_back(t);
      v.weights.push_back(static_cast<double>(n) * m.idf_[t]);
    }
    normalize_l2(v);
    for (std::size_t k = 0; k < v.terms.size(); ++k) m.postings_[v.terms[k]].emplace_back(static_cast<std::uint32_t>(i), v.weights[k]);
    m.synonyms_.push_back(syns[i].first);
    m.concepts_.push_back(syns[i].second);
    m.vectors_.push_back(std::move(v));
  }
  return m;
}

TfidfModel::SparseVector TfidfModel::vectorize(std::string_view surface) const {
  std::map<std::uint32_t, std::size_t> tf;
  for (const auto& g : char_ngrams_1_2(text::normalize_key(surface, policy_))) {
    if (auto it = vocabulary_.find(g); it != vocabulary_.end()) ++tf[it->second];
  }
  SparseVector v;
  for (const auto& [t, n] : tf) {
    v.terms.push_back(t);
    v.weights.push_back(static_cast<double>(n) * idf_[t]);
  }
  normalize_l2(v);
  return v;
}

TfidfModel::Match TfidfModel::best_match(std::string_view surface) const {
  if (text::normalize_key(surface, policy_).empty()) throw std::invalid_argument("tf-idf query surface is empty");
  const SparseVector q = vectorize(surface);
  std::vector<double> scores(synonyms_.size(), 0.0);
  for (std::size_t k = 0; k < q.terms.size(); ++k) {
    for (const auto& [syn, w] : postings_[q.terms[k]]) scores[syn] += q.weights[k] * w;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return {concepts_[best], synonyms_[best], scores[best]};
}

TfidfModel tfidf_fit(const Dictionary& dict) { return TfidfModel::fit(dict); }

ConceptId tfidf_predict(const TfidfModel& model, std::string_view mention_surface) {
  return model.best_match(mention_surface).concept_id;
}

}  // namespace biocom
