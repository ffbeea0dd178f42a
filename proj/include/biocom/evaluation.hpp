#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biocom/concept_id.hpp"
#include "biocom/dictionary.hpp"
#include "biocom/neighbor_index.hpp"

namespace biocom {

struct GoldMention {
  std::string doc_id;
  std::int64_t sent_id = 0;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  ConceptId gold_concept;

  friend bool operator==(const GoldMention&, const GoldMention&) = default;
};

// Gold JSONL mirrors the linked corpus with "gold_concept" in each mention:
// {"doc_id","sent_id","text","mentions":[{"start","end","gold_concept"}]}.
std::vector<GoldMention> read_gold(std::istream& in, const std::string& source = "<stream>");
std::vector<GoldMention> load_gold(const std::string& path);
/// Groups consecutive mentions of the same sentence onto one line.
void write_gold(std::ostream& out, std::span<const GoldMention> gold);

/// Drops mentions whose gold concept is not in the dictionary.
std::vector<GoldMention> filter_gold(std::span<const GoldMention> gold, const Dictionary& dict);

/// Fraction of exact concept matches. Throws std::invalid_argument on a
/// length mismatch; an empty list scores 0.
double evaluate_accuracy(std::span<const ConceptId> predictions, std::span<const GoldMention> gold);

using ConfusionCounts = std::map<std::pair<ConceptId, ConceptId>, std::size_t>;  // (gold, predicted) -> n
ConfusionCounts confusion_counts(std::span<const ConceptId> predictions, std::span<const GoldMention> gold);
void write_confusion_csv(std::ostream& out, const ConfusionCounts& counts);

/// kNN predictions for every gold mention, in order.
std::vector<ConceptId> predict_gold(const NeighborIndex& index, const EncoderParams& params, std::span<const GoldMention> gold,
                                    std::size_t k = kDefaultNeighbors, unsigned threads = 1);

/// Mean cosine over same-label pairs and over different-label pairs (i < j).
struct SimilaritySummary {
  double intra = 0.0;
  double inter = 0.0;
  std::size_t intra_pairs = 0;
  std::size_t inter_pairs = 0;
};
SimilaritySummary similarity_summary(std::span<const std::vector<double>> embeddings, std::span<const ConceptId> labels);

/// Character uni+bi-gram tf-idf over dictionary synonyms. idf(t) =
/// ln((1 + N) / (1 + df(t))) + 1; tf is the raw count; vectors L2-normalized.
class TfidfModel {
 public:
  struct SparseVector {
    std::vector<std::uint32_t> terms;  // increasing
    std::vector<double> weights;
  };
  struct Match {
    ConceptId concept_id;
    std::string synonym;  // normalized
    double similarity = 0.0;
  };

  static TfidfModel fit(const Dictionary& dict);

  /// Unit vector of `surface`; unknown n-grams are ignored, so the result
  /// may be all-zero.
  SparseVector vectorize(std::string_view surface) const;

  /// Best cosine match; ties go to the lexicographically smallest synonym.
  /// Throws std::invalid_argument on an empty surface.
  Match best_match(std::string_view surface) const;

  const std::map<std::string, std::uint32_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  const std::vector<std::string>& synonyms() const { return synonyms_; }  // sorted
  const std::vector<ConceptId>& synonym_concepts() const { return concepts_; }
  const std::vector<SparseVector>& synonym_vectors() const { return vectors_; }

 private:
  text::NormalizationPolicy policy_;
  std::map<std::string, std::uint32_t> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::string> synonyms_;
  std::vector<ConceptId> concepts_;
  std::vector<SparseVector> vectors_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;  // term -> (synonym, weight)
};

/// Character unigrams and bigrams of a normalized string, in order.
std::vector<std::string> char_ngrams_1_2(std::string_view normalized);

TfidfModel tfidf_fit(const Dictionary& dict);
ConceptId tfidf_predict(const TfidfModel& model, std::string_view mention_surface);

}  // namespace biocom
