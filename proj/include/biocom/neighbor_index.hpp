#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "biocom/concept_id.hpp"
#include "biocom/corpus.hpp"
#include "biocom/encoder.hpp"

namespace biocom {

/// Inference defaults to 15 neighbors.
inline constexpr std::size_t kDefaultNeighbors = 15;

struct EmbeddingRecord {
  ConceptId concept_id;
  std::string doc_id;
  std::int64_t sent_id = 0;
  std::size_t mention_index = 0;
  std::string surface;  // normalized mention text, the subsampling key

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Unit-norm embeddings of linked mentions, stored as one row-major matrix.
class NeighborIndex {
 public:
  NeighborIndex(std::size_t dim, std::uint64_t encoder_fingerprint) : dim_(dim), fingerprint_(encoder_fingerprint) {}

  void add(EmbeddingRecord record, std::span<const double> embedding);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dim() const { return dim_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  const EmbeddingRecord& record(std::size_t i) const { return records_[i]; }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  std::span<const double> embedding(std::size_t i) const { return {matrix_.data() + i * dim_, dim_}; }
  std::span<const double> matrix() const { return matrix_; }

  friend bool operator==(const NeighborIndex&, const NeighborIndex&) = default;

 private:
  std::size_t dim_;
  std::uint64_t fingerprint_;
  std::vector<EmbeddingRecord> records_;
  std::vector<double> matrix_;
};

/// One record per mention, in store order (sentence, then mention).
/// Throws Error on an empty store.
NeighborIndex build_index(const MentionEncoder& encoder, std::span<const LinkedSentence> store, unsigned threads = 1);
NeighborIndex build_index(const EncoderParams& params, std::span<const LinkedSentence> store, unsigned threads = 1);

/// Keeps at most `max_per_synonym` records per distinct surface, chosen
/// uniformly from `seed`; survivors keep their relative order.
NeighborIndex subsample_index(const NeighborIndex& index, std::size_t max_per_synonym, std::uint64_t seed);

struct Neighbor {
  std::size_t record = 0;
  double similarity = 0.0;
};

struct KnnResult {
  std::vector<Neighbor> neighbors;  // descending similarity, ties by record order
  bool truncated = false;           // K exceeded the index size
};

/// Exact top-K by cosine similarity (exhaustive scan).
KnnResult knn_search(const NeighborIndex& index, std::span<const double> query, std::size_t k);

struct Vote {
  ConceptId concept_id;
  std::size_t count = 0;
  double similarity_sum = 0.0;
};

struct Prediction {
  ConceptId concept_id;
  std::vector<Neighbor> neighbors;
  std::vector<Vote> votes;  // winner first
  bool truncated = false;
};

/// Majority vote over neighbors; ties go to the larger similarity sum, then
/// the smaller concept id.
Prediction vote(const NeighborIndex& index, KnnResult knn);

/// Encodes `input`, searches, and votes. Throws Error on an empty index or an
/// encoder whose fingerprint or dimension does not match the index.
Prediction predict_concept(const NeighborIndex& index, const MentionEncoder& encoder, const MentionInput& input,
                           std::size_t k = kDefaultNeighbors);
Prediction predict_concept(const NeighborIndex& index, const EncoderParams& params, const MentionInput& input,
                           std::size_t k = kDefaultNeighbors);

// JSON-Lines index file: a header {"format":"biocom-index","version":1,"d",
// "count","encoder_fingerprint"} then one record per line.
void write_index(std::ostream& out, const NeighborIndex& index);
NeighborIndex read_index(std::istream& in, const std::string& source = "<stream>");
void save_index(const std::filesystem::path& path, const NeighborIndex& index);
NeighborIndex load_index(const std::filesystem::path& path);

std::string fingerprint_hex(std::uint64_t fingerprint);

}  // namespace biocom
