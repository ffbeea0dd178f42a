#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biocom {

/// A tokenized sentence with one marked mention. The token range plays the
/// role of [ENT] ... [/ENT] markers.
struct MentionInput {
  std::vector<std::string> tokens;
  std::size_t mention_begin = 0;  // token range [begin, end)
  std::size_t mention_end = 0;
  std::string surface;  // case-folded mention text used for character n-grams

  /// Builds from a sentence and a code-point span; the mention covers every
  /// token overlapping [start, end). Throws std::invalid_argument if none does.
  static MentionInput from_text(std::string_view text, std::size_t start, std::size_t end);

  /// Builds from tokens; the surface is the mention tokens joined by spaces.
  static MentionInput from_tokens(std::vector<std::string> tokens, std::size_t begin, std::size_t end);

  /// Token sequence with explicit "[ENT]" / "[/ENT]" markers around the mention,
  /// for encoders that consume marker tokens.
  std::vector<std::string> marked_tokens() const;
};

inline constexpr std::string_view kEntityOpen = "[ENT]";
inline constexpr std::string_view kEntityClose = "[/ENT]";

/// Sparse features; indices strictly increasing.
struct FeatureVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::size_t dim = 0;

  std::size_t nnz() const { return indices.size(); }
};

/// Hashed character 3..5-grams of the mention surface in [0, F/2) and hashed
/// case-folded context tokens (up to `window` either side) in [F/2, F).
/// Values are occurrence counts.
FeatureVector featurize(const MentionInput& input, std::size_t window, std::size_t feature_dim, std::uint64_t hash_seed = 0);

struct EncoderConfig {
  std::size_t dim = 128;
  std::size_t feature_dim = std::size_t{1} << 16;
  std::size_t window = 10;
  std::uint64_t hash_seed = 0;
};

/// Linear projection from hashed features to the embedding space.
/// `projection` is row-major feature_dim x dim.
struct EncoderParams {
  std::size_t dim = 0;
  std::size_t feature_dim = 0;
  std::size_t window = 0;
  std::uint64_t hash_seed = 0;
  std::vector<double> projection;

  /// Uniform in [-1/sqrt(F), 1/sqrt(F)] from `seed`.
  static EncoderParams random(const EncoderConfig& config, std::uint64_t seed);
  static EncoderParams zeros(const EncoderConfig& config);

  std::span<double> row(std::size_t feature) { return {projection.data() + feature * dim, dim}; }
  std::span<const double> row(std::size_t feature) const { return {projection.data() + feature * dim, dim}; }

  /// Throws std::invalid_argument unless dim >= 2, feature_dim >= 2, sizes
  /// agree and every entry is finite.
  void validate() const;

  /// 64-bit hash of the serialized model.
  std::uint64_t fingerprint() const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

struct Embedding {
  std::vector<double> values;
};

struct EncodeResult {
  Embedding embedding;
  std::vector<double> raw;  // pre-normalization projection
  double norm = 0.0;
  bool degenerate = false;  // raw was zero; embedding is the fixed fallback e_0
};

EncodeResult encode_features(const EncoderParams& params, const FeatureVector& features);
EncodeResult encode_detailed(const EncoderParams& params, const MentionInput& input);
Embedding encode(const EncoderParams& params, const MentionInput& input);
std::vector<Embedding> encode_batch(const EncoderParams& params, std::span<const MentionInput> inputs, unsigned threads = 1);

/// Gradient of a loss with respect to projection rows; only touched rows stored.
class ProjectionGrad {
 public:
  explicit ProjectionGrad(std::size_t dim) : dim_(dim) {}

  /// rows[f] += x_f * upstream, for every feature f of x.
  void accumulate(const FeatureVector& x, std::span<const double> upstream);

  const std::map<std::uint32_t, std::vector<double>>& rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_.empty(); }

  /// params -= learning_rate * grad
  void apply(EncoderParams& params, double learning_rate) const;

  bool all_finite() const;

 private:
  std::size_t dim_;
  std::map<std::uint32_t, std::vector<double>> rows_;
};

/// Maps dL/d(embedding) to dL/d(raw projection) through y = raw / |raw|.
std::vector<double> normalize_backward(const EncodeResult& forward, std::span<const double> grad_embedding);

/// Pluggable encoder contract. A marker-token transformer can implement it.
class MentionEncoder {
 public:
  virtual ~MentionEncoder() = default;
  virtual std::size_t dim() const = 0;
  virtual Embedding encode(const MentionInput& input) const = 0;
  virtual std::uint64_t fingerprint() const = 0;
};

class HashingEncoder final : public MentionEncoder {
 public:
  explicit HashingEncoder(const EncoderParams& params) : params_(&params), fingerprint_(params.fingerprint()) {}
  std::size_t dim() const override { return params_->dim; }
  Embedding encode(const MentionInput& input) const override { return biocom::encode(*params_, input); }
  std::uint64_t fingerprint() const override { return fingerprint_; }

 private:
  const EncoderParams* params_;
  std::uint64_t fingerprint_;
};

// Model file: "BIOCOMEN", u32 version, u32 dim, u64 feature_dim, u32 window,
// u32 reserved, u64 hash_seed, then feature_dim*dim IEEE-754 doubles. All
// integers and doubles little-endian.
void write_model(std::ostream& out, const EncoderParams& params);
EncoderParams read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const EncoderParams& params);
EncoderParams load_model(const std::filesystem::path& path);
std::string serialize_model(const EncoderParams& params);

}  // namespace biocom
