#include "biocom/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "biocom/error.hpp"
#include "biocom/hash.hpp"
#include "biocom/parallel.hpp"
#include "biocom/rng.hpp"
#include "biocom/simd/kernels.hpp"
#include "biocom/text.hpp"

namespace biocom {
namespace {

constexpr char kMagic[8] = {'B', 'I', 'O', 'C', 'O', 'M', 'E', 'N'};
constexpr std::uint32_t kModelVersion = 1;

// Family tags keep n-gram and context hashes independent even for equal strings.
constexpr std::uint64_t kNgramTag = 0x6e6772616dULL;
constexpr std::uint64_t kContextTag = 0x636f6e7478ULL;

std::string fold(std::string_view s) {
  auto chars = text::decode_utf8(s);
  for (auto& c : chars) c = text::fold_case(c);
  return text::encode_utf8(chars);
}

}  // namespace

MentionInput MentionInput::from_text(std::string_view text, std::size_t start, std::size_t end) {
  auto tokens = text::tokenize(text);
  MentionInput in;
  in.tokens.reserve(tokens.size());
  bool found = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool overlaps = tokens[i].start < end && tokens[i].end > start;
    if (overlaps && !found) {
      in.mention_begin = i;
      found = true;
    }
    if (overlaps) in.mention_end = i + 1;
    in.tokens.push_back(std::move(tokens[i].text));
  }
  if (!found) throw std::invalid_argument("mention span covers no token");
  in.surface = text::normalize_key(text::substr_chars(text, start, end), text::NormalizationPolicy{});
  return in;
}

MentionInput MentionInput::from_tokens(std::vector<std::string> tokens, std::size_t begin, std::size_t end) {
  if (begin >= end || end > tokens.size()) throw std::invalid_argument("mention token range out of bounds");
  MentionInput in;
  std::string joined;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) joined.push_back(' ');
    joined += tokens[i];
  }
  in.tokens = std::move(tokens);
  in.mention_begin = begin;
  in.mention_end = end;
  in.surface = text::normalize_key(joined, text::NormalizationPolicy{});
  return in;
}

std::vector<std::string> MentionInput::marked_tokens() const {
  std::vector<std::string> out;
  out.reserve(tokens.size() + 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == mention_begin) out.emplace_back(kEntityOpen);
    out.push_back(tokens[i]);
    if (i + 1 == mention_end) out.emplace_back(kEntityClose);
  }
  return out;
}

FeatureVector featurize(const MentionInput& input, std::size_t window, std::size_t feature_dim, std::uint64_t hash_seed) {
  if (feature_dim < 2) throw std::invalid_argument("feature_dim must be >= 2");
  if (input.mention_begin >= input.mention_end || input.mention_end > input.tokens.size()) {
    throw std::invalid_argument("mention token range out of bounds");
  }
  const std::size_t ngram_buckets = feature_dim / 2;
  const std::size_t context_buckets = feature_dim - ngram_buckets;
  const std::uint64_t ngram_seed = mix64(hash_seed ^ kNgramTag);
  const std::uint64_t context_seed = mix64(hash_seed ^ kContextTag);

  std::vector<std::uint32_t> ids;
  const std::u32string surface = text::decode_utf8(input.surface);
  for (std::size_t n = 3; n <= 5; ++n) {
    for (std::size_t i = 0; i + n <= surface.size(); ++i) {
      const std::string gram = text::encode_utf8(std::u32string_view(surface).substr(i, n));
      ids.push_back(static_cast<std::uint32_t>(hash64(gram, ngram_seed) % ngram_buckets));
    }
  }
  const std::size_t lo = input.mention_begin > window ? input.mention_begin - window : 0;
  const std::size_t hi = std::min(input.tokens.size(), input.mention_end + window);
  auto add_context = [&](std::size_t i) {
    ids.push_back(static_cast<std::uint32_t>(ngram_buckets + hash64(fold(input.tokens[i]), context_seed) % context_buckets));
  };
  for (std::size_t i = lo; i < input.mention_begin; ++i) add_context(i);
  for (std::size_t i = input.mention_end; i < hi; ++i) add_context(i);

  std::sort(ids.begin(), ids.end());
  FeatureVector fv;
  fv.dim = feature_dim;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    fv.indices.push_back(ids[i]);
    fv.values.push_back(static_cast<double>(j - i));
    i = j;
  }
  return fv;
}

EncoderParams EncoderParams::zeros(const EncoderConfig& config) {
  EncoderParams p;
  p.dim = config.dim;
  p.feature_dim = config.feature_dim;
  p.window = config.window;
  p.hash_seed = config.hash_seed;
  p.projection.assign(config.feature_dim * config.dim, 0.0);
  return p;
}

EncoderParams EncoderParams::random(const EncoderConfig& config, std::uint64_t seed) {
  EncoderParams p = zeros(config);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.feature_dim));
  Rng rng(seed);
  for (double& w : p.projection) w = rng.uniform(-bound, bound);
  return p;
}

void EncoderParams::validate() const {
  if (dim < 2) throw std::invalid_argument("encoder dim must be >= 2");
  if (feature_dim < 2) throw std::invalid_argument("encoder feature_dim must be >= 2");
  if (projection.size() != dim * feature_dim) throw std::invalid_argument("projection size does not match dim x feature_dim");
  if (!std::all_of(projection.begin(), projection.end(), [](double w) { return std::isfinite(w); })) {
    throw std::invalid_argument("projection has non-finite entries");
  }
}

EncodeResult encode_features(const EncoderParams& params, const FeatureVector& features) {
  EncodeResult r;
  r.raw.assign(params.dim, 0.0);
  for (std::size_t k = 0; k < features.nnz(); ++k) {
    simd::axpy(features.values[k], params.row(features.indices[k]), r.raw);
  }
  r.norm = std::sqrt(simd::dot(r.raw, r.raw));
  r.embedding.values.assign(params.dim, 0.0);
  if (r.norm > 0.0 && std::isfinite(r.norm)) {
    const double inv = 1.0 / r.norm;
    for (std::size_t i = 0; i < params.dim; ++i) r.embedding.values[i] = r.raw[i] * inv;
  } else {
    r.degenerate = true;
    r.embedding.values[0] = 1.0;
  }
  return r;
}

EncodeResult encode_detailed(const EncoderParams& params, const MentionInput& input) {
  return encode_features(params, featurize(input, params.window, params.feature_dim, params.hash_seed));
}

Embedding encode(const EncoderParams& params, const MentionInput& input) {
  return encode_detailed(params, input).embedding;
}

std::vector<Embedding> encode_batch(const EncoderParams& params, std::span<const MentionInput> inputs, unsigned threads) {
  std::vector<Embedding> out(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t i) { out[i] = encode(params, inputs[i]); });
  return out;
}

std::vector<double> normalize_backward(const EncodeResult& forward, std::span<const double> grad_embedding) {
  std::vector<double> grad(grad_embedding.size(), 0.0);
  if (forward.degenerate) return grad;
  const auto& y = forward.embedding.values;
  const double proj = simd::dot(y, grad_embedding);
  const double inv = 1.0 / forward.norm;
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = (grad_embedding[i] - y[i] * proj) * inv;
  return grad;
}

void ProjectionGrad::accumulate(const FeatureVector& x, std::span<const double> upstream) {
  if (upstream.size() != dim_) throw std::invalid_argument("gradient dimension mismatch");
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    auto [it, inserted] = rows_.try_emplace(x.indices[k]);
    if (inserted) it->second.assign(dim_, 0.0);
    simd::axpy(x.values[k], upstream, it->second);
  }
}

void ProjectionGrad::apply(EncoderParams& params, double learning_rate) const {
  if (learning_rate == 0.0) return;
  for (const auto& [feature, g] : rows_) simd::axpy(-learning_rate, g, params.row(feature));
}

bool ProjectionGrad::all_finite() const {
  for (const auto& [feature, g] : rows_) {
    if (!std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); })) return false;
  }
  return true;
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw Error("truncated model file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

// Incremental form of hash64 over the serialized model.
class FnvSink {
 public:
  explicit FnvSink(std::uint64_t seed) : h_(0xcbf29ce484222325ULL ^ mix64(seed)) {}
  void bytes(const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <class T>
  void le(T value) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    bytes(buf, sizeof(T));
  }
  std::uint64_t digest() const { return mix64(h_); }

 private:
  std::uint64_t h_;
};

}  // namespace

std::uint64_t EncoderParams::fingerprint() const {
  FnvSink sink(0);
  sink.bytes(reinterpret_cast<const unsigned char*>(kMagic), sizeof(kMagic));
  sink.le<std::uint32_t>(kModelVersion);
  sink.le<std::uint32_t>(static_cast<std::uint32_t>(dim));
  sink.le<std::uint64_t>(feature_dim);
  sink.le<std::uint32_t>(static_cast<std::uint32_t>(window));
  sink.le<std::uint32_t>(0);
  sink.le<std::uint64_t>(hash_seed);
  for (double w : projection) sink.le<std::uint64_t>(std::bit_cast<std::uint64_t>(w));
  return sink.digest();
}

void write_model(std::ostream& out, const EncoderParams& params) {
  params.validate();
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kModelVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.dim));
  put_le<std::uint64_t>(out, params.feature_dim);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.window));
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, params.hash_seed);
  for (double w : params.projection) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(w));
  if (!out) throw Error("failed writing model");
}

EncoderParams read_model(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw Error("not a model file (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kModelVersion) throw Error("unsupported model version " + std::to_string(version));
  EncoderParams p;
  p.dim = get_le<std::uint32_t>(in);
  p.feature_dim = get_le<std::uint64_t>(in);
  p.window = get_le<std::uint32_t>(in);
  (void)get_le<std::uint32_t>(in);
  p.hash_seed = get_le<std::uint64_t>(in);
  if (p.dim < 2 || p.feature_dim < 2 || p.feature_dim > (std::uint64_t{1} << 32)) throw Error("model header out of range");
  p.projection.resize(p.dim * p.feature_dim);
  for (double& w : p.projection) w = std::bit_cast<double>(get_le<std::uint64_t>(in));
  p.validate();
  return p;
}

std::string serialize_model(const EncoderParams& params) {
  std::ostringstream out(std::ios::binary);
  write_model(out, params);
  return std::move(out).str();
}

void save_model(const std::filesystem::path& path, const EncoderParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model " + path.string());
  write_model(out, params);
}

EncoderParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  return read_model(in);
}

}  // namespace biocom
