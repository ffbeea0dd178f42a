#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <variant>

#include "biocom/corpus.hpp"
#include "biocom/encoder.hpp"
#include "biocom/neighbor_index.hpp"
#include "biocom/synthetic.hpp"
#include "biocom/trainer.hpp"

namespace biocom {

/// Flat key/value view of a TOML-style file. Supported: `[section]` headers,
/// `key = value` with integer, float, boolean or double-quoted string values,
/// and `#` comments. Keys are stored as "section.key".
class ConfigFile {
 public:
  using Value = std::variant<std::int64_t, double, bool, std::string>;

  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Throws Error naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::string source_;
  std::map<std::string, Value> values_;
};

/// Stage settings shared by the CLI. Sections: [train], [loss], [encoder],
/// [synth], [link], [index], [predict].
struct PipelineConfig {
  TrainConfig train;
  EncoderConfig encoder;
  std::uint64_t init_seed = 0;
  std::size_t min_sentences = 2;  // 0 means train.sentences_per_concept
  SynthSpec synth;
  LinkMode link_mode = LinkMode::all;
  std::size_t k = kDefaultNeighbors;
  std::size_t subsample_cap = 0;  // 0 = no subsampling
  std::uint64_t subsample_seed = 0;

  static PipelineConfig from(const ConfigFile& file);
};

}  // namespace biocom
