#include "biocom/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

#include "biocom/error.hpp"

namespace biocom {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, lineno, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_key(section)) throw ParseError(source, lineno, "bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_key(key)) throw ParseError(source, lineno, "bad key '" + key + "'");
    if (value.empty()) throw ParseError(source, lineno, "missing value for '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;

    Value parsed;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') throw ParseError(source, lineno, "unterminated string");
      std::string s;
      for (std::size_t i = 1; i + 1 < value.size(); ++i) {
        if (value[i] == '\\' && i + 2 < value.size()) {
          const char n = value[++i];
          s.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
        } else {
          s.push_back(value[i]);
        }
      }
      parsed = std::move(s);
    } else if (value == "true" || value == "false") {
      parsed = value == "true";
    } else {
      std::string digits;
      for (char c : value) {
        if (c != '_') digits.push_back(c);
      }
      std::int64_t i = 0;
      const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
      if (ec == std::errc() && p == digits.data() + digits.size()) {
        parsed = i;
      } else {
        try {
          std::size_t used = 0;
          const double d = std::stod(digits, &used);
          if (used != digits.size()) throw std::invalid_argument("trailing");
          parsed = d;
        } catch (const std::exception&) {
          throw ParseError(source, lineno, "cannot parse value '" + value + "'");
        }
      }
    }
    if (!cfg.values_.emplace(full, std::move(parsed)).second) throw ParseError(source, lineno, "duplicate key '" + full + "'");
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse(in, path.string());
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  throw Error(source_ + ": '" + key + "' must be an integer");
}

std::uint64_t ConfigFile::get_uint(const std::string& key, std::uint64_t fallback) const {
  const std::int64_t v = get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw Error(source_ + ": '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*v);
  throw Error(source_ + ": '" + key + "' must be a number");
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* v = std::get_if<bool>(&it->second)) return *v;
  throw Error(source_ + ": '" + key + "' must be true or false");
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
  throw Error(source_ + ": '" + key + "' must be a string");
}

void ConfigFile::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (known.count(key) == 0) throw Error(source_ + ": unknown key '" + key + "'");
  }
}

PipelineConfig PipelineConfig::from(const ConfigFile& f) {
  f.reject_unknown({"train.concepts_per_batch", "train.sentences_per_concept", "train.learning_rate", "train.steps",
                    "train.seed", "train.threads", "train.min_sentences", "loss.alpha", "loss.beta", "loss.lambda",
                    "loss.epsilon", "encoder.dim", "encoder.feature_dim", "encoder.window", "encoder.hash_seed",
                    "encoder.init_seed", "synth.n_concepts", "synth.synonyms_per_concept", "synth.sentences_per_concept",
                    "synth.context_signal", "synth.vocab_size", "synth.seed", "synth.cue_words_per_concept",
                    "synth.filler_words_per_sentence", "synth.heldout_synonyms_per_concept",
                    "synth.heldout_sentences_per_concept", "synth.adversarial_overlap", "link.mode", "index.cap",
                    "index.seed", "predict.k"});
  PipelineConfig c;
  auto& t = c.train;
  t.concepts_per_batch = f.get_uint("train.concepts_per_batch", t.concepts_per_batch);
  t.sentences_per_concept = f.get_uint("train.sentences_per_concept", t.sentences_per_concept);
  t.learning_rate = f.get_double("train.learning_rate", t.learning_rate);
  t.steps = f.get_uint("train.steps", t.steps);
  t.seed = f.get_uint("train.seed", t.seed);
  t.threads = static_cast<unsigned>(f.get_uint("train.threads", t.threads));
  t.loss.alpha = f.get_double("loss.alpha", t.loss.alpha);
  t.loss.beta = f.get_double("loss.beta", t.loss.beta);
  t.loss.lambda = f.get_double("loss.lambda", t.loss.lambda);
  t.loss.epsilon = f.get_double("loss.epsilon", t.loss.epsilon);
  c.min_sentences = f.get_uint("train.min_sentences", 0);

  auto& e = c.encoder;
  e.dim = f.get_uint("encoder.dim", e.dim);
  e.feature_dim = f.get_uint("encoder.feature_dim", e.feature_dim);
  e.window = f.get_uint("encoder.window", e.window);
  e.hash_seed = f.get_uint("encoder.hash_seed", e.hash_seed);
  c.init_seed = f.get_uint("encoder.init_seed", c.init_seed);

  auto& s = c.synth;
  s.n_concepts = f.get_uint("synth.n_concepts", s.n_concepts);
  s.synonyms_per_concept = f.get_uint("synth.synonyms_per_concept", s.synonyms_per_concept);
  s.sentences_per_concept = f.get_uint("synth.sentences_per_concept", s.sentences_per_concept);
  s.context_signal = f.get_double("synth.context_signal", s.context_signal);
  s.vocab_size = f.get_uint("synth.vocab_size", s.vocab_size);
  s.seed = f.get_uint("synth.seed", s.seed);
  s.cue_words_per_concept = f.get_uint("synth.cue_words_per_concept", s.cue_words_per_concept);
  s.filler_words_per_sentence = f.get_uint("synth.filler_words_per_sentence", s.filler_words_per_sentence);
  s.heldout_synonyms_per_concept = f.get_uint("synth.heldout_synonyms_per_concept", s.heldout_synonyms_per_concept);
  s.heldout_sentences_per_concept = f.get_uint("synth.heldout_sentences_per_concept", s.heldout_sentences_per_concept);
  s.adversarial_overlap = f.get_bool("synth.adversarial_overlap", s.adversarial_overlap);

  c.link_mode = parse_link_mode(f.get_string("link.mode", std::string(link_mode_name(c.link_mode))));
  c.subsample_cap = f.get_uint("index.cap", c.subsample_cap);
  c.subsample_seed = f.get_uint("index.seed", c.subsample_seed);
  c.k = f.get_uint("predict.k", c.k);
  if (c.k < 1) throw Error("predict.k must be >= 1");
  return c;
}

}  // namespace biocom
