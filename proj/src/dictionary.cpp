#include "biocom/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "biocom/error.hpp"
#include "biocom/rng.hpp"

namespace biocom {

bool Dictionary::add(const ConceptId& concept_id, std::string_view synonym) {
  if (!is_valid_concept_id(concept_id.str())) throw std::invalid_argument("invalid concept id '" + concept_id.str() + "'");
  std::string key = text::normalize_key(synonym, policy_);
  if (key.empty()) throw std::invalid_argument("empty synonym for concept " + concept_id.str());

  if (auto it = synonym_index_.find(key); it != synonym_index_.end()) {
    const ConceptId& owner = entries_[it->second].concept_id;
    if (owner == concept_id) return false;
    throw AmbiguityError("synonym '" + key + "' maps to both " + owner.str() + " and " + concept_id.str());
  }

  std::size_t idx;
  if (auto it = concept_index_.find(concept_id); it != concept_index_.end()) {
    idx = it->second;
  } else {
    idx = entries_.size();
    entries_.push_back({concept_id, {}});
    concept_index_.emplace(concept_id, idx);
  }
  synonym_index_.emplace(key, idx);
  entries_[idx].synonyms.push_back({std::string(synonym), std::move(key)});
  return true;
}

const DictionaryEntry* Dictionary::find(const ConceptId& concept_id) const {
  auto it = concept_index_.find(concept_id);
  return it == concept_index_.end() ? nullptr : &entries_[it->second];
}

std::optional<ConceptId> Dictionary::lookup(std::string_view surface) const {
  return lookup_normalized(text::normalize_key(surface, policy_));
}

std::optional<ConceptId> Dictionary::lookup_normalized(std::string_view key) const {
  auto it = synonym_index_.find(std::string(key));
  if (it == synonym_index_.end()) return std::nullopt;
  return entries_[it->second].concept_id;
}

DictionaryStats Dictionary::stats() const {
  DictionaryStats s;
  s.concepts = entries_.size();
  s.synonyms = synonym_index_.size();
  s.mean_synonyms_per_concept = s.concepts == 0 ? 0.0 : static_cast<double>(s.synonyms) / static_cast<double>(s.concepts);
  return s;
}

Dictionary read_dictionary(std::istream& in, const text::NormalizationPolicy& policy, const std::string& source_name) {
  Dictionary dict(policy);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source_name, lineno, "expected concept_id<TAB>synonym");
    if (line.find('\t', tab + 1) != std::string::npos) throw ParseError(source_name, lineno, "more than two columns");
    const std::string_view id(line.data(), tab);
    const std::string_view synonym(line.data() + tab + 1, line.size() - tab - 1);
    if (!is_valid_concept_id(id)) throw ParseError(source_name, lineno, "invalid concept id '" + std::string(id) + "'");
    if (text::normalize_key(synonym, policy).empty()) throw ParseError(source_name, lineno, "empty synonym");
    try {
      dict.add(ConceptId(std::string(id)), synonym);
    } catch (const AmbiguityError& e) {
      throw AmbiguityError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error("read error on " + source_name);
  return dict;
}

Dictionary load_dictionary(const std::filesystem::path& path, const text::NormalizationPolicy& policy) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dictionary " + path.string());
  return read_dictionary(in, policy, path.string());
}

void write_dictionary(std::ostream& out, const Dictionary& dict) {
  for (const auto& entry : dict.entries()) {
    for (const auto& syn : entry.synonyms) out << entry.concept_id.str() << '\t' << syn.surface << '\n';
  }
}

Dictionary downsample_synonyms(const Dictionary& dict, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw std::invalid_argument("fraction must be in (0, 1]");
  Rng rng(seed);
  Dictionary out(dict.policy());
  for (const auto& entry : dict.entries()) {
    const std::size_t n = entry.synonyms.size();
    // The epsilon keeps e.g. 0.3 * 10 from rounding up to 4.
    auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    keep = std::clamp<std::size_t>(keep, 1, n);
    auto picked = rng.sample_indices(n, keep);
    std::sort(picked.begin(), picked.end());
    for (std::size_t i : picked) out.add(entry.concept_id, entry.synonyms[i].surface);
  }
  return out;
}

}  // namespace biocom
