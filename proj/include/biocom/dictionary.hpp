#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "biocom/concept_id.hpp"
#include "biocom/text.hpp"

namespace biocom {

struct Synonym {
  std::string surface;     // as first seen in the source file
  std::string normalized;  // key under the dictionary's policy
};

struct DictionaryEntry {
  ConceptId concept_id;
  std::vector<Synonym> synonyms;
};

struct DictionaryStats {
  std::size_t concepts = 0;
  std::size_t synonyms = 0;
  double mean_synonyms_per_concept = 0.0;
};

/// Concept -> synonyms map. Entries keep first-seen order; a normalized
/// synonym belongs to exactly one concept. Immutable once built.
class Dictionary {
 public:
  explicit Dictionary(text::NormalizationPolicy policy = {}) : policy_(policy) {}

  /// Adds (concept, synonym). Returns false for a duplicate pair. Throws
  /// AmbiguityError if the normalized synonym already names another concept
  /// and std::invalid_argument for an invalid id or empty synonym.
  bool add(const ConceptId& concept_id, std::string_view synonym);

  const std::vector<DictionaryEntry>& entries() const { return entries_; }
  const text::NormalizationPolicy& policy() const { return policy_; }

  const DictionaryEntry* find(const ConceptId& concept_id) const;
  bool contains(const ConceptId& concept_id) const { return find(concept_id) != nullptr; }

  /// Concept whose synonym equals `surface` after normalization.
  std::optional<ConceptId> lookup(std::string_view surface) const;

  /// Lookup by an already-normalized key.
  std::optional<ConceptId> lookup_normalized(std::string_view key) const;

  DictionaryStats stats() const;

  bool empty() const { return entries_.empty(); }

 private:
  text::NormalizationPolicy policy_;
  std::vector<DictionaryEntry> entries_;
  std::unordered_map<ConceptId, std::size_t> concept_index_;
  std::unordered_map<std::string, std::size_t> synonym_index_;  // normalized -> entry index
};

/// Reads `concept_id<TAB>synonym` lines (UTF-8). Blank lines are skipped.
Dictionary load_dictionary(const std::filesystem::path& path, const text::NormalizationPolicy& policy = {});
Dictionary read_dictionary(std::istream& in, const text::NormalizationPolicy& policy = {},
                           const std::string& source_name = "<stream>");

/// Writes the two-column TSV form, surfaces as first seen.
void write_dictionary(std::ostream& out, const Dictionary& dict);

/// Per concept keeps ceil(fraction * n) synonyms (at least one), drawn
/// uniformly without replacement; kept synonyms retain their order.
Dictionary downsample_synonyms(const Dictionary& dict, double fraction, std::uint64_t seed);

inline std::optional<ConceptId> lookup_synonym(const Dictionary& dict, std::string_view surface) {
  return dict.lookup(surface);
}

}  // namespace biocom
