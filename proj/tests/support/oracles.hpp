#pragma once

// Slow, obviously-correct reference implementations used by the unit tests
// and the acceptance runner. Nothing here is shared with the library code
// paths under test beyond text normalization.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "biocom/corpus.hpp"
#include "biocom/dictionary.hpp"
#include "biocom/neighbor_index.hpp"
#include "biocom/rng.hpp"

namespace biocom::testing {

/// Enumerates every boundary-aligned substring of the normalized text that is
/// a dictionary key, then keeps matches greedily by (longer, earlier, smaller
/// concept id).
std::vector<MentionSpan> brute_force_matches(const Dictionary& dict, std::string_view text);

/// Full scan with a plain loop, stable sort on (-similarity, record).
std::vector<Neighbor> naive_knn(const NeighborIndex& index, const std::vector<double>& query, std::size_t k);

struct MatcherCase {
  Dictionary dict;
  std::string text;
};

/// Small alphabet so that overlaps, nested synonyms and case/space variants
/// are common. At most 50 synonyms and 200 characters.
MatcherCase random_matcher_case(Rng& rng);

/// Random unit vectors.
std::vector<std::vector<double>> random_unit_vectors(Rng& rng, std::size_t n, std::size_t d);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  bool mining_changed = false;  // a perturbation flipped the mined set; result unusable
};

/// Central-difference check of the encode -> cosine -> mine -> loss chain on
/// one random batch (|B| <= 8, d <= 8, F <= 64).
GradCheck check_chain_gradient(std::uint64_t seed, double step = 1e-6);

}  // namespace biocom::testing
