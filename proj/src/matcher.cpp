#include <algorithm>
#include <deque>

#include "biocom/corpus.hpp"

namespace biocom {

Matcher::Matcher(const Dictionary& dict) : policy_(dict.policy()) {
  nodes_.emplace_back();
  for (const auto& entry : dict.entries()) {
    const std::size_t concept_index = concepts_.size();
    concepts_.push_back(entry.concept_id);
    for (const auto& syn : entry.synonyms) {
      const std::u32string key = text::decode_utf8(syn.normalized);
      std::uint32_t node = 0;
      for (char32_t c : key) {
        auto& next = nodes_[node].next;
        auto it = std::lower_bound(next.begin(), next.end(), c, [](const auto& e, char32_t v) { return e.first < v; });
        if (it != next.end() && it->first == c) {
          node = it->second;
        } else {
          const auto id = static_cast<std::uint32_t>(nodes_.size());
          next.insert(it, {c, id});
          nodes_.emplace_back();
          node = id;
        }
      }
      nodes_[node].pattern = static_cast<std::int32_t>(patterns_.size());
      patterns_.push_back({key.size(), concept_index});
    }
  }

  // Breadth-first failure links.
  std::deque<std::uint32_t> queue;
  for (const auto& [c, id] : nodes_[0].next) {
    nodes_[id].fail = 0;
    queue.push_back(id);
  }
  while (!queue.empty()) {
    const std::uint32_t u = queue.front();
    queue.pop_front();
    for (const auto& [c, v] : nodes_[u].next) {
      std::uint32_t f = nodes_[u].fail;
      std::uint32_t target = child(f, c);
      while (target == 0 && f != 0) {
        f = nodes_[f].fail;
        target = child(f, c);
      }
      nodes_[v].fail = target;
      nodes_[v].output_link = nodes_[target].pattern >= 0 ? target : nodes_[target].output_link;
      queue.push_back(v);
    }
  }
}

std::uint32_t Matcher::child(std::uint32_t node, char32_t c) const {
  const auto& next = nodes_[node].next;
  auto it = std::lower_bound(next.begin(), next.end(), c, [](const auto& e, char32_t v) { return e.first < v; });
  return (it != next.end() && it->first == c) ? it->second : 0;
}

std::vector<Matcher::Candidate> Matcher::candidates(const text::NormalizedText& norm) const {
  std::vector<Candidate> out;
  const auto& s = norm.chars;
  std::uint32_t state = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::uint32_t next = child(state, s[i]);
    while (next == 0 && state != 0) {
      state = nodes_[state].fail;
      next = child(state, s[i]);
    }
    state = next;
    const std::size_t end = i + 1;
    if (end < s.size() && text::is_alnum(s[end])) continue;
    for (std::uint32_t n = nodes_[state].pattern >= 0 ? state : nodes_[state].output_link; n != 0;
         n = nodes_[n].output_link) {
      const Pattern& p = patterns_[static_cast<std::size_t>(nodes_[n].pattern)];
      const std::size_t start = end - p.length;
      if (start > 0 && text::is_alnum(s[start - 1])) continue;
      out.push_back({start, end, p.concept_index});
    }
  }
  return out;
}

MentionSpan Matcher::to_span(const text::NormalizedText& norm, const Candidate& c) const {
  return {norm.origin[c.start], norm.origin[c.end - 1] + 1, concepts_[c.concept_index]};
}

std::vector<MentionSpan> Matcher::all_occurrences(std::string_view text) const {
  const auto norm = text::normalize_with_offsets(text::decode_utf8(text), policy_);
  std::vector<MentionSpan> out;
  for (const auto& c : candidates(norm)) out.push_back(to_span(norm, c));
  std::sort(out.begin(), out.end(), [](const MentionSpan& a, const MentionSpan& b) {
    return std::tie(a.start, a.end, a.concept_id) < std::tie(b.start, b.end, b.concept_id);
  });
  return out;
}

std::vector<MentionSpan> Matcher::find(std::string_view text) const {
  const auto norm = text::normalize_with_offsets(text::decode_utf8(text), policy_);
  auto cands = candidates(norm);
  // Longest first, then leftmost, then smallest concept id.
  std::sort(cands.begin(), cands.end(), [this](const Candidate& a, const Candidate& b) {
    const std::size_t la = a.end - a.start;
    const std::size_t lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.start != b.start) return a.start < b.start;
    return concepts_[a.concept_index] < concepts_[b.concept_index];
  });
  std::vector<bool> taken(norm.chars.size(), false);
  std::vector<MentionSpan> out;
  for (const auto& c : cands) {
    if (std::any_of(taken.begin() + static_cast<std::ptrdiff_t>(c.start), taken.begin() + static_cast<std::ptrdiff_t>(c.end),
                    [](bool b) { return b; })) {
      continue;
    }
    std::fill(taken.begin() + static_cast<std::ptrdiff_t>(c.start), taken.begin() + static_cast<std::ptrdiff_t>(c.end), true);
    out.push_back(to_span(norm, c));
  }
  std::sort(out.begin(), out.end(), [](const MentionSpan& a, const MentionSpan& b) { return a.start < b.start; });
  return out;
}

std::vector<MentionSpan> find_matches(const Dictionary& dict, std::string_view text) { return Matcher(dict).find(text); }

}  // namespace biocom
