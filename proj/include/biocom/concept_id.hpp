#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace biocom {

/// Identifier of a dictionary concept, e.g. "D014178".
class ConceptId {
 public:
  ConceptId() = default;
  explicit ConceptId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const ConceptId&, const ConceptId&) = default;
  friend bool operator==(const ConceptId&, const ConceptId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const ConceptId& id) { return os << id.value_; }

 private:
  std::string value_;
};

/// True when `id` is non-empty and has no whitespace.
bool is_valid_concept_id(std::string_view id);

}  // namespace biocom

template <>
struct std::hash<biocom::ConceptId> {
  std::size_t operator()(const biocom::ConceptId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
