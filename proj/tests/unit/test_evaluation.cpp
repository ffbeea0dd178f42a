#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "biocom/evaluation.hpp"
#include "biocom/rng.hpp"

using namespace biocom;

namespace {

Dictionary toy_dict() {
  Dictionary d;
  d.add(ConceptId("C1"), "flu");
  d.add(ConceptId("C2"), "fever");
  d.add(ConceptId("C3"), "flux");
  return d;
}

std::map<std::string, double> weights_of(const TfidfModel& m, const TfidfModel::SparseVector& v) {
  std::map<std::uint32_t, std::string> names;
  for (const auto& [g, t] : m.vocabulary()) names[t] = g;
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < v.terms.size(); ++k) out[names[v.terms[k]]] = v.weights[k];
  return out;
}

double cosine(const TfidfModel::SparseVector& a, const TfidfModel::SparseVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    for (std::size_t j = 0; j < b.terms.size(); ++j) {
      if (a.terms[i] == b.terms[j]) s += a.weights[i] * b.weights[j];
    }
  }
  return s;
}

GoldMention gold(const char* c) { return {"d", 0, "x", 0, 1, ConceptId(c)}; }

}  // namespace

TEST_CASE("tf-idf vectors match the first-principles oracle") {
  // Printed by tests/oracles/tfidf_oracle.py.
  const std::map<std::string, std::map<std::string, double>> expected{
      {"fever",
       {{"e", 0.6217050914481278}, {"er", 0.3108525457240639}, {"ev", 0.3108525457240639}, {"f", 0.18359452107480756},
        {"fe", 0.3108525457240639}, {"r", 0.3108525457240639}, {"v", 0.3108525457240639}, {"ve", 0.3108525457240639}}},
      {"flu",
       {{"f", 0.36196500098839351}, {"fl", 0.46609584262774545}, {"l", 0.46609584262774545}, {"lu", 0.46609584262774545},
        {"u", 0.46609584262774545}}},
      {"flux",
       {{"f", 0.27352646269326086}, {"fl", 0.35221512235126284}, {"l", 0.35221512235126284}, {"lu", 0.35221512235126284},
        {"u", 0.35221512235126284}, {"ux", 0.46312055911762973}, {"x", 0.46312055911762973}}},
  };
  const auto m = tfidf_fit(toy_dict());
  REQUIRE(m.synonyms() == std::vector<std::string>{"fever", "flu", "flux"});
  for (std::size_t i = 0; i < 3; ++i) {
    const auto got = weights_of(m, m.synonym_vectors()[i]);
    const auto& want = expected.at(m.synonyms()[i]);
    REQUIRE(got.size() == want.size());
    for (const auto& [g, w] : want) CHECK(std::abs(got.at(g) - w) < 1e-10);
  }
}

TEST_CASE("tf-idf queries rank like the oracle") {
  const auto m = tfidf_fit(toy_dict());
  const std::vector<std::tuple<const char*, std::vector<double>, const char*>> cases{
      {"flue", {0.3815233724717802, 0.85261766436374009, 0.64429846290769377}, "C1"},
      {"fluxe", {0.30683457199173925, 0.68570524113039788, 0.90741237918851736}, "C3"},
      {"ever", {0.93255763717219176, 0.0, 0.0}, "C2"},
  };
  for (const auto& [q, sims, concept_id] : cases) {
    const auto qv = m.vectorize(q);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(cosine(qv, m.synonym_vectors()[i]) - sims[i]) < 1e-10);
    CHECK(tfidf_predict(m, q) == ConceptId(concept_id));
  }
}

TEST_CASE("tf-idf edge cases") {
  Dictionary one;
  one.add(ConceptId("A"), "abc");
  const auto m1 = tfidf_fit(one);
  double sq = 0.0;
  for (double w : m1.synonym_vectors()[0].weights) sq += w * w;
  CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-12));

  const auto m = tfidf_fit(toy_dict());
  // "f" occurs in every synonym, so it has the smallest idf.
  const double idf_f = m.idf()[m.vocabulary().at("f")];
  CHECK(idf_f == *std::min_element(m.idf().begin(), m.idf().end()));
  CHECK(idf_f == doctest::Approx(1.0));

  CHECK(m.best_match("Flu").similarity == doctest::Approx(1.0));
  const auto none = m.best_match("zzz");
  CHECK(none.similarity == 0.0);
  CHECK(none.synonym == "fever");
  CHECK_THROWS_AS(tfidf_predict(m, "  "), std::invalid_argument);
  CHECK_THROWS_AS(tfidf_fit(Dictionary{}), std::invalid_argument);
}

TEST_CASE("every unique synonym predicts its own concept") {
  Dictionary d;
  Rng rng(1);
  for (int c = 0; c < 40; ++c) {
    for (int s = 0; s < 3; ++s) {
      std::string w;
      for (int k = 0; k < 6; ++k) w.push_back(static_cast<char>('a' + rng.uniform(26)));
      if (!d.lookup(w)) d.add(ConceptId("C" + std::to_string(c)), w);
    }
  }
  const auto m = tfidf_fit(d);
  for (std::size_t i = 0; i < m.synonyms().size(); ++i) {
    bool unique = true;
    for (std::size_t j = 0; j < m.synonyms().size(); ++j) {
      if (i != j && m.synonym_vectors()[i].terms == m.synonym_vectors()[j].terms &&
          m.synonym_vectors()[i].weights == m.synonym_vectors()[j].weights)
        unique = false;
    }
    if (unique) CHECK(tfidf_predict(m, m.synonyms()[i]) == m.synonym_concepts()[i]);
  }
}

TEST_CASE("gold filtering") {
  Dictionary d;
  d.add(ConceptId("A"), "a");
  d.add(ConceptId("B"), "b");
  std::vector<GoldMention> g;
  for (const char* c : {"A", "X", "B", "A", "Y", "B", "Z", "A", "B", "A"}) g.push_back(gold(c));
  const auto kept = filter_gold(g, d);
  CHECK(kept.size() == 7);
  for (const auto& k : kept) CHECK(d.contains(k.gold_concept));
  const std::vector<GoldMention> present{gold("A"), gold("B")};
  CHECK(filter_gold(present, d) == present);
}

TEST_CASE("accuracy") {
  const std::vector<GoldMention> g{gold("A"), gold("B"), gold("C"), gold("A")};
  const std::vector<ConceptId> right{ConceptId("A"), ConceptId("B"), ConceptId("C"), ConceptId("A")};
  const std::vector<ConceptId> wrong(4, ConceptId("Q"));
  std::vector<ConceptId> half = right;
  half[1] = half[2] = ConceptId("Q");
  CHECK(evaluate_accuracy(right, g) == 1.0);
  CHECK(evaluate_accuracy(wrong, g) == 0.0);
  CHECK(evaluate_accuracy(half, g) == 0.5);
  CHECK(evaluate_accuracy({}, {}) == 0.0);
  CHECK_THROWS_AS(evaluate_accuracy(std::span(right).first(3), g), std::invalid_argument);

  // Joint permutation does not matter.
  std::vector<GoldMention> pg{g[3], g[1], g[0], g[2]};
  std::vector<ConceptId> pp{half[3], half[1], half[0], half[2]};
  CHECK(evaluate_accuracy(pp, pg) == 0.5);
}

TEST_CASE("confusion counts as CSV") {
  const std::vector<GoldMention> g{gold("A"), gold("A"), gold("B")};
  const std::vector<ConceptId> p{ConceptId("A"), ConceptId("B"), ConceptId("B")};
  const auto c = confusion_counts(p, g);
  CHECK(c.at({ConceptId("A"), ConceptId("B")}) == 1);
  std::ostringstream out;
  write_confusion_csv(out, c);
  CHECK(out.str() == "gold,predicted,count\nA,A,1\nA,B,1\nB,B,1\n");
}

TEST_CASE("gold files round trip") {
  const std::vector<GoldMention> g{{"d1", 0, "flu and fever", 0, 3, ConceptId("A")},
                                   {"d1", 0, "flu and fever", 8, 13, ConceptId("B")},
                                   {"d2", 4, "Fever", 0, 5, ConceptId("B")}};
  std::ostringstream out;
  write_gold(out, g);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  std::istringstream in(text);
  CHECK(read_gold(in) == g);
}

TEST_CASE("similarity summary") {
  const std::vector<std::vector<double>> v{{1, 0}, {1, 0}, {0, 1}};
  const std::vector<ConceptId> l{ConceptId("A"), ConceptId("A"), ConceptId("B")};
  const auto s = similarity_summary(v, l);
  CHECK(s.intra == 1.0);
  CHECK(s.inter == 0.0);
  CHECK(s.intra_pairs == 1);
  CHECK(s.inter_pairs == 2);
}
