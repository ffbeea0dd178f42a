#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biocom/error.hpp"
#include "biocom/metric_learning.hpp"
#include "oracles.hpp"

using namespace biocom;

namespace {

// Values printed by tests/oracles/ms_loss_oracle.py (40-digit arithmetic).
constexpr double kSameConceptLoss = 0.65663084375911141702;  // ln(1+e)/2
constexpr double kDiffConceptLoss = 0.0094815396836021336175;
constexpr double kFourMentionLoss = 0.26051452705992857495;

SimilarityMatrix matrix(std::size_t n, std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> entries,
                        std::string labels) {
  SimilarityMatrix s;
  s.n = n;
  s.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s.values[i * n + i] = 1.0;
  for (const auto& [ij, v] : entries) {
    s.values[ij.first * n + ij.second] = v;
    s.values[ij.second * n + ij.first] = v;
  }
  for (char c : labels) s.labels.emplace_back(std::string(1, c));
  return s;
}

std::vector<ConceptId> labels_of(const std::string& s) {
  std::vector<ConceptId> out;
  for (char c : s) out.emplace_back(std::string(1, c));
  return out;
}

double loss_of(const SimilarityMatrix& s, const MSLossParams& p = {}) { return ms_loss(s, mine_pairs(s, p), p); }

}  // namespace

TEST_CASE("two-mention cases match the high-precision oracle") {
  CHECK(std::abs(loss_of(matrix(2, {{{0, 1}, 0.5}}, "AA")) - kSameConceptLoss) < 1e-12);
  CHECK(std::abs(loss_of(matrix(2, {{{0, 1}, 0.99}}, "AB")) - kDiffConceptLoss) < 1e-12);
  CHECK(std::abs(kSameConceptLoss - std::log1p(std::exp(1.0)) / 2) < 1e-15);
}

TEST_CASE("four-mention case with mining matches the oracle") {
  const auto s = matrix(4, {{{0, 1}, 0.8}, {{0, 2}, 0.3}, {{0, 3}, 0.75}, {{1, 2}, 0.2}, {{1, 3}, 0.1}, {{2, 3}, 0.6}}, "AABB");
  CHECK(std::abs(loss_of(s) - kFourMentionLoss) < 1e-12);
}

TEST_CASE("mining thresholds") {
  const auto s = matrix(5, {{{0, 1}, 0.9}, {{0, 2}, 0.4}, {{0, 3}, 0.5}, {{0, 4}, 0.1}}, "AAABB");
  const auto m = mine_pairs(s, {});
  CHECK(m.positives[0] == std::vector<std::size_t>{2});
  CHECK(m.negatives[0] == std::vector<std::size_t>{3});
}

TEST_CASE("mining fallbacks") {
  const auto same = matrix(3, {{{0, 1}, 0.2}, {{0, 2}, 0.9}, {{1, 2}, 0.5}}, "AAA");
  const auto m = mine_pairs(same, {});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m.positives[i].size() == 2);
    CHECK(m.negatives[i].empty());
  }
  const auto single = mine_pairs(matrix(1, {}, "A"), {});
  CHECK(single.empty());
  CHECK(ms_loss(matrix(1, {}, "A"), single, {}) == 0.0);
}

TEST_CASE("similarity matrix against a double loop") {
  Rng rng(1);
  const auto v = testing::random_unit_vectors(rng, 5, 7);
  const auto s = similarity_matrix(v, labels_of("ABABC"));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < 7; ++k) d += v[i][k] * v[j][k];
      CHECK(std::abs(s(i, j) - d) < 1e-12);
    }
    CHECK(s(i, i) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const std::vector<std::vector<double>> same{{1.0, 0.0}, {1.0, 0.0}};
  CHECK(similarity_matrix(same, labels_of("AB")).values == std::vector<double>{1, 1, 1, 1});
  const std::vector<std::vector<double>> ortho{{1.0, 0.0}, {0.0, 1.0}};
  CHECK(similarity_matrix(ortho, labels_of("AB"))(0, 1) == 0.0);
  const std::vector<std::vector<double>> ragged{{1.0, 0.0}, {1.0}};
  CHECK_THROWS_AS(similarity_matrix(ragged, labels_of("AB")), std::invalid_argument);
  CHECK_THROWS_AS(similarity_matrix(same, labels_of("A")), std::invalid_argument);
}

TEST_CASE("non-finite similarities are rejected") {
  auto s = matrix(2, {{{0, 1}, 0.5}}, "AB");
  s.values[1] = std::nan("");
  CHECK_THROWS_AS(ms_loss(s, mine_pairs(matrix(2, {{{0, 1}, 0.5}}, "AB"), {}), {}), NumericError);
}

TEST_CASE("parameter validation") {
  MSLossParams p;
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.epsilon = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("loss is zero exactly when nothing is mined") {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.uniform(7);
    std::string labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<char>('A' + rng.uniform(3)));
    const auto v = testing::random_unit_vectors(rng, n, 4);
    const auto s = similarity_matrix(v, labels_of(labels));
    const auto m = mine_pairs(s, {});
    const double l = ms_loss(s, m, {});
    CHECK(l >= 0.0);
    CHECK((l == 0.0) == m.empty());
    for (std::size_t i = 0; i < n; ++i) {
      for (auto k : m.positives[i]) CHECK((k != i && labels[k] == labels[i]));
      for (auto k : m.negatives[i]) CHECK(labels[k] != labels[i]);
    }
  }
}

TEST_CASE("loss moves the right way in kept similarities") {
  // A negative far below lambda contributes ~exp(-50) to L, below double
  // resolution, so the strict direction is checked on dL/dS and the finite
  // change only for non-decrease / non-increase.
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto v = testing::random_unit_vectors(rng, 6, 5);
    auto s = similarity_matrix(v, labels_of("AABBCC"));
    const auto m = mine_pairs(s, {});
    const auto g = ms_loss_similarity_grad(s, m, {});
    const double base = ms_loss(s, m, {});
    for (std::size_t i = 0; i < 6; ++i) {
      for (auto k : m.positives[i]) {
        CHECK(g[i * 6 + k] < 0.0);
        auto up = s;
        up.values[i * 6 + k] += 1e-3;
        CHECK(ms_loss(up, m, {}) < base);
      }
      for (auto k : m.negatives[i]) {
        CHECK(g[i * 6 + k] > 0.0);
        auto up = s;
        up.values[i * 6 + k] += 1e-3;
        CHECK(ms_loss(up, m, {}) >= base);
      }
    }
  }
}

TEST_CASE("loss is invariant to batch order") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const std::string labels = "AABBCCDA";
    const auto v = testing::random_unit_vectors(rng, labels.size(), 6);
    const double base = ms_loss_grad(v, labels_of(labels), {}).loss;
    std::vector<std::size_t> perm(labels.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<std::vector<double>> pv;
    std::string pl;
    for (auto p : perm) {
      pv.push_back(v[p]);
      pl.push_back(labels[p]);
    }
    CHECK(std::abs(ms_loss_grad(pv, labels_of(pl), {}).loss - base) < 1e-12);
  }
}

TEST_CASE("gradient with respect to raw vectors matches finite differences") {
  Rng rng(5);
  const MSLossParams p;
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    auto v = testing::random_unit_vectors(rng, 6, 8);
    for (auto& row : v) {
      const double scale = rng.uniform(0.5, 2.0);
      for (double& x : row) x *= scale;
    }
    const auto labels = labels_of("AABBCA");
    const auto lg = ms_loss_grad(v, labels, p);
    bool flipped = false;
    double diff_sq = 0.0, a_sq = 0.0, n_sq = 0.0;
    for (std::size_t i = 0; i < v.size() && !flipped; ++i) {
      for (std::size_t j = 0; j < v[i].size(); ++j) {
        const double h = 1e-6, saved = v[i][j];
        v[i][j] = saved + h;
        const auto up = ms_loss_grad(v, labels, p);
        v[i][j] = saved - h;
        const auto down = ms_loss_grad(v, labels, p);
        v[i][j] = saved;
        if (up.mined.positives != lg.mined.positives || up.mined.negatives != lg.mined.negatives ||
            down.mined.positives != lg.mined.positives || down.mined.negatives != lg.mined.negatives) {
          flipped = true;
          break;
        }
        const double numeric = (up.loss - down.loss) / (2 * h);
        const double a = lg.grads[i][j];
        diff_sq += (a - numeric) * (a - numeric);
        a_sq += a * a;
        n_sq += numeric * numeric;
      }
    }
    if (flipped) continue;
    ++checked;
    // Norm-wise relative error over the whole batch gradient.
    CHECK(std::sqrt(diff_sq) < 1e-5 * std::sqrt(std::max(a_sq, n_sq)));
  }
  CHECK(checked >= 90);
}

TEST_CASE("zero loss gives zero gradient") {
  const std::vector<std::vector<double>> v{{1.0, 0.0}};
  const auto lg = ms_loss_grad(v, labels_of("A"), {});
  CHECK(lg.loss == 0.0);
  CHECK(lg.grads[0] == std::vector<double>{0.0, 0.0});
}

TEST_CASE("duplicated entities receive equal gradients") {
  Rng rng(6);
  const auto base = testing::random_unit_vectors(rng, 4, 5);
  std::vector<std::vector<double>> v;
  std::string labels;
  const std::string base_labels = "ABCD";
  for (std::size_t i = 0; i < base.size(); ++i) {
    v.push_back(base[i]);
    v.push_back(base[i]);
    labels += base_labels[i];
    labels += base_labels[i];
  }
  const auto lg = ms_loss_grad(v, labels_of(labels), {});
  for (std::size_t i = 0; i < v.size(); i += 2) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(lg.grads[i][j] == doctest::Approx(lg.grads[i + 1][j]).epsilon(1e-12));
  }
}

TEST_CASE("similarity gradient is zero off the mined pairs") {
  const auto s = matrix(4, {{{0, 1}, 0.8}, {{0, 2}, 0.3}, {{0, 3}, 0.75}, {{1, 2}, 0.2}, {{1, 3}, 0.1}, {{2, 3}, 0.6}}, "AABB");
  const auto m = mine_pairs(s, {});
  const auto g = ms_loss_similarity_grad(s, m, {});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      const bool kept = std::count(m.positives[i].begin(), m.positives[i].end(), k) + std::count(m.negatives[i].begin(), m.negatives[i].end(), k);
      if (!kept) CHECK(g[i * 4 + k] == 0.0);
    }
  }
}

TEST_CASE("full encode chain gradient on small random batches") {
  int usable = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto r = testing::check_chain_gradient(seed);
    if (r.mining_changed) continue;
    ++usable;
    CHECK(r.max_rel_error < 1e-4);
  }
  CHECK(usable >= 25);
}
