#include "biocom/metric_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "biocom/error.hpp"
#include "biocom/simd/kernels.hpp"

namespace biocom {
namespace {

// log(1 + sum_k exp(a_k)), and the softmax weights exp(a_k) / (1 + sum).
double log1p_sum_exp(std::span<const double> a, std::vector<double>* weights) {
  if (a.empty()) {
    if (weights != nullptr) weights->clear();
    return 0.0;
  }
  const double m = std::max(0.0, *std::max_element(a.begin(), a.end()));
  double sum = 0.0;
  for (double v : a) sum += std::exp(v - m);
  // With every a_k <= 0 the 1 dominates; log1p keeps the small terms.
  const double lse = m == 0.0 ? std::log1p(sum) : m + std::log(std::exp(-m) + sum);
  if (weights != nullptr) {
    weights->resize(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) (*weights)[k] = std::exp(a[k] - lse);
  }
  return lse;
}

struct AnchorTerms {
  std::vector<double> pos_args;
  std::vector<double> neg_args;
};

AnchorTerms anchor_terms(const SimilarityMatrix& s, const MinedPairs& mined, const MSLossParams& p, std::size_t i) {
  AnchorTerms t;
  for (std::size_t k : mined.positives[i]) t.pos_args.push_back(-p.alpha * (s(i, k) - p.lambda));
  for (std::size_t k : mined.negatives[i]) t.neg_args.push_back(p.beta * (s(i, k) - p.lambda));
  return t;
}

void check_finite(const SimilarityMatrix& s) {
  for (double v : s.values) {
    if (!std::isfinite(v)) throw NumericError("similarity matrix has non-finite entries");
  }
}

}  // namespace

void MSLossParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
}

bool MinedPairs::empty() const {
  auto none = [](const auto& sets) { return std::all_of(sets.begin(), sets.end(), [](const auto& v) { return v.empty(); }); };
  return none(positives) && none(negatives);
}

SimilarityMatrix similarity_matrix(std::span<const std::vector<double>> embeddings, std::span<const ConceptId> labels) {
  if (embeddings.size() != labels.size()) throw std::invalid_argument("similarity_matrix: one label per embedding required");
  SimilarityMatrix s;
  s.n = embeddings.size();
  s.labels.assign(labels.begin(), labels.end());
  s.values.assign(s.n * s.n, 0.0);
  const std::size_t d = s.n == 0 ? 0 : embeddings[0].size();
  for (const auto& e : embeddings) {
    if (e.size() != d) throw std::invalid_argument("similarity_matrix: embedding dimension mismatch");
  }
  for (std::size_t i = 0; i < s.n; ++i) {
    s.values[i * s.n + i] = simd::dot(embeddings[i], embeddings[i]);
    for (std::size_t j = i + 1; j < s.n; ++j) {
      const double v = simd::dot(embeddings[i], embeddings[j]);
      s.values[i * s.n + j] = v;
      s.values[j * s.n + i] = v;
    }
  }
  return s;
}

MinedPairs mine_pairs(const SimilarityMatrix& s, const MSLossParams& params) {
  MinedPairs mined;
  mined.positives.resize(s.n);
  mined.negatives.resize(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t k = 0; k < s.n; ++k) {
      if (k == i) continue;
      (s.labels[k] == s.labels[i] ? pos : neg).push_back(k);
    }
    if (neg.empty()) {
      mined.positives[i] = std::move(pos);
      continue;
    }
    if (pos.empty()) {
      mined.negatives[i] = std::move(neg);
      continue;
    }
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t k : pos) min_pos = std::min(min_pos, s(i, k));
    for (std::size_t k : neg) max_neg = std::max(max_neg, s(i, k));
    for (std::size_t k : neg) {
      if (s(i, k) > min_pos - params.epsilon) mined.negatives[i].push_back(k);
    }
    for (std::size_t k : pos) {
      if (s(i, k) < max_neg + params.epsilon) mined.positives[i].push_back(k);
    }
  }
  return mined;
}

double ms_loss(const SimilarityMatrix& s, const MinedPairs& mined, const MSLossParams& params) {
  params.validate();
  check_finite(s);
  if (s.n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto t = anchor_terms(s, mined, params, i);
    total += log1p_sum_exp(t.pos_args, nullptr) / params.alpha + log1p_sum_exp(t.neg_args, nullptr) / params.beta;
  }
  return total / static_cast<double>(s.n);
}

std::vector<double> ms_loss_similarity_grad(const SimilarityMatrix& s, const MinedPairs& mined, const MSLossParams& params) {
  params.validate();
  check_finite(s);
  std::vector<double> grad(s.n * s.n, 0.0);
  if (s.n == 0) return grad;
  const double inv_batch = 1.0 / static_cast<double>(s.n);
  std::vector<double> w;
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto t = anchor_terms(s, mined, params, i);
    // d/dS of (1/alpha) log(1 + sum exp(-alpha (S - lambda))) is -softmax weight.
    log1p_sum_exp(t.pos_args, &w);
    for (std::size_t j = 0; j < w.size(); ++j) grad[i * s.n + mined.positives[i][j]] -= inv_batch * w[j];
    log1p_sum_exp(t.neg_args, &w);
    for (std::size_t j = 0; j < w.size(); ++j) grad[i * s.n + mined.negatives[i][j]] += inv_batch * w[j];
  }
  return grad;
}

LossAndGrad ms_loss_grad(std::span<const std::vector<double>> vectors, std::span<const ConceptId> labels,
                         const MSLossParams& params) {
  const std::size_t n = vectors.size();
  const std::size_t d = n == 0 ? 0 : vectors[0].size();
  std::vector<std::vector<double>> unit(n);
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].size() != d) throw std::invalid_argument("ms_loss_grad: dimension mismatch");
    norms[i] = std::sqrt(simd::dot(vectors[i], vectors[i]));
    unit[i].assign(d, 0.0);
    if (norms[i] > 0.0) {
      for (std::size_t c = 0; c < d; ++c) unit[i][c] = vectors[i][c] / norms[i];
    } else if (d > 0) {
      unit[i][0] = 1.0;
    }
  }

  LossAndGrad out;
  const SimilarityMatrix s = similarity_matrix(unit, labels);
  out.mined = mine_pairs(s, params);
  out.loss = ms_loss(s, out.mined, params);
  const auto dS = ms_loss_similarity_grad(s, out.mined, params);

  // S_ik = <u_i, u_k> feeds both u_i and u_k.
  std::vector<std::vector<double>> du(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double g = dS[i * n + k];
      if (g == 0.0) continue;
      simd::axpy(g, unit[k], du[i]);
      simd::axpy(g, unit[i], du[k]);
    }
  }

  out.grads.assign(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(norms[i] > 0.0)) continue;
    const double proj = simd::dot(unit[i], du[i]);
    for (std::size_t c = 0; c < d; ++c) out.grads[i][c] = (du[i][c] - unit[i][c] * proj) / norms[i];
  }
  return out;
}

}  // namespace biocom
