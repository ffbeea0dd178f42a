#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "biocom/concept_id.hpp"

namespace biocom {

/// Multi-Similarity loss hyper-parameters. Defaults: alpha = 2, beta = 50,
/// lambda = 1, mining margin 0.1.
struct MSLossParams {
  double alpha = 2.0;    // positive-pair temperature
  double beta = 50.0;    // negative-pair temperature
  double lambda = 1.0;   // similarity offset
  double epsilon = 0.1;  // mining margin

  /// Throws std::invalid_argument unless alpha > 0, beta > 0, epsilon >= 0.
  void validate() const;
};

/// Row-major n x n cosine similarities with a label per row.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<ConceptId> labels;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

struct MinedPairs {
  std::vector<std::vector<std::size_t>> positives;  // per anchor
  std::vector<std::vector<std::size_t>> negatives;

  bool empty() const;
};

/// S_ij = <e_i, e_j>. Throws std::invalid_argument on dimension or label
/// count mismatch.
SimilarityMatrix similarity_matrix(std::span<const std::vector<double>> embeddings, std::span<const ConceptId> labels);

/// Per anchor i with raw positives P and negatives N:
///   keep negative k iff S_ik > min_{p in P} S_ip - epsilon
///   keep positive k iff S_ik < max_{n in N} S_in + epsilon
/// With N empty every positive is kept; with P empty every negative is kept.
MinedPairs mine_pairs(const SimilarityMatrix& s, const MSLossParams& params);

/// L = 1/|B| sum_i { 1/alpha log[1 + sum_{P_i} exp(-alpha (S_ik - lambda))]
///                 + 1/beta  log[1 + sum_{N_i} exp( beta (S_ik - lambda))] }
/// Throws NumericError on non-finite similarities.
double ms_loss(const SimilarityMatrix& s, const MinedPairs& mined, const MSLossParams& params);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // dL/d(input vector), per row
  MinedPairs mined;
};

/// Loss and gradient with respect to the (not necessarily unit) input vectors.
/// Inputs are L2-normalized internally; zero vectors get zero gradient and
/// the fixed fallback direction e_0. Mining is held constant.
LossAndGrad ms_loss_grad(std::span<const std::vector<double>> vectors, std::span<const ConceptId> labels,
                         const MSLossParams& params);

/// dL/dS for fixed mining, row-major n x n (entry (i,k) from anchor i's terms).
std::vector<double> ms_loss_similarity_grad(const SimilarityMatrix& s, const MinedPairs& mined, const MSLossParams& params);

}  // namespace biocom
