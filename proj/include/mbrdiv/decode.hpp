#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mbrdiv/core.hpp"
#include "mbrdiv/error.hpp"

namespace mbrdiv {

struct DecodeResult {
  std::size_t selected_index = 0;
  double selected_score = 0;
  QualityVector score_vector;
  std::size_t tie_count = 1;
};

/// Argmax with lowest-index tie-breaking; tie_count counts exact maxima.
inline DecodeResult select_max(QualityVector scores) {
  if (scores.values.empty()) throw ValidationError("cannot select from an empty score vector");
  DecodeResult r;
  r.selected_index = 0;
  r.selected_score = scores.values[0];
  r.tie_count = 1;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores.values[i] > r.selected_score) {
      r.selected_index = i;
      r.selected_score = scores.values[i];
      r.tie_count = 1;
    } else if (scores.values[i] == r.selected_score) {
      ++r.tie_count;
    }
  }
  r.score_vector = std::move(scores);
  return r;
}

inline DecodeResult mbr_decode(const ScoreMatrix& m) { return select_max(row_mean(m)); }

inline DecodeResult human_select(const QualityVector& human_scores) { return select_max(human_scores); }

/// MBR with per-reference weights (model probabilities or importance ratios).
inline DecodeResult weighted_mbr(const ScoreMatrix& m, std::span<const double> weights) {
  return select_max(weighted_row_mean(m, weights));
}

/// target/proposal, unnormalized; weighted_mbr normalizes.
inline std::vector<double> importance_weights(std::span<const double> target_probs,
                                              std::span<const double> proposal_probs) {
  if (target_probs.size() != proposal_probs.size())
    throw ValidationError("importance weights: target and proposal lengths differ");
  std::vector<double> w(target_probs.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!(proposal_probs[j] > 0) || !std::isfinite(proposal_probs[j]))
      throw ValidationError("invalid proposal: probability at " + std::to_string(j) + " must be > 0");
    if (!(target_probs[j] >= 0) || !std::isfinite(target_probs[j]))
      throw ValidationError("importance weights: target probability at " + std::to_string(j) + " must be >= 0");
    w[j] = target_probs[j] / proposal_probs[j];
  }
  return w;
}

/// Element-wise mean of same-shaped matrices.
inline ScoreMatrix mean_matrix(std::span<const ScoreMatrix> matrices) {
  if (matrices.empty()) throw ValidationError("metric ensemble must contain at least one matrix");
  const std::size_t rows = matrices.front().rows();
  const std::size_t cols = matrices.front().cols();
  for (const auto& m : matrices) {
    if (m.rows() != rows || m.cols() != cols)
      throw ValidationError("metric ensemble matrices differ in dimensions");
  }
  if (matrices.size() == 1) return matrices.front();
  std::vector<double> out(rows * cols);
  for (std::size_t k = 0; k < out.size(); ++k) {
    long double acc = 0;
    for (const auto& m : matrices) acc += m.values()[k];
    out[k] = static_cast<double>(acc / static_cast<long double>(matrices.size()));
  }
  return ScoreMatrix(rows, cols, std::move(out));
}

/// Metric-augmented MBR: average utility over references and over metrics.
inline DecodeResult mambr_decode(std::span<const ScoreMatrix> matrices) {
  const ScoreMatrix mean = mean_matrix(matrices);
  return mbr_decode(mean);
}

}  // namespace mbrdiv
