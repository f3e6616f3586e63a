#pragma once

// Quality-estimation error of MBR decoding split into Bias and Diversity:
//   MSE(û, ū) = E_i E_j (û_i − u_i^j)²  −  E_i E_j (ū_i − u_i^j)²
// plus the one-best restriction, the Brown-style reformulation and pseudo-bias.

#include <cstddef>
#include <optional>
#include <string>

#include "mbrdiv/core.hpp"
#include "mbrdiv/decode.hpp"
#include "mbrdiv/error.hpp"

namespace mbrdiv {

namespace detail {

inline void require_rows(const QualityVector& q, const ScoreMatrix& m, const char* what) {
  if (q.size() != m.rows())
    throw ValidationError(std::string(what) + ": quality vector length " + std::to_string(q.size()) +
                          " does not match " + std::to_string(m.rows()) + " hypotheses");
}

inline long double row_sq_gap(double target, std::span<const double> row) {
  long double acc = 0;
  for (double v : row) {
    const long double d = static_cast<long double>(target) - v;
    acc += d * d;
  }
  return acc / static_cast<long double>(row.size());
}

inline long double row_mean_ld(std::span<const double> row) {
  long double acc = 0;
  for (double v : row) acc += v;
  return acc / static_cast<long double>(row.size());
}

}  // namespace detail

inline double mse(const QualityVector& human, const QualityVector& mean) {
  if (human.size() != mean.size())
    throw ValidationError("mse: lengths " + std::to_string(human.size()) + " and " + std::to_string(mean.size()) +
                          " differ");
  if (human.size() == 0) throw ValidationError("mse: empty vectors");
  long double acc = 0;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const long double d = static_cast<long double>(human[i]) - mean[i];
    acc += d * d;
  }
  return static_cast<double>(acc / static_cast<long double>(human.size()));
}

inline double bias_term(const QualityVector& human, const ScoreMatrix& m) {
  detail::require_rows(human, m, "bias_term");
  long double acc = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) acc += detail::row_sq_gap(human[i], m.row(i));
  return static_cast<double>(acc / static_cast<long double>(m.rows()));
}

/// E_i E_j (ū_i − u_i^j)²; equals bias_term with û := ū.
inline double diversity_term(const ScoreMatrix& m) { return bias_term(row_mean(m), m); }

struct OneBestTerms {
  double bias = 0;
  double diversity = 0;
  double mse = 0;
  std::size_t index = 0;
};

/// The three quantities restricted to the row MBR decoding selects.
inline OneBestTerms one_best_terms(const QualityVector& human, const ScoreMatrix& m) {
  detail::require_rows(human, m, "one_best_terms");
  OneBestTerms t;
  t.index = mbr_decode(m).selected_index;
  const auto row = m.row(t.index);
  const double mu = static_cast<double>(detail::row_mean_ld(row));
  t.bias = static_cast<double>(detail::row_sq_gap(human[t.index], row));
  t.diversity = static_cast<double>(detail::row_sq_gap(mu, row));
  const long double gap = static_cast<long double>(human[t.index]) - mu;
  t.mse = static_cast<double>(gap * gap);
  return t;
}

/// Bias/Diversity reformulated with shared Ω. References play the role of
/// ensemble members and hypotheses the averaging variable.
struct BrownTerms {
  double bias_bar = 0;   // E_i[E_j u_j^i − E_j û_j]
  double var_bar = 0;    // E_i E_j (u_j^i − E_k u_k^i)²
  double cov_bar = 0;    // mean over ordered reference pairs i≠j of Cov_k(u^i, u^j)
  bool cov_defined = true;  // false with a single reference; cov_bar is then 0
  double omega = 0;
  double shared_bias = 0;       // bias_bar² + Ω
  double shared_diversity = 0;  // Ω − [var_bar/|Y| + (1 − 1/|Y|) cov_bar]
};

inline BrownTerms brown_terms(const QualityVector& human, const ScoreMatrix& m) {
  detail::require_rows(human, m, "brown_terms");
  const std::size_t nh = m.rows();
  const std::size_t ny = m.cols();
  const auto lnh = static_cast<long double>(nh);
  const auto lny = static_cast<long double>(ny);

  // Per-reference means over hypotheses: E_k u_k^i.
  std::vector<long double> col_mean(ny, 0);
  for (std::size_t k = 0; k < nh; ++k)
    for (std::size_t i = 0; i < ny; ++i) col_mean[i] += m(k, i);
  for (auto& c : col_mean) c /= lnh;

  long double human_mean = 0;
  for (double v : human.values) human_mean += v;
  human_mean /= lnh;

  // E_k ū_k equals the mean of the column means.
  long double grand = 0;
  for (auto c : col_mean) grand += c;
  grand /= lny;

  BrownTerms b;
  long double bias_bar = 0;
  for (auto c : col_mean) bias_bar += c - human_mean;
  bias_bar /= lny;

  long double var_bar = 0;
  for (std::size_t i = 0; i < ny; ++i) {
    long double s = 0;
    for (std::size_t k = 0; k < nh; ++k) s += (m(k, i) - col_mean[i]) * (m(k, i) - col_mean[i]);
    var_bar += s / lnh;
  }
  var_bar /= lny;

  long double cov_bar = 0;
  if (ny >= 2) {
    for (std::size_t i = 0; i < ny; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        if (i == j) continue;
        long double s = 0;
        for (std::size_t k = 0; k < nh; ++k) s += (m(k, i) - col_mean[i]) * (m(k, j) - col_mean[j]);
        cov_bar += s / lnh;
      }
    }
    cov_bar /= lny * (lny - 1);
  } else {
    b.cov_defined = false;
  }

  long double spread = 0;
  for (auto c : col_mean) spread += (c - grand) * (c - grand);
  spread /= lny;
  const long double omega = var_bar + spread;

  b.bias_bar = static_cast<double>(bias_bar);
  b.var_bar = static_cast<double>(var_bar);
  b.cov_bar = static_cast<double>(cov_bar);
  b.omega = static_cast<double>(omega);
  b.shared_bias = static_cast<double>(bias_bar * bias_bar + omega);
  b.shared_diversity = static_cast<double>(omega - (var_bar / lny + (1 - 1 / lny) * cov_bar));
  return b;
}

/// Bias with û replaced by ũ, the mean utility against gold references.
inline double pseudo_bias(const ScoreMatrix& m, const ScoreMatrix& gold_matrix) {
  if (gold_matrix.rows() != m.rows())
    throw ValidationError("pseudo_bias: gold matrix has " + std::to_string(gold_matrix.rows()) + " rows, expected " +
                          std::to_string(m.rows()));
  QualityVector gold = row_mean(gold_matrix);
  gold.kind = QualityKind::gold_mean;
  return bias_term(gold, m);
}

struct DecompositionReport {
  double mse = 0;
  double bias = 0;
  double diversity = 0;
  double one_best_bias = 0;
  double one_best_diversity = 0;
  double one_best_mse = 0;
  std::size_t one_best_index = 0;
  BrownTerms brown;
  std::optional<double> pseudo_bias;
};

inline DecompositionReport decompose(const QualityVector& human, const ScoreMatrix& m,
                                     const ScoreMatrix* gold_matrix = nullptr) {
  detail::require_rows(human, m, "decompose");
  DecompositionReport r;
  r.mse = mbrdiv::mse(human, row_mean(m));
  r.bias = bias_term(human, m);
  r.diversity = diversity_term(m);
  const auto ob = one_best_terms(human, m);
  r.one_best_bias = ob.bias;
  r.one_best_diversity = ob.diversity;
  r.one_best_mse = ob.mse;
  r.one_best_index = ob.index;
  r.brown = brown_terms(human, m);
  if (gold_matrix) r.pseudo_bias = mbrdiv::pseudo_bias(m, *gold_matrix);
  return r;
}

}  // namespace mbrdiv
