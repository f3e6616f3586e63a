#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbrdiv/error.hpp"
#include "mbrdiv/utility.hpp"

namespace mbrdiv {

/// Dense row-major |H| x |Y| table, entry (i, j) = f(h_i, y_j).
class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) throw ValidationError("score matrix must have at least one row and column");
    if (values_.size() != rows_ * cols_)
      throw ValidationError("score matrix value count " + std::to_string(values_.size()) +
                            " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) throw InvalidUtilityOutputError(k / cols_, k % cols_);
    }
  }

  ScoreMatrix(std::size_t rows, std::size_t cols, double fill)
      : ScoreMatrix(rows, cols, std::vector<double>(rows * cols, fill)) {}

  static ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw ValidationError("score matrix must have at least one row and column");
    const std::size_t cols = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (const auto& r : rows) {
      if (r.size() != cols) throw ValidationError("ragged score matrix rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return ScoreMatrix(rows.size(), cols, std::move(flat));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values() const noexcept { return values_; }

  /// Keeps only the listed columns, in the given order.
  ScoreMatrix select_columns(std::span<const std::size_t> cols) const {
    if (cols.empty()) throw ValidationError("column selection must be non-empty");
    std::vector<double> out;
    out.reserve(rows_ * cols.size());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j : cols) {
        if (j >= cols_) throw ValidationError("column index " + std::to_string(j) + " out of range");
        out.push_back((*this)(i, j));
      }
    }
    return ScoreMatrix(rows_, cols.size(), std::move(out));
  }

  bool operator==(const ScoreMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

enum class QualityKind { mbr_mean, human, gold_mean };

struct QualityVector {
  std::vector<double> values;
  QualityKind kind = QualityKind::mbr_mean;

  QualityVector() = default;
  QualityVector(std::vector<double> v, QualityKind k) : values(std::move(v)), kind(k) {
    for (double x : values) {
      if (!std::isfinite(x)) throw ValidationError("quality vector entries must be finite");
    }
  }
  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

struct DecodingInstance {
  std::string id;
  std::vector<std::string> hypotheses;
  std::vector<std::string> pseudo_references;
  std::optional<std::vector<std::string>> gold_references;
  std::optional<std::vector<double>> human_scores;
  std::optional<std::vector<double>> sample_weights;
  // Importance-sampling inputs: P(y|x) and P'(y|x) per pseudo-reference.
  std::optional<std::vector<double>> target_probs;
  std::optional<std::vector<double>> proposal_probs;

  /// Throws ValidationError naming the instance id on the first broken invariant.
  void validate() const {
    auto fail = [&](const std::string& what) { throw ValidationError("instance '" + id + "': " + what); };
    if (hypotheses.empty()) fail("hypotheses must be non-empty");
    if (pseudo_references.empty()) fail("pseudo_refs must be non-empty");
    if (human_scores) {
      if (human_scores->size() != hypotheses.size()) fail("human_scores length must equal hypothesis count");
      for (double s : *human_scores)
        if (!std::isfinite(s)) fail("human_scores must be finite");
    }
    if (sample_weights) {
      if (sample_weights->size() != pseudo_references.size()) fail("weights length must equal pseudo_refs count");
      bool positive = false;
      for (double w : *sample_weights) {
        if (!std::isfinite(w) || w < 0) fail("weights must be finite and non-negative");
        positive = positive || w > 0;
      }
      if (!positive) fail("weights need at least one positive entry");
    }
    for (const auto* probs : {&target_probs, &proposal_probs}) {
      if (*probs && (*probs)->size() != pseudo_references.size())
        fail("probability vectors must have one entry per pseudo-reference");
    }
  }

  QualityVector human() const {
    if (!human_scores) throw ValidationError("instance '" + id + "': no human_scores");
    return {*human_scores, QualityKind::human};
  }
};

enum class ReferenceSet { pseudo, gold };

inline ScoreMatrix build_score_matrix(const DecodingInstance& instance, const UtilityFunction& utility,
                                      ReferenceSet reference_set = ReferenceSet::pseudo) {
  const std::vector<std::string>* refs = &instance.pseudo_references;
  if (reference_set == ReferenceSet::gold) {
    if (!instance.gold_references || instance.gold_references->empty())
      throw NoGoldReferencesError(instance.id);
    refs = &*instance.gold_references;
  }
  if (instance.hypotheses.empty() || refs->empty())
    throw ValidationError("instance '" + instance.id + "': empty hypothesis or reference set");

  const std::size_t rows = instance.hypotheses.size();
  const std::size_t cols = refs->size();
  std::vector<double> values(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = utility(CellRef{instance.hypotheses[i], (*refs)[j], i, j, instance.id});
      if (!std::isfinite(v)) throw InvalidUtilityOutputError(i, j);
      values[i * cols + j] = v;
    }
  }
  return ScoreMatrix(rows, cols, std::move(values));
}

/// ū_i = (1/|Y|) Σ_j u_i^j.
inline QualityVector row_mean(const ScoreMatrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    long double acc = 0;
    for (double v : m.row(i)) acc += v;
    out[i] = static_cast<double>(acc / static_cast<long double>(m.cols()));
  }
  return {std::move(out), QualityKind::mbr_mean};
}

inline void check_weights(std::span<const double> weights, std::size_t expected) {
  if (weights.size() != expected)
    throw ValidationError("weight count " + std::to_string(weights.size()) + " does not match " +
                          std::to_string(expected) + " references");
  bool positive = false;
  for (double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("weights must be finite");
    if (w < 0) throw ValidationError("negative weight");
    positive = positive || w > 0;
  }
  if (!positive) throw ValidationError("all-zero weights");
}

/// Σ_j w_j u_i^j / Σ_j w_j. Weights need not sum to one.
inline QualityVector weighted_row_mean(const ScoreMatrix& m, std::span<const double> weights) {
  check_weights(weights, m.cols());
  // Uniform weights take the unweighted path so both agree bit-for-bit.
  if (std::adjacent_find(weights.begin(), weights.end(), std::not_equal_to<>()) == weights.end())
    return row_mean(m);
  long double total = 0;
  for (double w : weights) total += w;
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    long double acc = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += static_cast<long double>(weights[j]) * m(i, j);
    out[i] = static_cast<double>(acc / total);
  }
  return {std::move(out), QualityKind::mbr_mean};
}

}  // namespace mbrdiv
