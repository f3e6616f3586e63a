#pragma once

// Exact information-theoretic quantities on small discrete joints
// p(x_1, ..., x_n, ĥ). Everything is in bits. Predictor indices are 0-based.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mbrdiv/error.hpp"

namespace mbrdiv::info {

inline constexpr std::size_t kMaxJointCells = 1'000'000;
inline constexpr double kNormTolerance = 1e-12;

using Subset = std::vector<std::size_t>;

/// Dense pmf over (x_1, ..., x_n, ĥ), flattened row-major with x_1 slowest
/// and ĥ fastest.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<std::size_t> alphabet_sizes, std::size_t target_size, std::vector<double> pmf,
                double tolerance = kNormTolerance)
      : alphabet_sizes_(std::move(alphabet_sizes)), target_size_(target_size), pmf_(std::move(pmf)) {
    if (target_size_ < 1) throw ValidationError("target alphabet must be non-empty");
    std::size_t cells = target_size_;
    for (std::size_t a : alphabet_sizes_) {
      if (a < 1) throw ValidationError("predictor alphabets must be non-empty");
      if (cells > kMaxJointCells / a) throw ValidationError("joint exceeds the 10^6 cell enumeration cap");
      cells *= a;
    }
    if (pmf_.size() != cells)
      throw ValidationError("pmf has " + std::to_string(pmf_.size()) + " cells, expected " + std::to_string(cells));
    long double total = 0;
    for (double p : pmf_) {
      if (!std::isfinite(p) || p < 0) throw ValidationError("pmf entries must be finite and non-negative");
      total += p;
    }
    if (std::fabs(static_cast<double>(total) - 1.0) > tolerance)
      throw ValidationError("pmf sums to " + std::to_string(static_cast<double>(total)) + ", expected 1");
  }

  std::size_t n_vars() const noexcept { return alphabet_sizes_.size(); }
  const std::vector<std::size_t>& alphabet_sizes() const noexcept { return alphabet_sizes_; }
  std::size_t target_size() const noexcept { return target_size_; }
  std::span<const double> pmf() const noexcept { return pmf_; }

  void check_subset(const Subset& s) const {
    std::vector<bool> seen(n_vars(), false);
    for (std::size_t i : s) {
      if (i >= n_vars())
        throw ValidationError("predictor index " + std::to_string(i) + " out of range for " +
                              std::to_string(n_vars()) + " variables");
      if (seen[i]) throw ValidationError("predictor index " + std::to_string(i) + " repeated in subset");
      seen[i] = true;
    }
  }

  /// Marginal table over (x_s for s in subset, [ĥ]), subset order preserved,
  /// target fastest when included.
  std::vector<long double> marginal(const Subset& subset, bool with_target) const {
    check_subset(subset);
    std::vector<std::size_t> stride(n_vars(), 0);
    std::size_t size = with_target ? target_size_ : 1;
    std::size_t mult = size;
    for (std::size_t k = subset.size(); k-- > 0;) {
      stride[subset[k]] = mult;
      mult *= alphabet_sizes_[subset[k]];
    }
    size = mult;
    std::vector<long double> out(size, 0);
    std::vector<std::size_t> digit(n_vars(), 0);
    std::size_t base = 0;  // marginal offset contributed by the predictors
    const std::size_t n = n_vars();
    for (std::size_t c = 0; c < pmf_.size(); c += target_size_) {
      for (std::size_t h = 0; h < target_size_; ++h) out[base + (with_target ? h : 0)] += pmf_[c + h];
      // Advance the mixed-radix predictor counter, x_n fastest.
      for (std::size_t v = n; v-- > 0;) {
        base += stride[v];
        if (++digit[v] < alphabet_sizes_[v]) break;
        base -= stride[v] * digit[v];
        digit[v] = 0;
      }
    }
    return out;
  }

  std::vector<long double> target_marginal() const { return marginal({}, true); }

 private:
  std::vector<std::size_t> alphabet_sizes_;
  std::size_t target_size_;
  std::vector<double> pmf_;
};

namespace detail {

template <typename T>
long double entropy_bits(std::span<const T> p) {
  long double h = 0;
  for (T v : p) {
    if (v > 0) h -= static_cast<long double>(v) * std::log2(static_cast<long double>(v));
  }
  return h;
}

inline long double entropy_of(const DiscreteJoint& j, const Subset& s, bool with_target) {
  const auto m = j.marginal(s, with_target);
  return entropy_bits(std::span<const long double>(m));
}

}  // namespace detail

/// −Σ p log₂ p, with 0 log 0 = 0.
inline double entropy(std::span<const double> pmf, double tolerance = 1e-9) {
  long double total = 0;
  for (double p : pmf) {
    if (!std::isfinite(p) || p < 0) throw ValidationError("entropy: pmf entries must be finite and non-negative");
    total += p;
  }
  if (pmf.empty() || std::fabs(static_cast<double>(total) - 1.0) > tolerance)
    throw ValidationError("entropy: pmf is not normalized");
  return static_cast<double>(detail::entropy_bits(pmf));
}

inline double target_entropy(const DiscreteJoint& j) { return static_cast<double>(detail::entropy_of(j, {}, true)); }

/// I(X_S; Ĥ) = H(X_S) + H(Ĥ) − H(X_S, Ĥ). Empty subset gives 0.
inline double mutual_information(const DiscreteJoint& j, const Subset& s) {
  j.check_subset(s);
  if (s.empty()) return 0.0;
  const long double v = detail::entropy_of(j, s, false) + detail::entropy_of(j, {}, true) - detail::entropy_of(j, s, true);
  return static_cast<double>(std::max<long double>(v, 0));
}

/// Σ_i H(X_i) − H(X_S).
inline double total_correlation(const DiscreteJoint& j, const Subset& s) {
  j.check_subset(s);
  if (s.size() < 2) return 0.0;
  long double sum = 0;
  for (std::size_t i : s) sum += detail::entropy_of(j, {i}, false);
  return static_cast<double>(std::max<long double>(sum - detail::entropy_of(j, s, false), 0));
}

/// Σ_i H(X_i | Ĥ) − H(X_S | Ĥ); the H(Ĥ) terms are kept so the identity is exact.
inline double conditional_total_correlation(const DiscreteJoint& j, const Subset& s) {
  j.check_subset(s);
  if (s.size() < 2) return 0.0;
  const long double ht = detail::entropy_of(j, {}, true);
  long double sum = 0;
  for (std::size_t i : s) sum += detail::entropy_of(j, {i}, true) - ht;
  const long double joint = detail::entropy_of(j, s, true) - ht;
  return static_cast<double>(std::max<long double>(sum - joint, 0));
}

/// MAP error: 1 − Σ_x max_ĥ p(x, ĥ).
inline double bayes_error(const DiscreteJoint& j, const Subset& s) {
  const auto m = j.marginal(s, true);
  const std::size_t t = j.target_size();
  long double hit = 0;
  for (std::size_t c = 0; c < m.size(); c += t) hit += *std::max_element(m.begin() + c, m.begin() + c + t);
  return static_cast<double>(std::clamp<long double>(1 - hit, 0, 1));
}

struct ErrorBounds {
  double lower = 0;  // (H(Ĥ) − I − 1) / log₂|Ĥ|, unclamped
  double upper = 0;  // (H(Ĥ) − I) / 2
};

inline ErrorBounds bounds_from(double h_target, double mi, std::size_t target_size) {
  if (target_size < 2) throw ValidationError("error bounds need a target alphabet of at least 2");
  return {(h_target - mi - 1.0) / std::log2(static_cast<double>(target_size)), (h_target - mi) / 2.0};
}

inline ErrorBounds error_bounds(const DiscreteJoint& j, const Subset& s) {
  if (j.target_size() < 2) throw ValidationError("error bounds need a target alphabet of at least 2");
  return bounds_from(target_entropy(j), mutual_information(j, s), j.target_size());
}

struct ITReport {
  double h_target = 0;
  double mi = 0;
  double relevancy = 0;
  double cond_redundancy = 0;
  double redundancy = 0;
  double it_diversity = 0;
  double lower_bound = 0;
  double upper_bound = 0;
  double bayes_error = 0;

  /// |mi − (relevancy + cond_redundancy − redundancy)|.
  double identity_residual() const { return std::fabs(mi - (relevancy + cond_redundancy - redundancy)); }
};

/// I(X_S; Ĥ) = Relevancy + Conditional Redundancy − Redundancy, with bounds.
inline ITReport decompose_mi(const DiscreteJoint& j, const Subset& s) {
  ITReport r;
  r.h_target = target_entropy(j);
  r.mi = mutual_information(j, s);
  for (std::size_t i : s) r.relevancy += mutual_information(j, {i});
  r.cond_redundancy = conditional_total_correlation(j, s);
  r.redundancy = total_correlation(j, s);
  r.it_diversity = r.cond_redundancy - r.redundancy;
  if (j.target_size() >= 2) {
    const auto b = bounds_from(r.h_target, r.mi, j.target_size());
    r.lower_bound = b.lower;
    r.upper_bound = b.upper;
  }
  r.bayes_error = bayes_error(j, s);
  return r;
}

inline Subset all_vars(const DiscreteJoint& j) {
  Subset s(j.n_vars());
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

/// p(x_1..x_n, ĥ) = prior(ĥ) Π_i p(x_i | ĥ). conditionals[i][ĥ][x].
inline DiscreteJoint make_ci_joint(std::span<const double> prior,
                                   const std::vector<std::vector<std::vector<double>>>& conditionals,
                                   double tolerance = 1e-9) {
  const std::size_t t = prior.size();
  if (t == 0) throw ValidationError("prior must be non-empty");
  long double ps = 0;
  for (double p : prior) {
    if (!std::isfinite(p) || p < 0) throw ValidationError("prior entries must be non-negative");
    ps += p;
  }
  if (std::fabs(static_cast<double>(ps) - 1.0) > tolerance) throw ValidationError("prior is not normalized");
  std::vector<std::size_t> sizes;
  for (std::size_t v = 0; v < conditionals.size(); ++v) {
    const auto& table = conditionals[v];
    if (table.size() != t)
      throw ValidationError("conditional " + std::to_string(v) + " needs one row per target value");
    const std::size_t a = table.front().size();
    for (const auto& row : table) {
      if (row.size() != a || a == 0) throw ValidationError("conditional " + std::to_string(v) + " is ragged");
      long double s = 0;
      for (double p : row) {
        if (!std::isfinite(p) || p < 0) throw ValidationError("conditional entries must be non-negative");
        s += p;
      }
      if (std::fabs(static_cast<double>(s) - 1.0) > tolerance)
        throw ValidationError("conditional " + std::to_string(v) + " row is not normalized");
    }
    sizes.push_back(a);
  }
  std::size_t cells = t;
  for (std::size_t a : sizes) {
    if (cells > kMaxJointCells / a) throw ValidationError("joint exceeds the 10^6 cell enumeration cap");
    cells *= a;
  }
  std::vector<double> pmf(cells);
  std::vector<std::size_t> digit(sizes.size(), 0);
  for (std::size_t c = 0; c < cells; c += t) {
    for (std::size_t h = 0; h < t; ++h) {
      long double p = prior[h];
      for (std::size_t v = 0; v < sizes.size(); ++v) p *= conditionals[v][h][digit[v]];
      pmf[c + h] = static_cast<double>(p);
    }
    for (std::size_t v = sizes.size(); v-- > 0;) {
      if (++digit[v] < sizes[v]) break;
      digit[v] = 0;
    }
  }
  // Renormalize away product rounding before the strict sum check.
  long double total = 0;
  for (double p : pmf) total += p;
  for (double& p : pmf) p = static_cast<double>(p / total);
  return DiscreteJoint(std::move(sizes), t, std::move(pmf), tolerance);
}

// ---------------------------------------------------------------------------
// Set-function scanners

inline constexpr std::size_t kDefaultEnumerationCap = 4;

struct Violation {
  std::string function;  // "mi", "it_diversity", "lower_bound", "upper_bound"
  std::string property;  // "submodular", "supermodular", "non_decreasing", "non_increasing"
  Subset smaller;        // S
  Subset larger;         // T (S ⊆ T); empty for monotonicity witnesses that only need S
  std::size_t added = 0; // a
  double gain_smaller = 0;
  double gain_larger = 0;
};

struct SubmodularityReport {
  std::size_t n_vars = 0;
  std::size_t triples_checked = 0;
  std::vector<Violation> violations;

  std::size_t count(std::string_view function, std::string_view property) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(), [&](const Violation& v) {
      return v.function == function && v.property == property;
    }));
  }
};

namespace detail {

inline Subset mask_to_subset(std::uint32_t mask, std::size_t n) {
  Subset s;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (1u << i)) s.push_back(i);
  return s;
}

}  // namespace detail

/// Enumerates every S ⊆ T ⊆ V and a ∉ T. Checks diminishing returns for I and
/// IT-diversity, and that I never decreases; the bounds are checked to be
/// supermodular and non-increasing.
inline SubmodularityReport submodularity_check(const DiscreteJoint& j, double tolerance = 1e-9,
                                               std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t n = j.n_vars();
  if (n > cap)
    throw ValidationError("submodularity check enumerates 2^n subsets; n = " + std::to_string(n) +
                          " exceeds the cap of " + std::to_string(cap));
  const std::uint32_t full = (1u << n);
  std::vector<ITReport> f(full);
  for (std::uint32_t mask = 0; mask < full; ++mask) f[mask] = decompose_mi(j, detail::mask_to_subset(mask, n));
  const bool with_bounds = j.target_size() >= 2;

  SubmodularityReport rep;
  rep.n_vars = n;
  auto record = [&](const char* fn, const char* prop, std::uint32_t s, std::uint32_t t, std::size_t a, double gs,
                    double gt) {
    rep.violations.push_back({fn, prop, detail::mask_to_subset(s, n), detail::mask_to_subset(t, n), a, gs, gt});
  };

  for (std::uint32_t t = 0; t < full; ++t) {
    for (std::uint32_t s = t;; s = (s - 1) & t) {  // all submasks of t
      for (std::size_t a = 0; a < n; ++a) {
        const std::uint32_t bit = 1u << a;
        if (t & bit) continue;
        ++rep.triples_checked;
        auto gain = [&](auto get, std::uint32_t base) { return get(f[base | bit]) - get(f[base]); };
        const auto mi = [](const ITReport& r) { return r.mi; };
        const auto div = [](const ITReport& r) { return r.it_diversity; };
        const double mi_s = gain(mi, s), mi_t = gain(mi, t);
        if (mi_s < mi_t - tolerance) record("mi", "submodular", s, t, a, mi_s, mi_t);
        const double dv_s = gain(div, s), dv_t = gain(div, t);
        if (dv_s < dv_t - tolerance) record("it_diversity", "submodular", s, t, a, dv_s, dv_t);
        if (with_bounds) {
          const auto lo = [](const ITReport& r) { return r.lower_bound; };
          const auto up = [](const ITReport& r) { return r.upper_bound; };
          const double lo_s = gain(lo, s), lo_t = gain(lo, t);
          if (lo_s > lo_t + tolerance) record("lower_bound", "supermodular", s, t, a, lo_s, lo_t);
          const double up_s = gain(up, s), up_t = gain(up, t);
          if (up_s > up_t + tolerance) record("upper_bound", "supermodular", s, t, a, up_s, up_t);
        }
        if (s == t) {
          if (mi_t < -tolerance) record("mi", "non_decreasing", t, t, a, mi_t, mi_t);
          if (with_bounds) {
            const double lo_g = f[t | bit].lower_bound - f[t].lower_bound;
            const double up_g = f[t | bit].upper_bound - f[t].upper_bound;
            if (lo_g > tolerance) record("lower_bound", "non_increasing", t, t, a, lo_g, lo_g);
            if (up_g > tolerance) record("upper_bound", "non_increasing", t, t, a, up_g, up_g);
          }
        }
      }
      if (s == 0) break;
    }
  }
  return rep;
}

struct ITDeltas {
  double relevancy = 0;
  double redundancy = 0;
  double cond_redundancy = 0;
  double it_diversity = 0;
  double mi = 0;
  double lower_bound = 0;
  double upper_bound = 0;
};

inline ITDeltas difference(const ITReport& after, const ITReport& before) {
  return {after.relevancy - before.relevancy,       after.redundancy - before.redundancy,
          after.cond_redundancy - before.cond_redundancy, after.it_diversity - before.it_diversity,
          after.mi - before.mi,                     after.lower_bound - before.lower_bound,
          after.upper_bound - before.upper_bound};
}

struct MonotonicityStep {
  Subset subset;  // variables present after this step
  ITReport report;
  ITDeltas delta;  // relative to the previous step (the empty set for the first)
};

struct MonotonicityScan {
  std::vector<MonotonicityStep> steps;
  /// Steps at which relevancy, redundancy or conditional redundancy dropped
  /// by more than the tolerance. Always empty for a valid joint.
  std::vector<std::size_t> term_violations;
};

/// Grows the subset one chain element at a time and reports signed deltas.
inline MonotonicityScan monotonicity_scan(const DiscreteJoint& j, const Subset& chain, double tolerance = 1e-12) {
  j.check_subset(chain);
  MonotonicityScan scan;
  Subset current;
  ITReport prev = decompose_mi(j, current);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    current.push_back(chain[k]);
    ITReport now = decompose_mi(j, current);
    const ITDeltas d = difference(now, prev);
    if (d.relevancy < -tolerance || d.redundancy < -tolerance || d.cond_redundancy < -tolerance)
      scan.term_violations.push_back(k);
    scan.steps.push_back({current, now, d});
    prev = now;
  }
  return scan;
}

/// Growing-target mode: one joint per step, each with its own target
/// alphabet. Reports full-set quantities and raw deltas; no sign checks.
inline MonotonicityScan monotonicity_scan_growing(std::span<const DiscreteJoint> steps) {
  MonotonicityScan scan;
  ITReport prev;
  bool first = true;
  for (const auto& j : steps) {
    ITReport now = decompose_mi(j, all_vars(j));
    scan.steps.push_back({all_vars(j), now, first ? ITDeltas{} : difference(now, prev)});
    prev = now;
    first = false;
  }
  return scan;
}

}  // namespace mbrdiv::info
