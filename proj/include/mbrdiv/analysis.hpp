#pragma once

// Correlation statistics and the sample-size scaling harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mbrdiv/core.hpp"
#include "mbrdiv/csv.hpp"
#include "mbrdiv/decode.hpp"
#include "mbrdiv/error.hpp"
#include "mbrdiv/parallel.hpp"
#include "mbrdiv/random.hpp"

namespace mbrdiv::analysis {

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("correlation: series lengths " + std::to_string(x.size()) + " and " +
                          std::to_string(y.size()) + " differ");
  if (x.size() < 2) throw ValidationError("correlation: need at least two observations");
  for (double v : x)
    if (!std::isfinite(v)) throw ValidationError("correlation: non-finite value");
  for (double v : y)
    if (!std::isfinite(v)) throw ValidationError("correlation: non-finite value");
}

inline bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y);
  if (detail::is_constant(x) || detail::is_constant(y)) throw ZeroVarianceError();
  const auto n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const long double dx = x[k] - mx, dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw ZeroVarianceError();
  const long double r = sxy / std::sqrt(sxx * syy);
  return static_cast<double>(std::clamp<long double>(r, -1, 1));
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

inline constexpr double kFisherClamp = 1.0 - 1e-12;

/// tanh(mean(atanh r)). |r| = 1 is rejected unless `clamp` pulls it to ±(1 − 1e-12).
inline double fisher_z_average(std::span<const double> rs, bool clamp = false) {
  if (rs.empty()) throw ValidationError("fisher_z_average: no correlations");
  long double z = 0;
  for (double r : rs) {
    if (!std::isfinite(r) || std::fabs(r) > 1) throw ValidationError("fisher_z_average: correlation outside [-1, 1]");
    if (std::fabs(r) >= 1) {
      if (!clamp) throw DegenerateCorrelationError(r);
      r = std::copysign(kFisherClamp, r);
    }
    z += std::atanh(static_cast<long double>(r));
  }
  return static_cast<double>(std::tanh(z / static_cast<long double>(rs.size())));
}

enum class Measure {
  overall_bias,
  one_best_bias,
  overall_diversity,
  one_best_diversity,
  overall_mse,
  one_best_mse,
  performance
};

inline constexpr std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::overall_bias: return "overall_bias";
    case Measure::one_best_bias: return "one_best_bias";
    case Measure::overall_diversity: return "overall_diversity";
    case Measure::one_best_diversity: return "one_best_diversity";
    case Measure::overall_mse: return "overall_mse";
    case Measure::one_best_mse: return "one_best_mse";
    case Measure::performance: return "performance";
  }
  return "unknown";
}

inline std::optional<Measure> parse_measure(std::string_view s) {
  for (Measure m : {Measure::overall_bias, Measure::one_best_bias, Measure::overall_diversity,
                    Measure::one_best_diversity, Measure::overall_mse, Measure::one_best_mse, Measure::performance}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

/// Lower bias / mse is better, so those enter correlations negated.
inline constexpr bool negated_by_default(Measure m) {
  return m == Measure::overall_bias || m == Measure::one_best_bias || m == Measure::overall_mse ||
         m == Measure::one_best_mse;
}

/// One value per (sampling method x sample size) configuration.
struct MeasureSeries {
  Measure label;
  std::vector<double> values;
  bool negate;

  MeasureSeries(Measure l, std::vector<double> v) : label(l), values(std::move(v)), negate(negated_by_default(l)) {}
  MeasureSeries(Measure l, std::vector<double> v, bool neg) : label(l), values(std::move(v)), negate(neg) {}

  std::vector<double> signed_values() const {
    std::vector<double> out = values;
    if (negate)
      for (double& v : out) v = -v;
    return out;
  }
};

struct Dataset {
  std::string name;
  std::vector<MeasureSeries> series;  // must contain exactly one performance series
};

struct CorrelationRow {
  std::string measure;
  std::string dataset;
  double spearman = 0;
  double pearson = 0;
  std::size_t n = 0;  // observations (or datasets for the aggregate rows)
};

inline constexpr std::string_view kFisherDataset = "fisher_z";

/// Correlates every non-performance series against performance, per dataset.
/// With several datasets, appends Fisher-z averaged rows (unweighted).
inline std::vector<CorrelationRow> correlation_report(std::span<const Dataset> datasets, bool clamp_fisher = false) {
  if (datasets.empty()) throw ValidationError("correlation report: no datasets");
  std::vector<CorrelationRow> rows;
  std::vector<Measure> order;
  for (const auto& ds : datasets) {
    const MeasureSeries* perf = nullptr;
    for (const auto& s : ds.series) {
      if (s.label == Measure::performance) {
        if (perf) throw ValidationError("dataset '" + ds.name + "': more than one performance series");
        perf = &s;
      }
    }
    if (!perf) throw ValidationError("dataset '" + ds.name + "': no performance series");
    const auto p = perf->signed_values();
    for (const auto& s : ds.series) {
      if (&s == perf) continue;
      if (s.values.size() != p.size())
        throw ValidationError("dataset '" + ds.name + "': series '" + std::string(to_string(s.label)) +
                              "' is misaligned with performance");
      const auto v = s.signed_values();
      rows.push_back({std::string(to_string(s.label)), ds.name, spearman(v, p), pearson(v, p), v.size()});
      if (std::find(order.begin(), order.end(), s.label) == order.end()) order.push_back(s.label);
    }
  }
  if (datasets.size() > 1) {
    for (Measure m : order) {
      std::vector<double> sp, pe;
      for (const auto& r : rows) {
        if (r.measure == to_string(m) && r.dataset != kFisherDataset) {
          sp.push_back(r.spearman);
          pe.push_back(r.pearson);
        }
      }
      rows.push_back({std::string(to_string(m)), std::string(kFisherDataset), fisher_z_average(sp, clamp_fisher),
                      fisher_z_average(pe, clamp_fisher), sp.size()});
    }
  }
  return rows;
}

inline void write_correlation_csv(std::ostream& out, std::span<const CorrelationRow> rows) {
  out << "measure,dataset,spearman,pearson\n";
  for (const auto& r : rows)
    csv::write_row(out, {r.measure, r.dataset, csv::format_real(r.spearman), csv::format_real(r.pearson)});
}

struct ScalingCurve {
  std::vector<std::size_t> sample_sizes;
  std::vector<double> per_size_mean;
  std::vector<double> per_size_stddev;  // sample stddev over trials; 0 when trials == 1
  std::size_t trials = 1;
  std::uint64_t seed = 0;
};

inline void write_scaling_csv(std::ostream& out, const ScalingCurve& c) {
  out << "size,mean,stddev,trials\n";
  for (std::size_t k = 0; k < c.sample_sizes.size(); ++k) {
    out << c.sample_sizes[k] << ',' << csv::format_real(c.per_size_mean[k]) << ','
        << csv::format_real(c.per_size_stddev[k]) << ',' << c.trials << '\n';
  }
}

/// Quality used to score a selected hypothesis: û when present, else ũ.
inline QualityVector selection_quality(const DecodingInstance& inst, const UtilityFunction& utility) {
  if (inst.human_scores) return inst.human();
  if (inst.gold_references && !inst.gold_references->empty()) {
    QualityVector q = row_mean(build_score_matrix(inst, utility, ReferenceSet::gold));
    q.kind = QualityKind::gold_mean;
    return q;
  }
  throw ValidationError("instance '" + inst.id + "': no human_scores or gold_refs to score selections");
}

struct ScalingOptions {
  std::vector<std::size_t> sizes{4, 8, 16, 32, 64};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// For each size s and trial t, subsamples s pseudo-references per instance
/// without replacement, runs MBR, and scores the selection. A trial's value
/// is the corpus mean; the curve reports mean and stddev across trials.
inline ScalingCurve scaling_harness(std::span<const DecodingInstance> instances, const UtilityFunction& utility,
                                    const ScalingOptions& opt) {
  if (instances.empty()) throw ValidationError("scaling harness: empty corpus");
  if (opt.sizes.empty()) throw ValidationError("scaling harness: no sample sizes");
  if (opt.trials < 1) throw ValidationError("scaling harness: trials must be >= 1");
  const std::size_t max_size = *std::max_element(opt.sizes.begin(), opt.sizes.end());
  for (std::size_t s : opt.sizes)
    if (s < 1) throw ValidationError("scaling harness: sample sizes must be >= 1");
  for (const auto& inst : instances) {
    inst.validate();
    if (inst.pseudo_references.size() < max_size)
      throw ValidationError("instance '" + inst.id + "': size " + std::to_string(max_size) + " exceeds " +
                            std::to_string(inst.pseudo_references.size()) + " available pseudo-references");
    if (!inst.human_scores && !(inst.gold_references && !inst.gold_references->empty()))
      throw ValidationError("instance '" + inst.id + "': no human_scores or gold_refs to score selections");
  }

  const std::size_t ns = opt.sizes.size();
  const std::size_t nt = opt.trials;
  // perf[(inst * ns + s) * nt + t]
  std::vector<double> perf(instances.size() * ns * nt);
  parallel_for(instances.size(), opt.threads, [&](std::size_t k) {
    const auto& inst = instances[k];
    const ScoreMatrix full = build_score_matrix(inst, utility, ReferenceSet::pseudo);
    const QualityVector quality = selection_quality(inst, utility);
    for (std::size_t si = 0; si < ns; ++si) {
      const std::size_t size = opt.sizes[si];
      for (std::size_t t = 0; t < nt; ++t) {
        auto rng = keyed_stream(opt.seed, inst.id, size, t);
        const auto cols = sample_without_replacement(rng, full.cols(), size);
        const auto r = mbr_decode(full.select_columns(cols));
        perf[(k * ns + si) * nt + t] = quality[r.selected_index];
      }
    }
  });

  ScalingCurve curve;
  curve.sample_sizes = opt.sizes;
  curve.trials = nt;
  curve.seed = opt.seed;
  for (std::size_t si = 0; si < ns; ++si) {
    std::vector<long double> trial_means(nt, 0);
    for (std::size_t t = 0; t < nt; ++t) {
      long double acc = 0;
      for (std::size_t k = 0; k < instances.size(); ++k) acc += perf[(k * ns + si) * nt + t];
      trial_means[t] = acc / static_cast<long double>(instances.size());
    }
    long double mean = 0;
    for (auto v : trial_means) mean += v;
    mean /= static_cast<long double>(nt);
    long double var = 0;
    for (auto v : trial_means) var += (v - mean) * (v - mean);
    var = nt > 1 ? var / static_cast<long double>(nt - 1) : 0;
    curve.per_size_mean.push_back(static_cast<double>(mean));
    curve.per_size_stddev.push_back(static_cast<double>(std::sqrt(var)));
  }
  return curve;
}

}  // namespace mbrdiv::analysis
