#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace mbrdiv {

struct Interval {
  double lo;
  double hi;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// One cell of a score matrix as seen by a utility: both strings plus their
/// positions, so index-keyed external tables can be served through the same
/// contract as string metrics.
struct CellRef {
  std::string_view hypothesis = {};
  std::string_view reference = {};
  std::size_t hyp_index = 0;
  std::size_t ref_index = 0;
  std::string_view instance_id = {};
};

/// f(h, y). Must be pure and deterministic; build_score_matrix relies on it.
class UtilityFunction {
 public:
  using ScoreFn = std::function<double(const CellRef&)>;

  UtilityFunction(std::string name, ScoreFn fn, std::optional<Interval> range = std::nullopt)
      : name_(std::move(name)), fn_(std::move(fn)), range_(range) {}

  /// Wraps a plain string metric; indices are ignored.
  template <typename F>
    requires std::is_invocable_r_v<double, F, std::string_view, std::string_view>
  static UtilityFunction from_strings(std::string name, F f,
                                      std::optional<Interval> range = std::nullopt) {
    return UtilityFunction(
        std::move(name), [f = std::move(f)](const CellRef& c) { return f(c.hypothesis, c.reference); },
        range);
  }

  double operator()(const CellRef& cell) const { return fn_(cell); }
  double operator()(std::string_view h, std::string_view r) const { return fn_(CellRef{h, r}); }

  const std::string& name() const noexcept { return name_; }
  const std::optional<Interval>& declared_range() const noexcept { return range_; }

 private:
  std::string name_;
  ScoreFn fn_;
  std::optional<Interval> range_;
};

}  // namespace mbrdiv
