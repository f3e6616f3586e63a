#pragma once

// Built-in lexical utilities and the adapter for externally computed scores.
// All tokenization is whitespace-based; nothing here depends on a model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "mbrdiv/csv.hpp"
#include "mbrdiv/error.hpp"
#include "mbrdiv/utility.hpp"

namespace mbrdiv::metrics {

namespace detail {

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0x85 || c == 0xA0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029;
}

/// Decodes UTF-8; malformed bytes map to themselves so every input is total.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    int len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(b);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b : b & (0xFF >> (len + 1));
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto cb = static_cast<unsigned char>(s[i + k]);
      if ((cb >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cb & 0x3F);
    }
    if (!ok) {
      out.push_back(b);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
  while (i < s.size()) {
    while (i < s.size() && ws(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !ws(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Seq>
using NgramCounts = std::map<Seq, std::size_t>;

template <typename Seq, typename Range>
NgramCounts<Seq> count_ngrams(const Range& items, std::size_t n) {
  NgramCounts<Seq> counts;
  if (items.size() < n) return counts;
  for (std::size_t i = 0; i + n <= items.size(); ++i) {
    ++counts[Seq(items.begin() + static_cast<std::ptrdiff_t>(i),
                 items.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

/// Multiset intersection size (clipped counts).
template <typename Counts>
std::size_t clipped_matches(const Counts& hyp, const Counts& ref) {
  std::size_t m = 0;
  for (const auto& [gram, c] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

}  // namespace detail

/// F1 of the whitespace-token multiset overlap. Both empty: 1; one empty: 0.
inline double token_f1(std::string_view h, std::string_view r) {
  const auto ht = detail::split_ws(h);
  const auto rt = detail::split_ws(r);
  if (ht.empty() && rt.empty()) return 1.0;
  if (ht.empty() || rt.empty()) return 0.0;
  const auto hc = detail::count_ngrams<std::vector<std::string_view>>(ht, 1);
  const auto rc = detail::count_ngrams<std::vector<std::string_view>>(rt, 1);
  const auto overlap = static_cast<double>(detail::clipped_matches(hc, rc));
  if (overlap == 0) return 0.0;
  const double p = overlap / static_cast<double>(ht.size());
  const double rec = overlap / static_cast<double>(rt.size());
  return 2 * p * rec / (p + rec);
}

/// Character n-gram F-score (chrF without the word n-gram extension of chrF++),
/// on a 0..100 scale. Whitespace is removed before extracting n-grams.
///
/// Orders for which neither string has an n-gram are skipped; an order where
/// only one side has n-grams scores 0. No n-grams at any order gives 0.
inline double chrf(std::string_view h, std::string_view r, std::size_t max_n = 6, double beta = 2.0) {
  if (max_n < 1) throw ValidationError("chrf: max_n must be >= 1");
  if (!(beta > 0)) throw ValidationError("chrf: beta must be > 0");
  auto strip = [](std::string_view s) {
    std::u32string out;
    for (char32_t c : detail::decode_utf8(s))
      if (!detail::is_space(c)) out.push_back(c);
    return out;
  };
  const std::u32string hc = strip(h);
  const std::u32string rc = strip(r);
  const double b2 = beta * beta;
  double sum = 0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const bool h_has = hc.size() >= n;
    const bool r_has = rc.size() >= n;
    if (!h_has && !r_has) continue;
    ++orders;
    if (!h_has || !r_has) continue;
    const auto hg = detail::count_ngrams<std::u32string>(hc, n);
    const auto rg = detail::count_ngrams<std::u32string>(rc, n);
    const auto m = static_cast<double>(detail::clipped_matches(hg, rg));
    if (m == 0) continue;
    const double p = m / static_cast<double>(hc.size() - n + 1);
    const double rec = m / static_cast<double>(rc.size() - n + 1);
    sum += (1 + b2) * p * rec / (b2 * p + rec);
  }
  if (orders == 0) return 0.0;
  return 100.0 * sum / static_cast<double>(orders);
}

/// Sentence BLEU over whitespace tokens, in [0, 1].
///
/// Unigram precision is unsmoothed; orders n > 1 use add-one smoothing
/// (m + 1) / (c + 1). Brevity penalty exp(min(0, 1 - |r|/|h|)). An empty
/// hypothesis scores 0.
inline double sentence_bleu(std::string_view h, std::string_view r, std::size_t max_n = 4) {
  if (max_n < 1) throw ValidationError("sentence_bleu: max_n must be >= 1");
  const auto ht = detail::split_ws(h);
  const auto rt = detail::split_ws(r);
  if (ht.empty()) return 0.0;
  double log_sum = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto hg = detail::count_ngrams<std::vector<std::string_view>>(ht, n);
    const auto rg = detail::count_ngrams<std::vector<std::string_view>>(rt, n);
    const auto m = static_cast<double>(detail::clipped_matches(hg, rg));
    const double c = ht.size() >= n ? static_cast<double>(ht.size() - n + 1) : 0.0;
    const double p = n == 1 ? m / c : (m + 1) / (c + 1);
    if (p == 0) return 0.0;
    log_sum += std::log(p);
  }
  const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(rt.size()) / static_cast<double>(ht.size())));
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

inline UtilityFunction token_f1_utility() {
  return UtilityFunction::from_strings("token_f1", token_f1, Interval{0.0, 1.0});
}

inline UtilityFunction chrf_utility(std::size_t max_n = 6, double beta = 2.0) {
  return UtilityFunction::from_strings(
      "chrf", [max_n, beta](std::string_view h, std::string_view r) { return chrf(h, r, max_n, beta); },
      Interval{0.0, 100.0});
}

inline UtilityFunction bleu_utility(std::size_t max_n = 4) {
  return UtilityFunction::from_strings(
      "bleu", [max_n](std::string_view h, std::string_view r) { return sentence_bleu(h, r, max_n); },
      Interval{0.0, 1.0});
}

/// Externally computed scores (COMET, BERTScore, ...) keyed by hypothesis and
/// reference, either by exact string or by index. Tables may be scoped per
/// instance id; an unscoped table answers for every instance.
class TabularUtility {
 public:
  enum class LookupMode { by_index, by_string };

  explicit TabularUtility(LookupMode mode, bool scoped_by_id = false) : mode_(mode), scoped_(scoped_by_id) {}

  LookupMode mode() const noexcept { return mode_; }
  bool scoped_by_id() const noexcept { return scoped_; }
  std::size_t size() const noexcept { return table_.size(); }

  void insert(std::string id, std::string hyp, std::string ref, double score) {
    if (!std::isfinite(score)) throw ValidationError("tabular score must be finite");
    table_[Key{scoped_ ? std::move(id) : std::string(), std::move(hyp), std::move(ref)}] = score;
  }
  void insert(std::string id, std::size_t hyp, std::size_t ref, double score) {
    insert(std::move(id), std::to_string(hyp), std::to_string(ref), score);
  }

  double lookup(const CellRef& cell) const {
    Key key{scoped_ ? std::string(cell.instance_id) : std::string(),
            mode_ == LookupMode::by_index ? std::to_string(cell.hyp_index) : std::string(cell.hypothesis),
            mode_ == LookupMode::by_index ? std::to_string(cell.ref_index) : std::string(cell.reference)};
    auto it = table_.find(key);
    if (it == table_.end()) {
      std::string msg = "score not found for (" + key.hyp + ", " + key.ref + ")";
      if (scoped_) msg += " in instance '" + key.id + "'";
      throw ScoreNotFoundError(msg);
    }
    return it->second;
  }

  UtilityFunction as_utility(std::string name = "tabular") const {
    auto self = std::make_shared<const TabularUtility>(*this);
    return UtilityFunction(std::move(name), [self](const CellRef& c) { return self->lookup(c); });
  }

  /// Header "hyp,ref,score" or "hyp_index,ref_index,score", optionally
  /// preceded by an "id" column.
  static TabularUtility read_csv(std::istream& in) {
    csv::Row row;
    if (!csv::read_row(in, row)) throw ValidationError("tabular CSV is empty");
    bool scoped = !row.empty() && row.front() == "id";
    std::vector<std::string> cols(row.begin() + (scoped ? 1 : 0), row.end());
    LookupMode mode;
    if (cols == std::vector<std::string>{"hyp", "ref", "score"}) {
      mode = LookupMode::by_string;
    } else if (cols == std::vector<std::string>{"hyp_index", "ref_index", "score"}) {
      mode = LookupMode::by_index;
    } else {
      throw ValidationError("tabular CSV header must be hyp,ref,score or hyp_index,ref_index,score");
    }
    TabularUtility t(mode, scoped);
    std::size_t line = 1;
    const std::size_t width = scoped ? 4 : 3;
    while (csv::read_row(in, row)) {
      ++line;
      if (row.size() == 1 && row.front().empty()) continue;
      const std::string ctx = "tabular CSV line " + std::to_string(line);
      if (row.size() != width) throw ValidationError(ctx + ": expected " + std::to_string(width) + " fields");
      const std::size_t o = scoped ? 1 : 0;
      std::string id = scoped ? row[0] : std::string();
      const double score = csv::parse_real(row[o + 2], ctx);
      if (mode == LookupMode::by_index) {
        t.insert(std::move(id), csv::parse_index(row[o], ctx), csv::parse_index(row[o + 1], ctx), score);
      } else {
        t.insert(std::move(id), row[o], row[o + 1], score);
      }
    }
    return t;
  }

  static TabularUtility read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tabular file '" + path + "'");
    return read_csv(in);
  }

  void write_csv(std::ostream& out) const {
    csv::Row header;
    if (scoped_) header.push_back("id");
    if (mode_ == LookupMode::by_index) {
      header.insert(header.end(), {"hyp_index", "ref_index", "score"});
    } else {
      header.insert(header.end(), {"hyp", "ref", "score"});
    }
    csv::write_row(out, header);
    for (const auto& [key, score] : table_) {
      csv::Row r;
      if (scoped_) r.push_back(key.id);
      r.insert(r.end(), {key.hyp, key.ref, csv::format_real(score)});
      csv::write_row(out, r);
    }
  }

 private:
  struct Key {
    std::string id;
    std::string hyp;
    std::string ref;
    auto operator<=>(const Key&) const = default;
  };

  LookupMode mode_;
  bool scoped_;
  std::map<Key, double> table_;
};

inline double tabular_lookup(const TabularUtility& t, const CellRef& cell) { return t.lookup(cell); }

}  // namespace mbrdiv::metrics
