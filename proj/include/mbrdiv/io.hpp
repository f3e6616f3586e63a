#pragma once

// File formats: JSONL instances, score-matrix CSV, joint-distribution JSON.

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbrdiv/core.hpp"
#include "mbrdiv/csv.hpp"
#include "mbrdiv/decomposition.hpp"
#include "mbrdiv/error.hpp"
#include "mbrdiv/infotheory.hpp"

namespace mbrdiv::io {

using nlohmann::json;

namespace detail {

template <typename T>
std::vector<T> array_of(const json& j, const char* key, const std::string& ctx) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ValidationError(ctx + ": \"" + key + "\" must be an array");
  std::vector<T> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!e.is_string()) throw ValidationError(ctx + ": \"" + key + "\" must hold strings");
      out.push_back(e.get<std::string>());
    } else {
      if (!e.is_number()) throw ValidationError(ctx + ": \"" + key + "\" must hold numbers");
      out.push_back(e.get<T>());
    }
  }
  return out;
}

template <typename T>
std::optional<std::vector<T>> optional_array(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return array_of<T>(j, key, ctx);
}

}  // namespace detail

/// Keys: "id", "hypotheses", "pseudo_refs"; optional "gold_refs",
/// "human_scores", "weights", "target_probs", "proposal_probs".
inline DecodingInstance instance_from_json(const json& j, const std::string& ctx = "instance") {
  if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
  DecodingInstance inst;
  if (!j.contains("id")) throw ValidationError(ctx + ": missing \"id\"");
  const auto& id = j.at("id");
  if (id.is_string()) {
    inst.id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    inst.id = std::to_string(id.get<long long>());
  } else {
    throw ValidationError(ctx + ": \"id\" must be a string or integer");
  }
  const std::string where = ctx + " (id '" + inst.id + "')";
  for (const char* key : {"hypotheses", "pseudo_refs"})
    if (!j.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
  inst.hypotheses = detail::array_of<std::string>(j, "hypotheses", where);
  inst.pseudo_references = detail::array_of<std::string>(j, "pseudo_refs", where);
  inst.gold_references = detail::optional_array<std::string>(j, "gold_refs", where);
  inst.human_scores = detail::optional_array<double>(j, "human_scores", where);
  inst.sample_weights = detail::optional_array<double>(j, "weights", where);
  inst.target_probs = detail::optional_array<double>(j, "target_probs", where);
  inst.proposal_probs = detail::optional_array<double>(j, "proposal_probs", where);
  inst.validate();
  return inst;
}

inline json instance_to_json(const DecodingInstance& inst) {
  json j{{"id", inst.id}, {"hypotheses", inst.hypotheses}, {"pseudo_refs", inst.pseudo_references}};
  if (inst.gold_references) j["gold_refs"] = *inst.gold_references;
  if (inst.human_scores) j["human_scores"] = *inst.human_scores;
  if (inst.sample_weights) j["weights"] = *inst.sample_weights;
  if (inst.target_probs) j["target_probs"] = *inst.target_probs;
  if (inst.proposal_probs) j["proposal_probs"] = *inst.proposal_probs;
  return j;
}

/// Streams instances one line at a time; blank lines are skipped. Errors
/// name the 1-based line number.
class JsonlReader {
 public:
  explicit JsonlReader(std::istream& in) : in_(in) {}

  std::optional<DecodingInstance> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string ctx = "line " + std::to_string(line_no_);
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON on " + ctx + ": " + e.what());
      }
      try {
        return instance_from_json(j, ctx);
      } catch (const json::exception& e) {
        throw ValidationError(ctx + ": " + e.what());
      }
    }
    return std::nullopt;
  }

  std::size_t line_number() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline std::vector<DecodingInstance> read_jsonl(std::istream& in) {
  JsonlReader r(in);
  std::vector<DecodingInstance> out;
  while (auto inst = r.next()) out.push_back(std::move(*inst));
  return out;
}

inline std::vector<DecodingInstance> read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_jsonl(in);
}

inline void write_jsonl(std::ostream& out, const std::vector<DecodingInstance>& instances) {
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Score matrices

/// Dense: one hypothesis per row, no header. Sparse: header
/// "hyp_index,ref_index,score" and every cell listed exactly once.
inline ScoreMatrix read_matrix_csv(std::istream& in) {
  csv::Row row;
  std::vector<csv::Row> rows;
  while (csv::read_row(in, row)) {
    if (row.size() == 1 && row.front().empty()) continue;
    rows.push_back(row);
  }
  if (rows.empty()) throw ValidationError("score matrix CSV is empty");
  if (rows.front() == csv::Row{"hyp_index", "ref_index", "score"}) {
    std::size_t nr = 0, nc = 0;
    struct Cell {
      std::size_t i, j;
      double v;
    };
    std::vector<Cell> cells;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const std::string ctx = "matrix CSV line " + std::to_string(k + 1);
      if (rows[k].size() != 3) throw ValidationError(ctx + ": expected 3 fields");
      Cell c{csv::parse_index(rows[k][0], ctx), csv::parse_index(rows[k][1], ctx), csv::parse_real(rows[k][2], ctx)};
      nr = std::max(nr, c.i + 1);
      nc = std::max(nc, c.j + 1);
      cells.push_back(c);
    }
    if (cells.empty()) throw ValidationError("sparse score matrix CSV has no cells");
    std::vector<double> values(nr * nc, 0);
    std::vector<bool> seen(nr * nc, false);
    for (const auto& c : cells) {
      const std::size_t at = c.i * nc + c.j;
      if (seen[at])
        throw ValidationError("duplicate cell (" + std::to_string(c.i) + "," + std::to_string(c.j) + ")");
      seen[at] = true;
      values[at] = c.v;
    }
    for (std::size_t at = 0; at < seen.size(); ++at)
      if (!seen[at])
        throw ValidationError("missing cell (" + std::to_string(at / nc) + "," + std::to_string(at % nc) + ")");
    return ScoreMatrix(nr, nc, std::move(values));
  }
  std::vector<std::vector<double>> dense;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string ctx = "matrix CSV line " + std::to_string(k + 1);
    std::vector<double> r;
    for (const auto& f : rows[k]) r.push_back(csv::parse_real(f, ctx));
    dense.push_back(std::move(r));
  }
  return ScoreMatrix::from_rows(dense);
}

inline void write_matrix_csv(std::ostream& out, const ScoreMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv::format_real(m(i, j));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Joint distributions

/// {"alphabet_sizes": [...], "target_size": K, "pmf": [...]} with x_1 slowest
/// and ĥ fastest, or {"prior": [...], "conditionals": [[[p(x|ĥ) ...] per ĥ] per variable]}.
inline info::DiscreteJoint joint_from_json(const json& j) {
  try {
    if (j.contains("prior")) {
      const auto prior = j.at("prior").get<std::vector<double>>();
      const auto cond = j.at("conditionals").get<std::vector<std::vector<std::vector<double>>>>();
      return info::make_ci_joint(prior, cond);
    }
    return info::DiscreteJoint(j.at("alphabet_sizes").get<std::vector<std::size_t>>(),
                               j.at("target_size").get<std::size_t>(), j.at("pmf").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("joint JSON: ") + e.what());
  }
}

inline json joint_to_json(const info::DiscreteJoint& j) {
  return json{{"alphabet_sizes", j.alphabet_sizes()},
              {"target_size", j.target_size()},
              {"pmf", std::vector<double>(j.pmf().begin(), j.pmf().end())}};
}

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const BrownTerms& b) {
  return json{{"bias_bar", b.bias_bar},   {"var_bar", b.var_bar},         {"cov_bar", b.cov_bar},
              {"cov_defined", b.cov_defined}, {"omega", b.omega},          {"shared_bias", b.shared_bias},
              {"shared_diversity", b.shared_diversity}};
}

inline json to_json(const DecompositionReport& r) {
  json j{{"mse", r.mse},
         {"bias", r.bias},
         {"diversity", r.diversity},
         {"one_best_bias", r.one_best_bias},
         {"one_best_diversity", r.one_best_diversity},
         {"one_best_mse", r.one_best_mse},
         {"one_best_index", r.one_best_index},
         {"brown", to_json(r.brown)}};
  j["pseudo_bias"] = r.pseudo_bias ? json(*r.pseudo_bias) : json(nullptr);
  return j;
}

inline json to_json(const info::ITReport& r) {
  return json{{"h_target", r.h_target},
              {"mi", r.mi},
              {"relevancy", r.relevancy},
              {"cond_redundancy", r.cond_redundancy},
              {"redundancy", r.redundancy},
              {"it_diversity", r.it_diversity},
              {"lower_bound", r.lower_bound},
              {"upper_bound", r.upper_bound},
              {"bayes_error", r.bayes_error}};
}

inline json to_json(const info::ITDeltas& d) {
  return json{{"relevancy", d.relevancy}, {"redundancy", d.redundancy}, {"cond_redundancy", d.cond_redundancy},
              {"it_diversity", d.it_diversity}, {"mi", d.mi}, {"lower_bound", d.lower_bound},
              {"upper_bound", d.upper_bound}};
}

inline json to_json(const info::Violation& v) {
  return json{{"function", v.function}, {"property", v.property}, {"S", v.smaller}, {"T", v.larger},
              {"a", v.added}, {"gain_S", v.gain_smaller}, {"gain_T", v.gain_larger}};
}

}  // namespace mbrdiv::io
