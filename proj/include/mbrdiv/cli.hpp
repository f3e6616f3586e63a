#pragma once

// Pipeline driver behind the mbrdiv command-line tool. Kept in the library so
// tests can run commands without spawning processes.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbrdiv/analysis.hpp"
#include "mbrdiv/core.hpp"
#include "mbrdiv/decode.hpp"
#include "mbrdiv/decomposition.hpp"
#include "mbrdiv/error.hpp"
#include "mbrdiv/infotheory.hpp"
#include "mbrdiv/io.hpp"
#include "mbrdiv/metrics.hpp"
#include "mbrdiv/parallel.hpp"

namespace mbrdiv::cli {

enum class Command { decode, decompose, correlate, scale, info };
enum class Metric { token_f1, chrf, bleu, tabular };
enum class WeightsMode { uniform, from_instance, importance };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

struct RunConfig {
  Command command = Command::decode;
  std::string input_path;
  std::string output_path;  // empty: standard output
  Metric metric = Metric::token_f1;
  std::string tabular_path;
  WeightsMode weights_mode = WeightsMode::uniform;
  std::vector<std::string> mambr_tables;
  std::vector<std::size_t> sizes{4, 8, 16, 32, 64};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string joint_path;
  std::string check = "all";
  std::size_t threads = 0;  // 0: hardware concurrency
};

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::decode: return "decode";
    case Command::decompose: return "decompose";
    case Command::correlate: return "correlate";
    case Command::scale: return "scale";
    case Command::info: return "info";
  }
  return "";
}

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::token_f1: return "token_f1";
    case Metric::chrf: return "chrf";
    case Metric::bleu: return "bleu";
    case Metric::tabular: return "tabular";
  }
  return "";
}

inline std::string_view to_string(WeightsMode w) {
  switch (w) {
    case WeightsMode::uniform: return "uniform";
    case WeightsMode::from_instance: return "from_instance";
    case WeightsMode::importance: return "importance";
  }
  return "";
}

inline void validate(const RunConfig& c) {
  if (c.metric == Metric::tabular && c.tabular_path.empty())
    throw ValidationError("--metric tabular requires --tabular <path>");
  if (c.command == Command::info) {
    if (c.joint_path.empty()) throw ValidationError("info requires --joint <path>");
    static const std::vector<std::string> checks{"all", "identity", "bounds", "submodularity", "monotonicity"};
    if (std::find(checks.begin(), checks.end(), c.check) == checks.end())
      throw ValidationError("--check must be one of all, identity, bounds, submodularity, monotonicity");
  } else if (c.input_path.empty()) {
    throw ValidationError(std::string(to_string(c.command)) + " requires --input <path>");
  }
  if (c.command == Command::scale) {
    if (c.sizes.empty()) throw ValidationError("--sizes must list at least one size");
    if (c.trials < 1) throw ValidationError("--trials must be >= 1");
  }
}

namespace detail {

constexpr std::size_t kChunk = 256;

inline std::size_t thread_count(const RunConfig& c) {
  if (c.threads) return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Utilities {
  std::optional<UtilityFunction> primary;
  std::vector<UtilityFunction> ensemble;  // from --mambr-table
};

inline Utilities load_utilities(const RunConfig& c) {
  Utilities u;
  switch (c.metric) {
    case Metric::token_f1: u.primary = metrics::token_f1_utility(); break;
    case Metric::chrf: u.primary = metrics::chrf_utility(); break;
    case Metric::bleu: u.primary = metrics::bleu_utility(); break;
    case Metric::tabular: u.primary = metrics::TabularUtility::read_csv_file(c.tabular_path).as_utility(); break;
  }
  for (const auto& path : c.mambr_tables)
    u.ensemble.push_back(metrics::TabularUtility::read_csv_file(path).as_utility(path));
  return u;
}

/// The matrix an instance is decoded with: the metric's, or the element-wise
/// mean over the ensemble tables when any are given.
inline ScoreMatrix decoding_matrix(const DecodingInstance& inst, const Utilities& u) {
  if (u.ensemble.empty()) return build_score_matrix(inst, *u.primary);
  std::vector<ScoreMatrix> ms;
  for (const auto& f : u.ensemble) ms.push_back(build_score_matrix(inst, f));
  return mean_matrix(ms);
}

inline DecodeResult decode_instance(const DecodingInstance& inst, const Utilities& u, WeightsMode mode) {
  const ScoreMatrix m = decoding_matrix(inst, u);
  switch (mode) {
    case WeightsMode::uniform: return mbr_decode(m);
    case WeightsMode::from_instance:
      if (!inst.sample_weights) throw ValidationError("--weights from_instance but no \"weights\"");
      return weighted_mbr(m, *inst.sample_weights);
    case WeightsMode::importance:
      if (!inst.target_probs || !inst.proposal_probs)
        throw ValidationError("--weights importance needs \"target_probs\" and \"proposal_probs\"");
      return weighted_mbr(m, importance_weights(*inst.target_probs, *inst.proposal_probs));
  }
  return mbr_decode(m);
}

/// Runs fn over the stream chunk by chunk, writing results in input order.
template <typename Fn, typename Sink>
void stream_instances(std::istream& in, std::size_t threads, Fn&& fn, Sink&& sink) {
  io::JsonlReader reader(in);
  std::vector<DecodingInstance> chunk;
  auto flush = [&] {
    using Result = decltype(fn(chunk.front()));
    std::vector<std::optional<Result>> out(chunk.size());
    parallel_for(chunk.size(), threads, [&](std::size_t k) {
      try {
        out[k] = fn(chunk[k]);
      } catch (const ValidationError& e) {
        throw ValidationError("instance '" + chunk[k].id + "': " + e.what());
      }
    });
    for (std::size_t k = 0; k < chunk.size(); ++k) sink(chunk[k], std::move(*out[k]));
    chunk.clear();
  };
  while (auto inst = reader.next()) {
    chunk.push_back(std::move(*inst));
    if (chunk.size() == kChunk) flush();
  }
  if (!chunk.empty()) flush();
}

inline nlohmann::json metadata(const RunConfig& c) {
  nlohmann::json j{{"command", to_string(c.command)}, {"seed", c.seed}};
  if (c.command == Command::decode || c.command == Command::decompose || c.command == Command::scale) {
    j["metric"] = to_string(c.metric);
    if (!c.mambr_tables.empty()) j["mambr_tables"] = c.mambr_tables;
  }
  if (c.command == Command::decode) j["weights"] = to_string(c.weights_mode);
  if (c.command == Command::scale) {
    j["sizes"] = c.sizes;
    j["trials"] = c.trials;
  }
  if (c.command == Command::info) j["check"] = c.check;
  return j;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input '" + path + "'");
  return in;
}

inline void run_decode(const RunConfig& c, std::istream& in, std::ostream& out) {
  const Utilities u = load_utilities(c);
  stream_instances(
      in, thread_count(c), [&](const DecodingInstance& inst) { return decode_instance(inst, u, c.weights_mode); },
      [&](const DecodingInstance& inst, DecodeResult r) {
        nlohmann::json j{{"id", inst.id},
                         {"selected_index", r.selected_index},
                         {"selected_text", inst.hypotheses[r.selected_index]},
                         {"selected_score", r.selected_score},
                         {"tie_count", r.tie_count}};
        out << j.dump() << '\n';
      });
}

inline void run_decompose(const RunConfig& c, std::istream& in, std::ostream& out, std::ostream* table) {
  const Utilities u = load_utilities(c);
  static const std::vector<std::string> fields{"mse", "bias", "diversity", "one_best_bias", "one_best_diversity",
                                               "one_best_mse"};
  if (table) {
    *table << "id,mse,bias,diversity,one_best_bias,one_best_diversity,one_best_mse,one_best_index,pseudo_bias,"
              "shared_bias,shared_diversity\n";
  }
  std::vector<long double> sums(fields.size(), 0);
  long double pseudo_sum = 0;
  std::size_t n = 0, n_pseudo = 0;
  stream_instances(
      in, thread_count(c),
      [&](const DecodingInstance& inst) {
        const ScoreMatrix m = decoding_matrix(inst, u);
        std::optional<ScoreMatrix> gold;
        if (inst.gold_references && !inst.gold_references->empty()) {
          if (u.ensemble.empty()) {
            gold = build_score_matrix(inst, *u.primary, ReferenceSet::gold);
          } else {
            std::vector<ScoreMatrix> gs;
            for (const auto& f : u.ensemble) gs.push_back(build_score_matrix(inst, f, ReferenceSet::gold));
            gold = mean_matrix(gs);
          }
        }
        return decompose(inst.human(), m, gold ? &*gold : nullptr);
      },
      [&](const DecodingInstance& inst, const DecompositionReport& r) {
        nlohmann::json j = io::to_json(r);
        j["id"] = inst.id;
        out << j.dump() << '\n';
        const double vals[] = {r.mse, r.bias, r.diversity, r.one_best_bias, r.one_best_diversity, r.one_best_mse};
        for (std::size_t k = 0; k < fields.size(); ++k) sums[k] += vals[k];
        if (r.pseudo_bias) {
          pseudo_sum += *r.pseudo_bias;
          ++n_pseudo;
        }
        ++n;
        if (table) {
          csv::Row row{inst.id};
          for (double v : vals) row.push_back(csv::format_real(v));
          row.push_back(std::to_string(r.one_best_index));
          row.push_back(r.pseudo_bias ? csv::format_real(*r.pseudo_bias) : std::string());
          row.push_back(csv::format_real(r.brown.shared_bias));
          row.push_back(csv::format_real(r.brown.shared_diversity));
          csv::write_row(*table, row);
        }
      });
  nlohmann::json corpus = nlohmann::json::object();
  for (std::size_t k = 0; k < fields.size(); ++k)
    corpus[fields[k]] = n ? static_cast<double>(sums[k] / static_cast<long double>(n)) : 0.0;
  corpus["pseudo_bias"] = n_pseudo ? nlohmann::json(static_cast<double>(pseudo_sum / n_pseudo)) : nlohmann::json();
  out << nlohmann::json{{"corpus", corpus}, {"instances", n}}.dump() << '\n';
}

/// CSV with a "dataset" column, one column per measure label and a
/// "performance" column; each row is one configuration.
inline std::vector<analysis::Dataset> read_measure_csv(std::istream& in) {
  csv::Row header;
  if (!csv::read_row(in, header)) throw ValidationError("correlate input is empty");
  std::optional<std::size_t> dataset_col;
  std::vector<std::pair<std::size_t, analysis::Measure>> cols;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "dataset") {
      dataset_col = k;
    } else if (auto m = analysis::parse_measure(header[k])) {
      cols.emplace_back(k, *m);
    } else {
      throw ValidationError("correlate input: unknown column '" + header[k] + "'");
    }
  }
  std::vector<analysis::Dataset> out;
  csv::Row row;
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (row.size() == 1 && row.front().empty()) continue;
    const std::string ctx = "correlate input line " + std::to_string(line);
    if (row.size() != header.size()) throw ValidationError(ctx + ": expected " + std::to_string(header.size()) + " fields");
    const std::string name = dataset_col ? row[*dataset_col] : std::string("all");
    auto it = std::find_if(out.begin(), out.end(), [&](const analysis::Dataset& d) { return d.name == name; });
    if (it == out.end()) {
      out.push_back({name, {}});
      it = std::prev(out.end());
      for (const auto& [k, m] : cols) it->series.emplace_back(m, std::vector<double>{});
    }
    for (std::size_t s = 0; s < cols.size(); ++s)
      it->series[s].values.push_back(csv::parse_real(row[cols[s].first], ctx));
  }
  return out;
}

inline void run_correlate(const RunConfig& c, std::istream& in, std::ostream& out) {
  (void)c;
  const auto datasets = read_measure_csv(in);
  const auto rows = analysis::correlation_report(datasets);
  analysis::write_correlation_csv(out, rows);
}

inline void run_scale(const RunConfig& c, std::istream& in, std::ostream& out) {
  const Utilities u = load_utilities(c);
  const auto instances = io::read_jsonl(in);
  analysis::ScalingOptions opt;
  opt.sizes = c.sizes;
  opt.trials = c.trials;
  opt.seed = c.seed;
  opt.threads = thread_count(c);
  const auto curve = analysis::scaling_harness(instances, *u.primary, opt);
  analysis::write_scaling_csv(out, curve);
}

inline void run_info(const RunConfig& c, std::ostream& out) {
  const nlohmann::json doc = io::parse_json_file(c.joint_path);
  nlohmann::json result{{"check", c.check}};
  const bool all = c.check == "all";

  if (doc.contains("steps")) {
    if (!all && c.check != "monotonicity")
      throw ValidationError("a \"steps\" joint file only supports --check monotonicity");
    std::vector<info::DiscreteJoint> steps;
    for (const auto& s : doc.at("steps")) steps.push_back(io::joint_from_json(s));
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& st : info::monotonicity_scan_growing(steps).steps)
      arr.push_back({{"report", io::to_json(st.report)}, {"delta", io::to_json(st.delta)}});
    result["monotonicity"] = {{"mode", "growing_target"}, {"steps", arr}};
    out << result.dump() << '\n';
    return;
  }

  const info::DiscreteJoint joint = io::joint_from_json(doc);
  const info::Subset full = info::all_vars(joint);
  if (all || c.check == "identity") {
    const auto r = info::decompose_mi(joint, full);
    result["identity"] = {{"report", io::to_json(r)}, {"residual", r.identity_residual()},
                          {"ok", r.identity_residual() <= 1e-9}};
  }
  if (all || c.check == "bounds") {
    const auto r = info::decompose_mi(joint, full);
    result["bounds"] = {{"lower", r.lower_bound}, {"upper", r.upper_bound}, {"bayes_error", r.bayes_error},
                        {"ok", r.lower_bound <= r.bayes_error + 1e-9 && r.bayes_error <= r.upper_bound + 1e-9}};
  }
  if (all || c.check == "submodularity") {
    const auto rep = info::submodularity_check(joint);
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : rep.violations) v.push_back(io::to_json(x));
    result["submodularity"] = {{"triples_checked", rep.triples_checked},
                               {"violation_count", rep.violations.size()},
                               {"violations", v}};
  }
  if (all || c.check == "monotonicity") {
    const auto scan = info::monotonicity_scan(joint, full);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& st : scan.steps)
      arr.push_back({{"subset", st.subset}, {"report", io::to_json(st.report)}, {"delta", io::to_json(st.delta)}});
    result["monotonicity"] = {{"mode", "fixed_target"}, {"steps", arr}, {"term_violations", scan.term_violations}};
  }
  out << result.dump() << '\n';
}

}  // namespace detail

/// Executes one command. Data goes to the output file (or `out`),
/// diagnostics to `err`. Returns 0, 1 (validation) or 2 (I/O).
inline int run(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    validate(config);
    std::ofstream file;
    std::ostream* sink = &out;
    if (!config.output_path.empty()) {
      file.open(config.output_path, std::ios::binary | std::ios::trunc);
      if (!file) throw IoError("cannot open output '" + config.output_path + "'");
      sink = &file;
    }
    const auto meta = detail::metadata(config);
    if (config.output_path.empty()) {
      err << meta.dump() << '\n';
    } else {
      std::ofstream m(config.output_path + ".meta.json", std::ios::binary | std::ios::trunc);
      if (!m) throw IoError("cannot write '" + config.output_path + ".meta.json'");
      m << meta.dump(2) << '\n';
    }

    if (config.command == Command::info) {
      detail::run_info(config, *sink);
    } else {
      std::ifstream in = detail::open_input(config.input_path);
      switch (config.command) {
        case Command::decode: detail::run_decode(config, in, *sink); break;
        case Command::decompose: {
          std::ofstream table;
          if (!config.output_path.empty()) {
            table.open(config.output_path + ".csv", std::ios::binary | std::ios::trunc);
            if (!table) throw IoError("cannot write '" + config.output_path + ".csv'");
          }
          detail::run_decompose(config, in, *sink, table.is_open() ? &table : nullptr);
          break;
        }
        case Command::correlate: detail::run_correlate(config, in, *sink); break;
        case Command::scale: detail::run_scale(config, in, *sink); break;
        case Command::info: break;
      }
    }
    sink->flush();
    if (!*sink) throw IoError("write failed");
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace mbrdiv::cli
