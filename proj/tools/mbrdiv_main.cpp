#include <iostream>
#include <map>
#include <string>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "mbrdiv/cli.hpp"

int main(int argc, char** argv) {
  using namespace mbrdiv::cli;
  CLI::App app{"MBR decoding, bias-diversity decomposition and information-theoretic checks"};

  RunConfig config;
  const std::map<std::string, Command> commands{{"decode", Command::decode},       {"decompose", Command::decompose},
                                                {"correlate", Command::correlate}, {"scale", Command::scale},
                                                {"info", Command::info}};
  const std::map<std::string, Metric> metrics{
      {"token_f1", Metric::token_f1}, {"chrf", Metric::chrf}, {"bleu", Metric::bleu}, {"tabular", Metric::tabular}};
  const std::map<std::string, WeightsMode> weights{{"uniform", WeightsMode::uniform},
                                                   {"from_instance", WeightsMode::from_instance},
                                                   {"importance", WeightsMode::importance}};

  std::string command, metric = "token_f1", weights_mode = "uniform";
  app.add_option("command", command, "decode | decompose | correlate | scale | info")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--input", config.input_path, "JSONL instances (CSV measures for correlate)");
  app.add_option("--output", config.output_path, "Output file; standard output when omitted");
  app.add_option("--metric", metric, "token_f1 | chrf | bleu | tabular")->check(CLI::IsMember(metrics));
  app.add_option("--tabular", config.tabular_path, "Score CSV for --metric tabular");
  app.add_option("--weights", weights_mode, "uniform | from_instance | importance")->check(CLI::IsMember(weights));
  app.add_option("--mambr-table", config.mambr_tables, "Score CSV for one ensemble metric (repeatable)")
      ->take_all();
  app.add_option("--sizes", config.sizes, "Pseudo-reference sample sizes, comma separated")->delimiter(',');
  app.add_option("--trials", config.trials, "Subsampling trials per size");
  app.add_option("--seed", config.seed, "RNG seed");
  app.add_option("--joint", config.joint_path, "Joint distribution JSON for info");
  app.add_option("--check", config.check, "identity | bounds | submodularity | monotonicity | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  config.command = commands.at(command);
  config.metric = metrics.at(metric);
  config.weights_mode = weights.at(weights_mode);
  return run(config);
}
