// biaslab command line: sampling-bias laboratory for credit scoring.
//
//   biaslab <mode> --config <file> [--seed N] [--out DIR] [--trials N]
//
// Exit codes: 0 success, 1 config error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biaslab/common.hpp"
#include "biaslab/config.hpp"
#include "biaslab/experiments.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string mode;
  long long seed = -1;
  std::string out_dir;
  long long trials = -1;
};

int run(const CliOptions& cli) {
  std::ifstream in(cli.config_path);
  if (!in) {
    std::fprintf(stderr, "biaslab: cannot open config '%s'\n", cli.config_path.c_str());
    return 1;
  }
  std::stringstream ss;
  ss << in.rdbuf();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "biaslab: config parse error: %s\n", e.what());
    return 1;
  }
  j["mode"] = cli.mode;
  if (cli.seed >= 0) j["seed"] = static_cast<std::uint64_t>(cli.seed);
  if (cli.trials >= 0) j["trials"] = static_cast<std::uint64_t>(cli.trials);
  if (!cli.out_dir.empty()) j["output_dir"] = cli.out_dir;

  try {
    const biaslab::RunConfig cfg = biaslab::RunConfig::from_json_text(j.dump());
    biaslab::run_mode(cfg);
  } catch (const biaslab::ConfigError& e) {
    std::fprintf(stderr, "biaslab: config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "biaslab: runtime failure: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biaslab: sampling-bias laboratory for credit scorecards"};
  app.require_subcommand(1);

  CliOptions cli;
  static constexpr const char* modes[] = {"simulate",    "experiment1", "experiment2",
                                          "sensitivity", "impact",      "basl-train",
                                          "evaluate"};
  const char* help[] = {
      "run the acceptance loop and emit its trace",
      "evaluation-strategy comparison (RMSE vs truth)",
      "training-method comparison on the labeled holdout",
      "sensitivity sweep over a simulation axis",
      "business impact and acceptance-rate policy analysis",
      "fit a scorecard with bias-aware self-learning",
      "evaluate a saved scorecard on a CSV dataset"};
  for (std::size_t i = 0; i < std::size(modes); ++i) {
    auto* sub = app.add_subcommand(modes[i], help[i]);
    sub->add_option("--config", cli.config_path, "JSON run configuration")->required();
    sub->add_option("--seed", cli.seed, "override the config seed");
    sub->add_option("--out", cli.out_dir, "override the output directory");
    sub->add_option("--trials", cli.trials, "override the trial count");
    sub->callback([&cli, i] { cli.mode = modes[i]; });
  }

  CLI11_PARSE(app, argc, argv);
  return run(cli);
}
