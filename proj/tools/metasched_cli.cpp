// Command-line front end: run, compare and sweep simulated meta-sampling
// experiments.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metasched/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Learned objective sampling for multi-objective training"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string reference;
  std::vector<double> lambdas;
  std::vector<std::size_t> meta_lengths;

  auto* run = app.add_subcommand("run", "Run one sampler on one seed");
  run->add_option("--config", config_path, "Experiment config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the seed");
  run->add_option("--out", out_dir, "Output directory");

  auto* compare = app.add_subcommand("compare", "Compare samplers over paired seeds");
  compare->add_option("--config", config_path, "Experiment config file")->required();
  compare->add_option("--ref", reference, "Reference sampler for win rates");
  compare->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Compare over a lambda x meta-length grid");
  sweep->add_option("--config", config_path, "Experiment config file")->required();
  sweep->add_option("--lambda", lambdas, "Entropy temperatures")->delimiter(',');
  sweep->add_option("--meta-length", meta_lengths, "Meta lengths")->delimiter(',');
  sweep->add_option("--ref", reference, "Reference sampler for win rates");
  sweep->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : metasched::kExitBadConfig;
  }

  std::optional<std::filesystem::path> out;
  if (!out_dir.empty()) out = out_dir;
  std::optional<std::string> ref;
  if (!reference.empty()) ref = reference;

  if (run->parsed()) {
    metasched::RunOptions options;
    if (seed_opt->count() > 0) options.seed = seed;
    options.out = out;
    return metasched::cmd_run(config_path, options);
  }
  if (compare->parsed()) {
    return metasched::cmd_compare(config_path, {ref, out});
  }
  return metasched::cmd_sweep(config_path, {lambdas, meta_lengths, ref, out});
}
