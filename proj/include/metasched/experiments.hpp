#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metasched/config.hpp"
#include "metasched/meta_loop.hpp"

namespace metasched {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitBadConfig = 2;

/// One loop instance on a fresh simulator built from the config's scenario.
RunLog run_simulation(const ExperimentConfig& config, SamplerKind sampler, std::uint64_t seed);

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency) and
/// rethrows the first exception after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct SamplerSummary {
  std::string sampler;
  std::vector<double> terminal_losses;  // one per seed, in seed order
  double mean_terminal_loss = 0.0;
  double std_terminal_loss = 0.0;       // sample standard deviation
  std::vector<double> mean_terminal_per_objective;
  double win_rate = 0.5;                // vs reference, ties count one half
};

struct ComparisonSummary {
  std::string reference;
  std::vector<std::uint64_t> seeds;
  std::vector<SamplerSummary> samplers;  // in config order
};

/// Runs every (sampler, seed) pair. logs[s][k] is sampler s on seeds[k].
std::vector<std::vector<RunLog>> run_grid(const ExperimentConfig& config);

/// Index into config.samplers of the reference sampler; throws ConfigError if
/// the reference is not among the samplers.
std::size_t reference_index(const ExperimentConfig& config, const std::string& reference);

/// Seeds are paired by position: logs[s][k] and logs[ref][k] share a seed.
ComparisonSummary summarize_comparison(const ExperimentConfig& config,
                                       const std::vector<std::vector<RunLog>>& logs,
                                       std::size_t ref);

nlohmann::ordered_json comparison_to_json(const ComparisonSummary& summary);

/// Seed-averaged, smoothed reward difference of sampler s against ref.
struct RewardDiff {
  std::vector<double> raw;
  std::vector<double> smoothed;
};
RewardDiff reward_difference(const std::vector<std::vector<RunLog>>& logs, std::size_t s,
                             std::size_t ref, std::size_t window);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

struct CompareOptions {
  std::optional<std::string> reference;
  std::optional<std::filesystem::path> out;
};

struct SweepOptions {
  std::vector<double> lambdas;
  std::vector<std::size_t> meta_lengths;
  std::optional<std::string> reference;
  std::optional<std::filesystem::path> out;
};

/// `run`: first configured sampler, first seed (or --seed). Writes
/// runlog.jsonl, weights.csv, frequencies.csv, summary.json and
/// metadata.json (timings only).
int cmd_run(const std::filesystem::path& config_path, const RunOptions& options);

/// `compare`: every sampler on every seed. Writes runs/*.runlog.jsonl,
/// comparison.json, reward_diff.csv (plus one reward_diff_<i>_<name>.csv per
/// non-reference sampler) and metadata.json.
int cmd_compare(const std::filesystem::path& config_path, const CompareOptions& options);

/// `sweep`: a compare per (lambda, meta_length) cell under
/// cell_lambda<x>_K<k>/, plus grid_summary.csv. total_steps is held fixed.
int cmd_sweep(const std::filesystem::path& config_path, const SweepOptions& options);

}  // namespace metasched
