#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "metasched/meta_loop.hpp"
#include "metasched/sim_env.hpp"

namespace metasched {

/// Environment variable that replaces the configured seed list with one seed.
inline constexpr const char* kSeedEnvVar = "META_SCHED_SEED";

/// A parsed experiment document. See docs/config.md for the grammar.
struct ExperimentConfig {
  std::string scenario_ref;  // preset name or scenario file path as written
  sim::Scenario scenario;
  MetaConfig meta;  // sampler and seed are per-run and filled in later
  std::vector<std::uint64_t> seeds;
  std::vector<SamplerKind> samplers;
  std::filesystem::path output_dir = "out";
  std::size_t smoothing_window = 9;
  std::string reference = "uniform";
  std::size_t eval_batches = 1;
  std::size_t threads = 0;  // 0: one per hardware thread

  /// MetaConfig for one (sampler, seed) run.
  MetaConfig run_config(SamplerKind sampler, std::uint64_t seed) const;

  /// Effective settings as a JSON object (sampler/seed lists included).
  nlohmann::ordered_json echo() const;
};

/// Parses a config document. A relative scenario file path is resolved
/// against base_dir; output_dir is used as written. Throws ConfigError naming the bad key.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir);

/// Reads and parses a config file, then applies the META_SCHED_SEED override.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Scenario document: {"objectives": [{l0, floor, noise_sigma,
/// eval_noise_sigma}, ...], "transfer": [m*m numbers, row-major]}. The
/// transfer matrix may also be given as m rows of m numbers.
sim::Scenario scenario_from_json(const nlohmann::json& doc, std::string name);
nlohmann::ordered_json scenario_to_json(const sim::Scenario& scenario);

/// A preset name, or else a path to a scenario file.
sim::Scenario resolve_scenario(const std::string& ref, const std::filesystem::path& base_dir);

}  // namespace metasched
