#include "metasched/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "metasched/errors.hpp"
#include "metasched/runlog_io.hpp"
#include "metasched/sim_env.hpp"

namespace metasched {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

RunLog run_simulation(const ExperimentConfig& config, SamplerKind sampler, std::uint64_t seed) {
  sim::SimEnvironment env(config.scenario, config.eval_batches);
  return run_pretraining(env, config.run_config(sampler, seed));
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::vector<RunLog>> run_grid(const ExperimentConfig& config) {
  const std::size_t ns = config.samplers.size();
  const std::size_t nk = config.seeds.size();
  std::vector<std::vector<RunLog>> logs(ns, std::vector<RunLog>(nk));
  parallel_for(ns * nk, config.threads, [&](std::size_t job) {
    const std::size_t s = job / nk;
    const std::size_t k = job % nk;
    logs[s][k] = run_simulation(config, config.samplers[s], config.seeds[k]);
  });
  return logs;
}

std::size_t reference_index(const ExperimentConfig& config, const std::string& reference) {
  const auto kind = parse_sampler_kind(reference);
  if (!kind) throw ConfigError("reference", fmt::format("unknown reference sampler '{}'", reference));
  const auto it = std::find(config.samplers.begin(), config.samplers.end(), *kind);
  if (it == config.samplers.end()) {
    throw ConfigError("reference",
                      fmt::format("reference sampler '{}' is not among the samplers", reference));
  }
  return static_cast<std::size_t>(it - config.samplers.begin());
}

ComparisonSummary summarize_comparison(const ExperimentConfig& config,
                                       const std::vector<std::vector<RunLog>>& logs,
                                       std::size_t ref) {
  ComparisonSummary summary;
  summary.reference = std::string(to_string(config.samplers.at(ref)));
  summary.seeds = config.seeds;
  const std::size_t nk = config.seeds.size();
  const std::size_t m = config.scenario.size();

  std::vector<double> ref_losses(nk);
  for (std::size_t k = 0; k < nk; ++k) ref_losses[k] = terminal_summed_loss(logs[ref][k]);

  for (std::size_t s = 0; s < logs.size(); ++s) {
    SamplerSummary entry;
    entry.sampler = std::string(to_string(config.samplers[s]));
    entry.mean_terminal_per_objective.assign(m, 0.0);
    double wins = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      const RunLog& log = logs[s][k];
      const double loss = terminal_summed_loss(log);
      entry.terminal_losses.push_back(loss);
      const auto& terminal = log.records.empty() ? log.initial_losses : log.records.back().losses;
      for (std::size_t i = 0; i < m; ++i) entry.mean_terminal_per_objective[i] += terminal[i];
      if (loss < ref_losses[k]) {
        wins += 1.0;
      } else if (loss == ref_losses[k]) {
        wins += 0.5;
      }
    }
    const auto n = static_cast<double>(nk);
    for (double& x : entry.mean_terminal_per_objective) x /= n;
    for (const double x : entry.terminal_losses) entry.mean_terminal_loss += x;
    entry.mean_terminal_loss /= n;
    if (nk > 1) {
      double var = 0.0;
      for (const double x : entry.terminal_losses) {
        var += (x - entry.mean_terminal_loss) * (x - entry.mean_terminal_loss);
      }
      entry.std_terminal_loss = std::sqrt(var / (n - 1.0));
    }
    entry.win_rate = wins / n;
    summary.samplers.push_back(std::move(entry));
  }
  return summary;
}

ordered_json comparison_to_json(const ComparisonSummary& summary) {
  ordered_json j;
  j["reference"] = summary.reference;
  j["seeds"] = summary.seeds;
  ordered_json entries = ordered_json::array();
  for (const auto& s : summary.samplers) {
    ordered_json e;
    e["sampler"] = s.sampler;
    e["mean_terminal_summed_loss"] = s.mean_terminal_loss;
    e["std_terminal_summed_loss"] = s.std_terminal_loss;
    e["mean_terminal_losses"] = s.mean_terminal_per_objective;
    e["win_rate_vs_reference"] = s.win_rate;
    e["terminal_summed_losses"] = s.terminal_losses;
    entries.push_back(std::move(e));
  }
  j["samplers"] = entries;
  return j;
}

RewardDiff reward_difference(const std::vector<std::vector<RunLog>>& logs, std::size_t s,
                             std::size_t ref, std::size_t window) {
  RewardDiff diff;
  const std::size_t nk = logs.at(s).size();
  for (std::size_t k = 0; k < nk; ++k) {
    const auto series = reward_difference_series(logs[s][k], logs.at(ref)[k]);
    if (diff.raw.empty()) diff.raw.assign(series.size(), 0.0);
    for (std::size_t c = 0; c < series.size(); ++c) diff.raw[c] += series[c];
  }
  for (double& x : diff.raw) x /= static_cast<double>(nk);
  diff.smoothed = moving_average(diff.raw, window);
  return diff;
}

namespace {

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  writer(out);
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json run_timing(const RunLog& log) {
  double meta_test = 0.0;
  for (const auto& r : log.records) meta_test += r.meta_test_seconds;
  return ordered_json{{"sampler", std::string(to_string(log.config.sampler))},
                      {"seed", log.config.seed},
                      {"meta_test_seconds", meta_test}};
}

void write_metadata(const fs::path& dir, double wall_seconds,
                    const std::vector<const RunLog*>& logs) {
  ordered_json j;
  j["generated_at"] = utc_timestamp();
  j["rng"] = std::string(Rng::kAlgorithm);
  j["wall_seconds"] = wall_seconds;
  ordered_json runs = ordered_json::array();
  for (const RunLog* log : logs) runs.push_back(run_timing(*log));
  j["runs"] = runs;
  write_file(dir / "metadata.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void warn_config(const ExperimentConfig& config) {
  for (const auto& w : config.meta.warnings(config.scenario.size())) {
    std::cerr << "warning: " << w << '\n';
  }
}

template <typename Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error (" << e.key() << "): " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

// Writes the compare-style outputs for one configuration into `dir`.
ComparisonSummary compare_into(const ExperimentConfig& config, const std::string& reference,
                               const fs::path& dir) {
  const std::size_t ref = reference_index(config, reference);
  const auto start = std::chrono::steady_clock::now();
  const auto logs = run_grid(config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(dir / "runs");
  std::vector<const RunLog*> flat;
  for (std::size_t s = 0; s < logs.size(); ++s) {
    for (std::size_t k = 0; k < logs[s].size(); ++k) {
      const RunLog& log = logs[s][k];
      flat.push_back(&log);
      const auto name = fmt::format("{}_{}_seed{}.runlog.jsonl", s,
                                    to_string(config.samplers[s]), config.seeds[k]);
      write_file(dir / "runs" / name, [&](std::ostream& out) { write_runlog_jsonl(out, log); });
    }
  }

  const ComparisonSummary summary = summarize_comparison(config, logs, ref);
  ordered_json doc;
  doc["config"] = config.echo();
  doc["config"]["reference"] = summary.reference;
  doc["scenario"] = scenario_to_json(config.scenario);
  doc["comparison"] = comparison_to_json(summary);
  write_file(dir / "comparison.json", [&](std::ostream& out) { out << doc.dump(2) << '\n'; });

  bool first = true;
  for (std::size_t s = 0; s < logs.size(); ++s) {
    if (s == ref) continue;
    const RewardDiff diff = reward_difference(logs, s, ref, config.smoothing_window);
    const auto writer = [&](std::ostream& out) { write_reward_diff_csv(out, diff.raw, diff.smoothed); };
    if (first) write_file(dir / "reward_diff.csv", writer);
    write_file(dir / fmt::format("reward_diff_{}_{}.csv", s, to_string(config.samplers[s])),
               writer);
    first = false;
  }
  write_metadata(dir, wall, flat);
  return summary;
}

void require_comparison_shape(const ExperimentConfig& config) {
  if (config.samplers.size() < 2) {
    throw ConfigError("samplers", "comparisons need at least 2 samplers");
  }
  if (config.seeds.size() < 2) throw ConfigError("seeds", "comparisons need at least 2 seeds");
}

}  // namespace

int cmd_run(const fs::path& config_path, const RunOptions& options) {
  return guarded([&] {
    ExperimentConfig config = load_experiment_config(config_path);
    if (options.seed) config.seeds = {*options.seed};
    if (options.out) config.output_dir = *options.out;
    warn_config(config);

    const SamplerKind sampler = config.samplers.front();
    const std::uint64_t seed = config.seeds.front();
    const auto start = std::chrono::steady_clock::now();
    const RunLog log = run_simulation(config, sampler, seed);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path& dir = config.output_dir;
    fs::create_directories(dir);
    write_file(dir / "runlog.jsonl", [&](std::ostream& out) { write_runlog_jsonl(out, log); });
    write_file(dir / "weights.csv", [&](std::ostream& out) { write_weights_csv(out, log); });
    write_file(dir / "frequencies.csv",
               [&](std::ostream& out) { write_frequencies_csv(out, log); });

    ordered_json summary;
    ordered_json echo = config.echo();
    echo["samplers"] = ordered_json::array({std::string(to_string(sampler))});
    echo["seeds"] = ordered_json::array({seed});
    summary["config"] = echo;
    summary["scenario"] = scenario_to_json(config.scenario);
    const ordered_json results = run_summary_json(log);
    for (const auto& [key, value] : results.items()) summary[key] = value;
    write_file(dir / "summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
    write_metadata(dir, wall, {&log});

    std::cout << fmt::format("{} seed {}: {} cycles, terminal summed loss {:.6g} -> {}\n",
                             to_string(sampler), seed, log.records.size(),
                             terminal_summed_loss(log), dir.string());
    return kExitOk;
  });
}

int cmd_compare(const fs::path& config_path, const CompareOptions& options) {
  return guarded([&] {
    ExperimentConfig config = load_experiment_config(config_path);
    if (options.reference) config.reference = *options.reference;
    if (options.out) config.output_dir = *options.out;
    require_comparison_shape(config);
    warn_config(config);

    const auto summary = compare_into(config, config.reference, config.output_dir);
    for (const auto& s : summary.samplers) {
      std::cout << fmt::format("{:<16} mean {:.6g}  std {:.6g}  win-rate vs {} {:.2f}\n", s.sampler,
                               s.mean_terminal_loss, s.std_terminal_loss, summary.reference,
                               s.win_rate);
    }
    return kExitOk;
  });
}

int cmd_sweep(const fs::path& config_path, const SweepOptions& options) {
  return guarded([&] {
    if (options.lambdas.empty() && options.meta_lengths.empty()) {
      throw ConfigError("grid", "sweep needs at least one --lambda or --meta-length value");
    }
    ExperimentConfig base = load_experiment_config(config_path);
    if (options.reference) base.reference = *options.reference;
    if (options.out) base.output_dir = *options.out;
    require_comparison_shape(base);

    const auto lambdas =
        options.lambdas.empty() ? std::vector<double>{base.meta.lambda} : options.lambdas;
    const auto lengths = options.meta_lengths.empty()
                             ? std::vector<std::size_t>{base.meta.meta_length}
                             : options.meta_lengths;

    // Validate every cell before running any of them.
    std::vector<ExperimentConfig> cells;
    for (const double lambda : lambdas) {
      for (const std::size_t k : lengths) {
        ExperimentConfig cell = base;
        cell.meta.lambda = lambda;
        cell.meta.meta_length = k;
        try {
          cell.meta.validate();
        } catch (const InvalidArgument& e) {
          throw ConfigError("grid", e.what());
        }
        cells.push_back(std::move(cell));
      }
    }

    fs::create_directories(base.output_dir);
    std::string table = "lambda,meta_length,sampler,mean_terminal_summed_loss,std_terminal_summed_loss,win_rate\n";
    for (const auto& cell : cells) {
      warn_config(cell);
      const auto dir = base.output_dir / fmt::format("cell_lambda{}_K{}", cell.meta.lambda,
                                                     cell.meta.meta_length);
      const auto summary = compare_into(cell, cell.reference, dir);
      for (const auto& s : summary.samplers) {
        table += fmt::format("{},{},{},{:.6g},{:.6g},{:.6g}\n", cell.meta.lambda,
                             cell.meta.meta_length, s.sampler, s.mean_terminal_loss,
                             s.std_terminal_loss, s.win_rate);
      }
      std::cout << fmt::format("cell lambda={} K={} done\n", cell.meta.lambda,
                               cell.meta.meta_length);
    }
    write_file(base.output_dir / "grid_summary.csv", [&](std::ostream& out) { out << table; });
    return kExitOk;
  });
}

}  // namespace metasched
