#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metasched/environment.hpp"
#include "metasched/policy.hpp"
#include "metasched/rewards.hpp"
#include "metasched/rule_samplers.hpp"

namespace metasched {

struct MetaConfig {
  std::size_t meta_length = 100;     // K, training steps per meta-train
  double beta = 0.1;                 // meta step size
  double lambda = 3.0;               // entropy temperature
  std::size_t total_steps = 10000;
  SamplerKind sampler = SamplerKind::kMometas;
  RewardKind reward = RewardKind::kRelativeIndividual;
  std::uint64_t seed = 0;
  std::optional<double> reward_clip;  // symmetric clip on R before the update

  std::size_t num_cycles() const noexcept {
    return meta_length == 0 ? 0 : total_steps / meta_length;
  }

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;

  /// Non-fatal advice, e.g. meta length shorter than the objective count.
  std::vector<std::string> warnings(std::size_t num_objectives) const;
};

/// Everything observed in one train-test cycle.
struct CycleRecord {
  std::size_t cycle = 0;
  std::size_t step = 0;               // global step at the end of the cycle
  std::vector<double> probabilities;  // distribution used while sampling
  std::vector<std::size_t> counts;    // samples per objective, sums to K
  std::vector<double> losses;         // meta-test evaluation
  double reward = 0.0;
  double entropy = 0.0;               // of `probabilities`
  double meta_test_seconds = 0.0;     // wall time; not part of the data files
};

struct RunLog {
  MetaConfig config;
  std::vector<double> initial_losses;  // step-0 evaluation
  std::vector<CycleRecord> records;
  std::optional<SamplingPolicy> final_policy;  // set for the learned sampler
  std::size_t evaluate_calls = 0;

  std::size_t num_objectives() const noexcept { return initial_losses.size(); }
};

/// Runs alternating meta-train / meta-test cycles against `env`:
///   - evaluate once before training to seed the baseline losses (and the
///     loss-based sampler's initial losses);
///   - per cycle, sample K objectives and train on each in turn, evaluate all
///     objectives, compute the reward, update the sampler, replace the
///     baseline, and append a CycleRecord.
/// A trailing partial cycle is not run.
///
/// Sampling, training noise and evaluation noise draw from three independent
/// streams derived from config.seed, so switching sampler does not shift the
/// evaluation noise.
///
/// Errors: NumericError for a non-finite evaluation loss (names the cycle),
/// InvalidBaseline for a non-positive loss under the relative reward,
/// ContractViolation when the report has the wrong length.
RunLog run_pretraining(TrainingEnvironment& env, const MetaConfig& config);

/// Per-cycle reward of `a` minus `b`.
std::vector<double> reward_difference_series(const RunLog& a, const RunLog& b);

/// Centered moving average; windows are truncated at the ends. window == 1 is
/// the identity.
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

/// Mean over cycles of the sampling distribution.
std::vector<double> averaged_sampling_weights(const RunLog& log);

/// Mean over cycles of counts / K.
std::vector<double> averaged_sample_frequencies(const RunLog& log);

/// Mean over cycles of the recorded policy entropy.
double mean_entropy(const RunLog& log);

/// Sum of the last cycle's evaluation losses (the step-0 losses if the log
/// has no cycles).
double terminal_summed_loss(const RunLog& log);

}  // namespace metasched
