#include "metasched/meta_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <variant>

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched {

void MetaConfig::validate() const {
  if (meta_length == 0) throw InvalidArgument("meta_length must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument(fmt::format("beta must be positive, got {}", beta));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument(fmt::format("lambda must be >= 0, got {}", lambda));
  }
  if (total_steps < meta_length) {
    throw InvalidArgument(fmt::format("total_steps ({}) must be at least meta_length ({})",
                                      total_steps, meta_length));
  }
  if (reward_clip && (!(*reward_clip > 0.0) || !std::isfinite(*reward_clip))) {
    throw InvalidArgument(fmt::format("reward_clip must be positive, got {}", *reward_clip));
  }
}

std::vector<std::string> MetaConfig::warnings(std::size_t num_objectives) const {
  std::vector<std::string> out;
  if (meta_length < num_objectives) {
    out.push_back(fmt::format(
        "meta_length {} is smaller than the number of objectives {}; a trajectory "
        "cannot visit every objective",
        meta_length, num_objectives));
  }
  // Near uniform the entropy step scales centered logits by 1 - beta*lambda/m,
  // so past 2m it overshoots further every cycle.
  if (beta * lambda >= 2.0 * static_cast<double>(num_objectives)) {
    out.push_back(fmt::format(
        "beta*lambda = {} is at least twice the number of objectives ({}); the entropy "
        "term will oscillate instead of pulling the policy toward uniform",
        beta * lambda, num_objectives));
  }
  if (total_steps % meta_length != 0) {
    out.push_back(fmt::format("last {} steps do not fill a cycle and are skipped",
                              total_steps % meta_length));
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

EvaluationReport checked_evaluate(TrainingEnvironment& env, Rng& rng, std::size_t m,
                                  RewardKind reward, const std::string& where) {
  EvaluationReport report = env.evaluate(rng);
  if (report.size() != m) {
    throw ContractViolation(fmt::format("{}: evaluate returned {} losses, expected {}",
                                        where, report.size(), m));
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double loss = report.losses[i];
    if (!std::isfinite(loss)) {
      throw NumericError(fmt::format("{}: non-finite loss for objective {}", where, i));
    }
    if (reward == RewardKind::kRelativeIndividual && !(loss > 0.0)) {
      throw InvalidBaseline(
          fmt::format("{}: loss {} for objective {} is not positive", where, loss, i));
    }
  }
  return report;
}

// Per-objective gradient norms averaged over a window; objectives not trained
// in the window keep their previous value.
class GradNormTracker {
 public:
  explicit GradNormTracker(std::size_t m) : last_(m, 0.0), sum_(m, 0.0), hits_(m, 0) {}

  void observe(ObjectiveId id, double norm) {
    sum_[id.value] += norm;
    ++hits_[id.value];
  }

  std::span<const double> close_window() {
    for (std::size_t i = 0; i < last_.size(); ++i) {
      if (hits_[i] > 0) last_[i] = sum_[i] / static_cast<double>(hits_[i]);
      sum_[i] = 0.0;
      hits_[i] = 0;
    }
    return last_;
  }

 private:
  std::vector<double> last_;
  std::vector<double> sum_;
  std::vector<std::size_t> hits_;
};

}  // namespace

RunLog run_pretraining(TrainingEnvironment& env, const MetaConfig& config) {
  config.validate();
  const std::size_t m = env.num_objectives();
  if (m < 2) throw InvalidArgument(fmt::format("environment has {} objectives", m));

  Rng sampling_rng(config.seed, Rng::Stream::kSampling);
  Rng training_rng(config.seed, Rng::Stream::kTraining);
  Rng eval_rng(config.seed, Rng::Stream::kEvaluation);

  RunLog log;
  log.config = config;

  const EvaluationReport initial =
      checked_evaluate(env, eval_rng, m, config.reward, "initial evaluation");
  ++log.evaluate_calls;
  log.initial_losses = initial.losses;
  BaselineLosses baseline{initial.losses};

  std::variant<SamplingPolicy, RuleBasedSampler> sampler =
      config.sampler == SamplerKind::kMometas
          ? std::variant<SamplingPolicy, RuleBasedSampler>(new_policy(m))
          : std::variant<SamplingPolicy, RuleBasedSampler>(
                RuleBasedSampler(config.sampler, m, initial.losses));

  const bool needs_grad_norms = config.sampler == SamplerKind::kGradientBased;
  GradNormTracker grad_norms(m);

  const std::size_t k = config.meta_length;
  const std::size_t cycles = config.num_cycles();
  log.records.reserve(cycles);
  Trajectory trajectory;
  trajectory.samples.reserve(k);

  for (std::size_t cycle = 0; cycle < cycles; ++cycle) {
    std::vector<double> probs = std::visit(
        [](const auto& s) -> std::vector<double> {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SamplingPolicy>) {
            return probabilities(s);
          } else {
            return {s.weights().begin(), s.weights().end()};
          }
        },
        sampler);

    // meta-train
    trajectory.clear();
    for (std::size_t t = 0; t < k; ++t) {
      const ObjectiveId id = sample_categorical(probs, sampling_rng);
      env.train_step(id, training_rng);
      if (needs_grad_norms) {
        const auto norm = env.grad_norm(id);
        if (!norm) {
          throw ContractViolation(
              "gradient-based sampler requires an environment that reports grad_norm");
        }
        grad_norms.observe(id, *norm);
      }
      trajectory.push_back(id);
    }

    // meta-test
    const auto test_start = Clock::now();
    const EvaluationReport report = checked_evaluate(
        env, eval_rng, m, config.reward, fmt::format("cycle {}", cycle));
    ++log.evaluate_calls;
    const double reward = compute_reward(config.reward, baseline, report);
    if (!std::isfinite(reward)) {
      throw NumericError(fmt::format("cycle {}: reward is not finite", cycle));
    }

    if (auto* policy = std::get_if<SamplingPolicy>(&sampler)) {
      const double applied =
          config.reward_clip ? std::clamp(reward, -*config.reward_clip, *config.reward_clip)
                             : reward;
      *policy = policy_gradient_update(*policy, trajectory, applied, config.beta,
                                       config.lambda);
    } else {
      auto& rule = std::get<RuleBasedSampler>(sampler);
      const auto norms = needs_grad_norms ? grad_norms.close_window() : std::span<const double>{};
      rule.refresh(report.losses, norms);
    }
    baseline = update_baseline(baseline, report);
    const double test_seconds =
        std::chrono::duration<double>(Clock::now() - test_start).count();

    CycleRecord record;
    record.cycle = cycle;
    record.step = (cycle + 1) * k;
    record.entropy = entropy(probs);
    record.probabilities = std::move(probs);
    record.counts = trajectory.counts(m);
    record.losses = report.losses;
    record.reward = reward;
    record.meta_test_seconds = test_seconds;
    log.records.push_back(std::move(record));
  }

  if (const auto* policy = std::get_if<SamplingPolicy>(&sampler)) log.final_policy = *policy;
  return log;
}

std::vector<double> reward_difference_series(const RunLog& a, const RunLog& b) {
  if (a.records.size() != b.records.size()) {
    throw InvalidArgument(fmt::format("run logs have {} and {} cycles", a.records.size(),
                                      b.records.size()));
  }
  std::vector<double> diff(a.records.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = a.records[i].reward - b.records[i].reward;
  }
  return diff;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  if (window == 0) throw InvalidArgument("smoothing window must be positive");
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window - 1 - before;
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(series.size() - 1, i + after);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> averaged_sampling_weights(const RunLog& log) {
  if (log.records.empty()) throw InvalidArgument("run log has no cycles");
  std::vector<double> mean(log.records.front().probabilities.size(), 0.0);
  for (const auto& r : log.records) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.probabilities[i];
  }
  for (double& x : mean) x /= static_cast<double>(log.records.size());
  return mean;
}

std::vector<double> averaged_sample_frequencies(const RunLog& log) {
  if (log.records.empty()) throw InvalidArgument("run log has no cycles");
  std::vector<double> mean(log.records.front().counts.size(), 0.0);
  for (const auto& r : log.records) {
    const double k = static_cast<double>(
        std::accumulate(r.counts.begin(), r.counts.end(), std::size_t{0}));
    for (std::size_t i = 0; i < mean.size(); ++i) {
      mean[i] += static_cast<double>(r.counts[i]) / k;
    }
  }
  for (double& x : mean) x /= static_cast<double>(log.records.size());
  return mean;
}

double mean_entropy(const RunLog& log) {
  if (log.records.empty()) throw InvalidArgument("run log has no cycles");
  double total = 0.0;
  for (const auto& r : log.records) total += r.entropy;
  return total / static_cast<double>(log.records.size());
}

double terminal_summed_loss(const RunLog& log) {
  const auto& losses = log.records.empty() ? log.initial_losses : log.records.back().losses;
  return std::accumulate(losses.begin(), losses.end(), 0.0);
}

}  // namespace metasched
