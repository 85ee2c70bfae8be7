#include "metasched/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched {

std::vector<std::size_t> Trajectory::counts(std::size_t m) const {
  std::vector<std::size_t> out(m, 0);
  for (const ObjectiveId id : samples) {
    if (id.value >= m) {
      throw InvalidArgument(fmt::format(
          "objective index {} out of range for {} objectives", id.value, m));
    }
    ++out[id.value];
  }
  return out;
}

SamplingPolicy SamplingPolicy::uniform(std::size_t m) {
  if (m < 2) {
    throw InvalidArgument(fmt::format("policy needs at least 2 objectives, got {}", m));
  }
  return SamplingPolicy(std::vector<double>(m, 0.0));
}

SamplingPolicy SamplingPolicy::from_logits(std::vector<double> logits) {
  if (logits.size() < 2) {
    throw InvalidArgument(
        fmt::format("policy needs at least 2 objectives, got {}", logits.size()));
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) {
      throw NumericError(fmt::format("logit {} is not finite", i));
    }
  }
  return SamplingPolicy(std::move(logits));
}

SamplingPolicy new_policy(std::size_t m) { return SamplingPolicy::uniform(m); }

std::vector<double> probabilities(const SamplingPolicy& policy) {
  const auto logits = policy.logits();
  double max_logit = logits.front();
  for (const double l : logits) {
    if (!std::isfinite(l)) throw NumericError("non-finite logit in policy");
    max_logit = std::max(max_logit, l);
  }
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max_logit);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

ObjectiveId sample_categorical(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw InvalidArgument("cannot sample from an empty distribution");
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return ObjectiveId{i};
  }
  // Rounding may leave the running sum a hair below 1; the tail absorbs it.
  return ObjectiveId{probs.size() - 1};
}

ObjectiveId sample_objective(const SamplingPolicy& policy, Rng& rng) {
  const auto p = probabilities(policy);
  return sample_categorical(p, rng);
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (const double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const SamplingPolicy& policy) { return entropy(probabilities(policy)); }

std::vector<double> entropy_gradient(const SamplingPolicy& policy) {
  const auto p = probabilities(policy);
  const double h = entropy(p);
  std::vector<double> grad(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    grad[k] = -p[k] * (std::log(p[k]) + h);
  }
  return grad;
}

std::vector<double> log_prob_gradient(const SamplingPolicy& policy,
                                      const Trajectory& trajectory) {
  if (trajectory.empty()) throw InvalidArgument("trajectory is empty");
  const std::size_t m = policy.size();
  const auto counts = trajectory.counts(m);
  const auto p = probabilities(policy);
  const double k = static_cast<double>(trajectory.size());
  std::vector<double> grad(m);
  for (std::size_t i = 0; i < m; ++i) {
    grad[i] = static_cast<double>(counts[i]) - k * p[i];
  }
  return grad;
}

SamplingPolicy policy_gradient_update(const SamplingPolicy& policy,
                                      const Trajectory& trajectory, double reward,
                                      double beta, double lambda) {
  if (!std::isfinite(reward)) throw NumericError("reward is not finite");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument(fmt::format("meta step size must be positive, got {}", beta));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument(fmt::format("entropy temperature must be >= 0, got {}", lambda));
  }

  const auto pg = log_prob_gradient(policy, trajectory);
  if (reward == 0.0 && lambda == 0.0) return policy;

  std::vector<double> logits(policy.logits().begin(), policy.logits().end());
  if (reward != 0.0) {
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += beta * reward * pg[i];
  }
  if (lambda != 0.0) {
    const auto hg = entropy_gradient(policy);
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += beta * lambda * hg[i];
  }

  const double mean =
      std::accumulate(logits.begin(), logits.end(), 0.0) / static_cast<double>(logits.size());
  for (double& l : logits) {
    l = std::clamp(l - mean, -SamplingPolicy::kLogitBound, SamplingPolicy::kLogitBound);
  }
  return SamplingPolicy::from_logits(std::move(logits));
}

}  // namespace metasched
