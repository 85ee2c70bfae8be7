#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metasched/rng.hpp"

namespace metasched {

/// Index of one training objective, valid for a policy with m objectives when
/// value < m.
struct ObjectiveId {
  std::size_t value = 0;

  friend bool operator==(ObjectiveId, ObjectiveId) = default;
  friend auto operator<=>(ObjectiveId, ObjectiveId) = default;
};

/// Objective choices made during one meta-train phase, in order.
struct Trajectory {
  std::vector<ObjectiveId> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  void push_back(ObjectiveId id) { samples.push_back(id); }
  void clear() noexcept { samples.clear(); }

  /// Occurrences of each objective; throws InvalidArgument if an entry is
  /// out of range for m.
  std::vector<std::size_t> counts(std::size_t m) const;
};

/// Learnable sampling distribution over m >= 2 objectives, stored as
/// unconstrained logits. Probabilities are the normalized exponentials.
///
/// Logits are kept centered (zero mean) and bounded to
/// [-kLogitBound, kLogitBound], so every induced probability is a positive
/// normal double.
class SamplingPolicy {
 public:
  static constexpr double kLogitBound = 50.0;

  /// Uniform policy (all logits zero). Throws InvalidArgument if m < 2.
  static SamplingPolicy uniform(std::size_t m);

  /// Policy with the given logits, stored as-is. Throws InvalidArgument for
  /// fewer than two entries and NumericError for non-finite entries.
  static SamplingPolicy from_logits(std::vector<double> logits);

  std::size_t size() const noexcept { return logits_.size(); }
  std::span<const double> logits() const noexcept { return logits_; }

  friend bool operator==(const SamplingPolicy&, const SamplingPolicy&) = default;

 private:
  explicit SamplingPolicy(std::vector<double> logits) : logits_(std::move(logits)) {}

  std::vector<double> logits_;
};

/// Uniform initialization, P(i) = 1/m.
SamplingPolicy new_policy(std::size_t m);

/// Normalized exponentials of the logits, computed after subtracting the
/// largest logit.
std::vector<double> probabilities(const SamplingPolicy& policy);

/// Draws an index from a probability vector by inverse CDF on one uniform
/// variate. Consumes exactly one draw from rng.
ObjectiveId sample_categorical(std::span<const double> probs, Rng& rng);

ObjectiveId sample_objective(const SamplingPolicy& policy, Rng& rng);

/// Shannon entropy in nats of a probability vector.
double entropy(std::span<const double> probs);
double entropy(const SamplingPolicy& policy);

/// d H / d logits = -p_k (ln p_k + H).
std::vector<double> entropy_gradient(const SamplingPolicy& policy);

/// Sum over the trajectory of d log P(T_t) / d logits, i.e. counts - K p.
std::vector<double> log_prob_gradient(const SamplingPolicy& policy,
                                      const Trajectory& trajectory);

/// One REINFORCE step with entropy bonus:
///   logits += beta * (reward * log_prob_gradient + lambda * entropy_gradient)
/// followed by re-centering and bounding of the logits.
SamplingPolicy policy_gradient_update(const SamplingPolicy& policy,
                                      const Trajectory& trajectory, double reward,
                                      double beta, double lambda);

}  // namespace metasched
