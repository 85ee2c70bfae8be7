#pragma once

#include <cstddef>
#include <optional>

#include "metasched/policy.hpp"
#include "metasched/rewards.hpp"
#include "metasched/rng.hpp"

namespace metasched {

/// What the meta loop needs from a trainer: a model shared by m objectives
/// that can take one update on a chosen objective and report validation
/// losses on all of them.
///
/// The loop never calls train_step and evaluate concurrently. Given the same
/// rng state, both must be deterministic. evaluate must return m strictly
/// positive, finite losses.
class TrainingEnvironment {
 public:
  virtual ~TrainingEnvironment() = default;

  virtual std::size_t num_objectives() const = 0;

  /// One model update on `objective`.
  virtual void train_step(ObjectiveId objective, Rng& rng) = 0;

  /// Validation losses for every objective.
  virtual EvaluationReport evaluate(Rng& rng) = 0;

  /// Magnitude of the most recent update's gradient for `objective`, if the
  /// environment can measure it. Only the gradient-based sampler needs this.
  virtual std::optional<double> grad_norm(ObjectiveId /*objective*/) const {
    return std::nullopt;
  }
};

}  // namespace metasched
