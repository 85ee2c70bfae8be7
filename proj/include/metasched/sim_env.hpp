#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metasched/environment.hpp"

namespace metasched::sim {

/// Loss behaviour of one synthetic objective.
struct ObjectiveSpec {
  double l0 = 1.0;                // initial loss
  double floor = 0.01;            // asymptote; >= kMinFloor and < l0
  double noise_sigma = 0.0;       // per-step log-space training noise
  double eval_noise_sigma = 0.0;  // log-space evaluation noise
};

inline constexpr double kMinFloor = 0.01;
inline constexpr double kMaxExcess = 1e12;

/// Row-major m x m matrix. at(i, j) is the decay (in nats of log excess loss)
/// applied to objective i by one training step on objective j. Negative
/// entries are negative transfer.
class TransferMatrix {
 public:
  TransferMatrix() = default;
  TransferMatrix(std::size_t m, std::vector<double> row_major);

  static TransferMatrix zeros(std::size_t m);

  std::size_t size() const noexcept { return m_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }
  double& at(std::size_t i, std::size_t j) { return values_[i * m_ + j]; }
  std::span<const double> row_major() const noexcept { return values_; }

 private:
  std::size_t m_ = 0;
  std::vector<double> values_;
};

struct Scenario {
  std::string name;
  std::vector<ObjectiveSpec> objectives;
  TransferMatrix transfer;

  std::size_t size() const noexcept { return objectives.size(); }

  /// Throws InvalidArgument on an inconsistent or out-of-range scenario.
  void validate() const;
};

struct SimState {
  std::vector<double> losses;
  std::size_t step = 0;
};

SimState initial_state(std::span<const ObjectiveSpec> specs);

/// One training step on objective j. For every objective i:
///   L_i <- c_i + (L_i - c_i) * exp(-A[i][j] + sigma_i * xi_i),  xi_i ~ N(0, 1)
/// with the excess loss capped at kMaxExcess and the result held at or above
/// the floor. Draws exactly m normals.
SimState sim_train_step(const SimState& state, std::span<const ObjectiveSpec> specs,
                        const TransferMatrix& transfer, ObjectiveId j, Rng& rng);

/// a_i = max(c_i, L_i * exp(eval_sigma_i * xi_i)) where xi_i is the mean of
/// `batches` standard normals. Does not touch the state.
EvaluationReport sim_evaluate(const SimState& state, std::span<const ObjectiveSpec> specs,
                              Rng& rng, std::size_t batches = 1);

/// Names accepted by scenario_preset.
std::vector<std::string_view> preset_names();

/// Built-in scenarios:
///   independent        5 objectives, diagonal transfer only
///   dominant           3 objectives; only training objective 0 lowers losses,
///                      training either other objective raises them slightly
///   negative_transfer  5 objectives; objective 4 learns quickly but raises
///                      the loss of every other objective
///   easy_objective     5 objectives; objective 0 decays 5x faster than the
///                      rest; every step sets the other objectives back
///                      a little, so uniform sampling stalls the slow ones
/// Throws InvalidArgument for any other name.
Scenario scenario_preset(std::string_view name);

/// TrainingEnvironment over a Scenario. grad_norm reports the absolute loss
/// drop of the objective in its most recent training step, a stand-in for a
/// gradient magnitude.
class SimEnvironment : public TrainingEnvironment {
 public:
  explicit SimEnvironment(Scenario scenario, std::size_t eval_batches = 1);

  std::size_t num_objectives() const override { return scenario_.size(); }
  void train_step(ObjectiveId objective, Rng& rng) override;
  EvaluationReport evaluate(Rng& rng) override;
  std::optional<double> grad_norm(ObjectiveId objective) const override;

  const SimState& state() const noexcept { return state_; }
  const Scenario& scenario() const noexcept { return scenario_; }

 private:
  Scenario scenario_;
  std::size_t eval_batches_;
  SimState state_;
  std::vector<double> last_drop_;
};

}  // namespace metasched::sim
