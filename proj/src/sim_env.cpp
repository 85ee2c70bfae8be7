#include "metasched/sim_env.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched::sim {

TransferMatrix::TransferMatrix(std::size_t m, std::vector<double> row_major)
    : m_(m), values_(std::move(row_major)) {
  if (values_.size() != m * m) {
    throw InvalidArgument(fmt::format("transfer matrix for {} objectives needs {} entries, got {}",
                                      m, m * m, values_.size()));
  }
}

TransferMatrix TransferMatrix::zeros(std::size_t m) {
  return TransferMatrix(m, std::vector<double>(m * m, 0.0));
}

void Scenario::validate() const {
  const std::size_t m = objectives.size();
  if (m < 2) throw InvalidArgument(fmt::format("scenario needs at least 2 objectives, got {}", m));
  if (transfer.size() != m) {
    throw InvalidArgument(fmt::format("transfer matrix is {0}x{0} but there are {1} objectives",
                                      transfer.size(), m));
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto& o = objectives[i];
    if (!std::isfinite(o.l0) || !std::isfinite(o.floor) || !(o.floor >= kMinFloor) ||
        !(o.l0 > o.floor)) {
      throw InvalidArgument(fmt::format(
          "objective {}: need l0 > floor >= {}, got l0={} floor={}", i, kMinFloor, o.l0, o.floor));
    }
    if (!(o.noise_sigma >= 0.0) || !(o.eval_noise_sigma >= 0.0) ||
        !std::isfinite(o.noise_sigma) || !std::isfinite(o.eval_noise_sigma)) {
      throw InvalidArgument(fmt::format("objective {}: noise must be finite and >= 0", i));
    }
  }
  for (const double a : transfer.row_major()) {
    if (!std::isfinite(a)) throw InvalidArgument("transfer matrix has a non-finite entry");
  }
}

SimState initial_state(std::span<const ObjectiveSpec> specs) {
  SimState state;
  state.losses.reserve(specs.size());
  for (const auto& s : specs) state.losses.push_back(s.l0);
  return state;
}

SimState sim_train_step(const SimState& state, std::span<const ObjectiveSpec> specs,
                        const TransferMatrix& transfer, ObjectiveId j, Rng& rng) {
  const std::size_t m = specs.size();
  if (j.value >= m) {
    throw InvalidArgument(fmt::format("objective {} out of range for {} objectives", j.value, m));
  }
  SimState next;
  next.step = state.step + 1;
  next.losses.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = rng.normal();
    const double c = specs[i].floor;
    const double excess =
        (state.losses[i] - c) * std::exp(-transfer.at(i, j.value) + specs[i].noise_sigma * xi);
    next.losses[i] = c + std::clamp(excess, 0.0, kMaxExcess);
  }
  return next;
}

EvaluationReport sim_evaluate(const SimState& state, std::span<const ObjectiveSpec> specs,
                              Rng& rng, std::size_t batches) {
  if (batches == 0) throw InvalidArgument("evaluation needs at least one batch");
  EvaluationReport report;
  report.losses.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    double xi = 0.0;
    for (std::size_t b = 0; b < batches; ++b) xi += rng.normal();
    xi /= static_cast<double>(batches);
    report.losses[i] =
        std::max(specs[i].floor, state.losses[i] * std::exp(specs[i].eval_noise_sigma * xi));
  }
  return report;
}

namespace {

constexpr std::string_view kPresets[] = {"independent", "dominant", "negative_transfer",
                                         "easy_objective"};

Scenario uniform_objectives(std::string_view name, std::size_t m, ObjectiveSpec spec) {
  Scenario s;
  s.name = std::string(name);
  s.objectives.assign(m, spec);
  s.transfer = TransferMatrix::zeros(m);
  return s;
}

}  // namespace

std::vector<std::string_view> preset_names() {
  return {std::begin(kPresets), std::end(kPresets)};
}

Scenario scenario_preset(std::string_view name) {
  if (name == "independent") {
    auto s = uniform_objectives(name, 5, {4.0, 0.05, 0.002, 0.01});
    for (std::size_t i = 0; i < 5; ++i) s.transfer.at(i, i) = 0.003;
    return s;
  }
  if (name == "dominant") {
    // Objective 0 lowers every loss; the others push every loss up a little.
    // The mix that holds losses steady has P(0) = 0.0025 / 0.0045 ~ 0.56.
    auto s = uniform_objectives(name, 3, {10.0, 0.01, 0.002, 0.01});
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) s.transfer.at(i, j) = j == 0 ? 0.002 : -0.0025;
    }
    return s;
  }
  if (name == "negative_transfer") {
    // Under uniform sampling objectives 0-3 stall: the harm from objective 4
    // cancels their own progress.
    auto s = uniform_objectives(name, 5, {4.0, 0.05, 0.002, 0.01});
    for (std::size_t i = 0; i < 4; ++i) {
      s.transfer.at(i, i) = 0.003;
      s.transfer.at(i, 4) = -0.003;
    }
    s.transfer.at(4, 4) = 0.006;
    return s;
  }
  if (name == "easy_objective") {
    auto s = uniform_objectives(name, 5, {10.0, 0.01, 0.002, 0.01});
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) s.transfer.at(i, j) = i == j ? 0.006 : -0.0015;
    }
    s.transfer.at(0, 0) = 0.03;
    return s;
  }
  throw InvalidArgument(fmt::format("unknown scenario preset '{}'", name));
}

SimEnvironment::SimEnvironment(Scenario scenario, std::size_t eval_batches)
    : scenario_(std::move(scenario)), eval_batches_(eval_batches) {
  scenario_.validate();
  if (eval_batches_ == 0) throw InvalidArgument("eval_batches must be positive");
  state_ = initial_state(scenario_.objectives);
  last_drop_.assign(scenario_.size(), 0.0);
}

void SimEnvironment::train_step(ObjectiveId objective, Rng& rng) {
  SimState next = sim_train_step(state_, scenario_.objectives, scenario_.transfer, objective, rng);
  last_drop_[objective.value] =
      std::abs(state_.losses[objective.value] - next.losses[objective.value]);
  state_ = std::move(next);
}

EvaluationReport SimEnvironment::evaluate(Rng& rng) {
  return sim_evaluate(state_, scenario_.objectives, rng, eval_batches_);
}

std::optional<double> SimEnvironment::grad_norm(ObjectiveId objective) const {
  if (objective.value >= last_drop_.size()) return std::nullopt;
  return last_drop_[objective.value];
}

}  // namespace metasched::sim
