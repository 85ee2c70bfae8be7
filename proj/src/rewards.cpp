#include "metasched/rewards.hpp"

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched {

namespace {

void require_same_length(const BaselineLosses& b, const EvaluationReport& a) {
  if (b.size() != a.size()) {
    throw InvalidArgument(fmt::format("baseline has {} losses but report has {}",
                                      b.size(), a.size()));
  }
}

}  // namespace

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kRelativeIndividual:
      return "relative_individual";
    case RewardKind::kHardIndividual:
      return "hard_individual";
    case RewardKind::kOverallLoss:
      return "overall_loss";
  }
  return "unknown";
}

std::optional<RewardKind> parse_reward_kind(std::string_view name) {
  if (name == "relative_individual") return RewardKind::kRelativeIndividual;
  if (name == "hard_individual") return RewardKind::kHardIndividual;
  if (name == "overall_loss") return RewardKind::kOverallLoss;
  return std::nullopt;
}

double relative_individual_reward(const BaselineLosses& b, const EvaluationReport& a) {
  require_same_length(b, a);
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b.losses[i] > 0.0)) {
      throw InvalidBaseline(
          fmt::format("baseline loss {} of objective {} is not positive", b.losses[i], i));
    }
    total += (b.losses[i] - a.losses[i]) / b.losses[i];
  }
  return total;
}

double hard_individual_reward(const BaselineLosses& b, const EvaluationReport& a) {
  require_same_length(b, a);
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (a.losses[i] < b.losses[i]) {
      total += 1.0;
    } else if (a.losses[i] > b.losses[i]) {
      total -= 1.0;
    }
  }
  return total;
}

double overall_loss_reward(const BaselineLosses& /*b*/, const EvaluationReport& a) {
  double total = 0.0;
  for (const double loss : a.losses) total += loss;
  return -total;
}

double compute_reward(RewardKind kind, const BaselineLosses& b, const EvaluationReport& a) {
  switch (kind) {
    case RewardKind::kRelativeIndividual:
      return relative_individual_reward(b, a);
    case RewardKind::kHardIndividual:
      return hard_individual_reward(b, a);
    case RewardKind::kOverallLoss:
      return overall_loss_reward(b, a);
  }
  throw InvalidArgument("unknown reward kind");
}

BaselineLosses update_baseline(const BaselineLosses& b, const EvaluationReport& a) {
  require_same_length(b, a);
  return BaselineLosses{a.losses};
}

}  // namespace metasched
