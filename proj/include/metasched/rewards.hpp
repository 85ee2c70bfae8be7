#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metasched {

/// Validation losses a^i for every objective from one meta-test.
struct EvaluationReport {
  std::vector<double> losses;

  std::size_t size() const noexcept { return losses.size(); }
};

/// Losses of the previous meta-test, b^i.
struct BaselineLosses {
  std::vector<double> losses;

  std::size_t size() const noexcept { return losses.size(); }
};

enum class RewardKind {
  kRelativeIndividual,
  kHardIndividual,
  kOverallLoss,
};

/// Config spelling: "relative_individual" | "hard_individual" | "overall_loss".
std::string_view to_string(RewardKind kind);
std::optional<RewardKind> parse_reward_kind(std::string_view name);

/// Sum of relative loss drops, sum_i (b_i - a_i) / b_i.
/// Throws InvalidBaseline when any b_i <= 0 and InvalidArgument on length
/// mismatch.
double relative_individual_reward(const BaselineLosses& b, const EvaluationReport& a);

/// Sum of sign(b_i - a_i) with sign(0) = 0.
double hard_individual_reward(const BaselineLosses& b, const EvaluationReport& a);

/// Negated total evaluation loss. The baseline is accepted for a uniform
/// signature and ignored.
double overall_loss_reward(const BaselineLosses& b, const EvaluationReport& a);

double compute_reward(RewardKind kind, const BaselineLosses& b, const EvaluationReport& a);

/// The new baseline is the current report.
BaselineLosses update_baseline(const BaselineLosses& b, const EvaluationReport& a);

}  // namespace metasched
