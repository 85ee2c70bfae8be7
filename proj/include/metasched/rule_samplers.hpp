#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace metasched {

/// Every sampler the meta loop can drive. Config spelling:
/// "uniform" | "gradient_based" | "loss_based" | "mometas".
enum class SamplerKind {
  kUniform,
  kGradientBased,
  kLossBased,
  kMometas,
};

std::string_view to_string(SamplerKind kind);
std::optional<SamplerKind> parse_sampler_kind(std::string_view name);

/// Uniform weights over m >= 2 objectives.
std::vector<double> uniform_weights(std::size_t m);

/// Squashes raw scores into a strictly positive simplex point: z-score the
/// inputs (all z = 0 when the inputs are identical), apply the logistic, then
/// normalize. Monotone in the input and invariant to positive rescaling.
std::vector<double> standardized_logistic_weights(std::span<const double> scores);

/// Samples more where gradient norms are larger.
std::vector<double> gradient_based_weights(std::span<const double> grad_norms);

/// Inverse training rate IR_i = current_i / initial_i, then the same
/// standardized logistic map; higher IR gets more weight.
std::vector<double> loss_based_weights(std::span<const double> current_losses,
                                       std::span<const double> initial_losses);

/// State of a rule-based sampler between refreshes.
class RuleBasedSampler {
 public:
  /// kind must not be kMometas. initial_losses is required (and must be
  /// positive) for kLossBased and ignored otherwise.
  RuleBasedSampler(SamplerKind kind, std::size_t m,
                   std::span<const double> initial_losses = {});

  SamplerKind kind() const noexcept { return kind_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> initial_losses() const noexcept { return initial_losses_; }

  /// Recomputes the weights from the latest window. Uniform ignores both
  /// inputs; gradient-based reads grad_norms; loss-based reads losses.
  void refresh(std::span<const double> losses, std::span<const double> grad_norms);

 private:
  SamplerKind kind_;
  std::vector<double> weights_;
  std::vector<double> initial_losses_;
};

}  // namespace metasched
