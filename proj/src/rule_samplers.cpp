#include "metasched/rule_samplers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kUniform:
      return "uniform";
    case SamplerKind::kGradientBased:
      return "gradient_based";
    case SamplerKind::kLossBased:
      return "loss_based";
    case SamplerKind::kMometas:
      return "mometas";
  }
  return "unknown";
}

std::optional<SamplerKind> parse_sampler_kind(std::string_view name) {
  if (name == "uniform") return SamplerKind::kUniform;
  if (name == "gradient_based") return SamplerKind::kGradientBased;
  if (name == "loss_based") return SamplerKind::kLossBased;
  if (name == "mometas") return SamplerKind::kMometas;
  return std::nullopt;
}

std::vector<double> uniform_weights(std::size_t m) {
  if (m < 2) throw InvalidArgument(fmt::format("need at least 2 objectives, got {}", m));
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

std::vector<double> standardized_logistic_weights(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw InvalidArgument(fmt::format("need at least 2 objectives, got {}", scores.size()));
  }
  for (const double s : scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite sampler score");
  }
  const auto n = static_cast<double>(scores.size());
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());

  std::vector<double> z(scores.size(), 0.0);
  if (*lo != *hi) {
    double mean = 0.0;
    for (const double s : scores) mean += s;
    mean /= n;
    double var = 0.0;
    for (const double s : scores) var += (s - mean) * (s - mean);
    const double sd = std::sqrt(var / n);
    for (std::size_t i = 0; i < scores.size(); ++i) z[i] = (scores[i] - mean) / sd;
  }

  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    w[i] = 1.0 / (1.0 + std::exp(-z[i]));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> gradient_based_weights(std::span<const double> grad_norms) {
  for (const double g : grad_norms) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient norm");
    if (g < 0.0) throw InvalidArgument(fmt::format("gradient norm {} is negative", g));
  }
  return standardized_logistic_weights(grad_norms);
}

std::vector<double> loss_based_weights(std::span<const double> current_losses,
                                       std::span<const double> initial_losses) {
  if (current_losses.size() != initial_losses.size()) {
    throw InvalidArgument(fmt::format("{} current losses but {} initial losses",
                                      current_losses.size(), initial_losses.size()));
  }
  std::vector<double> ir(current_losses.size());
  for (std::size_t i = 0; i < ir.size(); ++i) {
    if (!(current_losses[i] > 0.0) || !(initial_losses[i] > 0.0)) {
      throw InvalidArgument(fmt::format("losses of objective {} must be positive", i));
    }
    ir[i] = current_losses[i] / initial_losses[i];
  }
  return standardized_logistic_weights(ir);
}

RuleBasedSampler::RuleBasedSampler(SamplerKind kind, std::size_t m,
                                   std::span<const double> initial_losses)
    : kind_(kind), weights_(uniform_weights(m)) {
  if (kind == SamplerKind::kMometas) {
    throw InvalidArgument("mometas is not a rule-based sampler");
  }
  if (kind == SamplerKind::kLossBased) {
    if (initial_losses.size() != m) {
      throw InvalidArgument(fmt::format("loss-based sampler needs {} initial losses, got {}",
                                        m, initial_losses.size()));
    }
    for (const double l : initial_losses) {
      if (!(l > 0.0)) throw InvalidArgument("initial losses must be positive");
    }
    initial_losses_.assign(initial_losses.begin(), initial_losses.end());
  }
}

void RuleBasedSampler::refresh(std::span<const double> losses,
                               std::span<const double> grad_norms) {
  switch (kind_) {
    case SamplerKind::kUniform:
      return;
    case SamplerKind::kGradientBased:
      weights_ = gradient_based_weights(grad_norms);
      return;
    case SamplerKind::kLossBased:
      weights_ = loss_based_weights(losses, initial_losses_);
      return;
    case SamplerKind::kMometas:
      break;
  }
  throw InvalidArgument("mometas is not a rule-based sampler");
}

}  // namespace metasched
