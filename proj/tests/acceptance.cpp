// Acceptance suite: one PASS/FAIL line per check, nonzero exit if any fails.
//
// Simulator experiments use K=100, beta=0.1, lambda=1, 10000 steps and seeds
// 0..19 unless a check says otherwise. Thresholds are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "metasched/config.hpp"
#include "metasched/experiments.hpp"
#include "metasched/meta_loop.hpp"
#include "metasched/policy.hpp"
#include "metasched/rewards.hpp"
#include "metasched/runlog_io.hpp"
#include "metasched/sim_env.hpp"
#include "test_support.hpp"

using namespace metasched;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kSeeds = 20;
constexpr double kLambda = 1.0;

// Pass thresholds.
constexpr double kGradRelTol = 1e-5;
constexpr double kReinforceTol = 1e-6;
constexpr double kScaleTol = 1e-12;
constexpr int kBanditMinSeeds = 18;
constexpr double kBanditMinProb = 0.5;
constexpr double kWinFraction = 0.8;
constexpr double kAblationWinFraction = 0.7;
constexpr double kEntropyWinFraction = 0.7;
constexpr double kMaxOverhead = 0.05;
constexpr double kC1Seconds = 60.0;
constexpr double kC3Seconds = 120.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

MetaConfig sim_config(SamplerKind sampler, std::uint64_t seed) {
  MetaConfig c;
  c.meta_length = 100;
  c.beta = 0.1;
  c.lambda = kLambda;
  c.total_steps = 10000;
  c.sampler = sampler;
  c.seed = seed;
  return c;
}

RunLog simulate(const std::string& preset, const MetaConfig& config) {
  sim::SimEnvironment env(sim::scenario_preset(preset));
  return run_pretraining(env, config);
}

std::vector<RunLog> simulate_seeds(const std::string& preset,
                                   const std::function<MetaConfig(std::uint64_t)>& make) {
  std::vector<RunLog> logs(kSeeds);
  parallel_for(kSeeds, 0, [&](std::size_t s) { logs[s] = simulate(preset, make(s)); });
  return logs;
}

double mean_terminal(const std::vector<RunLog>& logs) {
  double total = 0.0;
  for (const auto& l : logs) total += terminal_summed_loss(l);
  return total / static_cast<double>(logs.size());
}

int strict_wins(const std::vector<RunLog>& a, const std::vector<RunLog>& b) {
  int wins = 0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    wins += terminal_summed_loss(a[s]) < terminal_summed_loss(b[s]) ? 1 : 0;
  }
  return wins;
}

int required(double fraction) { return static_cast<int>(std::ceil(fraction * kSeeds)); }

// 1: analytic gradients against numerical references.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  Rng rng(20240601);
  double worst_entropy = 0.0;
  int policies = 0;
  for (std::size_t m : {2u, 5u, 8u}) {
    for (int trial = 0; trial < 34; ++trial, ++policies) {
      std::vector<double> logits(m);
      for (auto& l : logits) l = 1.5 * rng.normal();
      const auto analytic = entropy_gradient(SamplingPolicy::from_logits(logits));
      double err = 0.0, norm = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        auto up = logits, down = logits;
        up[k] += 1e-5;
        down[k] -= 1e-5;
        const double fd = (entropy(SamplingPolicy::from_logits(up)) -
                           entropy(SamplingPolicy::from_logits(down))) /
                          2e-5;
        err += (analytic[k] - fd) * (analytic[k] - fd);
        norm += fd * fd;
      }
      worst_entropy = std::max(worst_entropy, std::sqrt(err / norm));
    }
  }

  const std::vector<double> reward_table{0.3, -1.1, 2.5, 0.0, 0.7, -0.4, 1.9, -2.2};
  auto trajectory_of = [](unsigned code) {
    Trajectory t;
    for (int k = 0; k < 3; ++k) t.push_back(ObjectiveId{(code >> k) & 1u});
    return t;
  };
  auto prob_of = [](const std::vector<double>& p, const Trajectory& t) {
    double q = 1.0;
    for (auto id : t.samples) q *= p[id.value];
    return q;
  };
  auto expected_reward = [&](const std::vector<double>& logits) {
    const auto p = probabilities(SamplingPolicy::from_logits(logits));
    double j = 0.0;
    for (unsigned c = 0; c < 8; ++c) j += prob_of(p, trajectory_of(c)) * reward_table[c];
    return j;
  };
  double worst_reinforce = 0.0;
  for (const std::vector<double>& logits :
       {std::vector<double>{0.0, 0.0}, std::vector<double>{0.4, -0.9},
        std::vector<double>{-1.7, 0.6}}) {
    const auto policy = SamplingPolicy::from_logits(logits);
    const auto p = probabilities(policy);
    std::vector<double> estimate(2, 0.0);
    for (unsigned c = 0; c < 8; ++c) {
      const auto t = trajectory_of(c);
      const auto g = log_prob_gradient(policy, t);
      for (int i = 0; i < 2; ++i) estimate[i] += prob_of(p, t) * reward_table[c] * g[i];
    }
    for (int i = 0; i < 2; ++i) {
      auto up = logits, down = logits;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (expected_reward(up) - expected_reward(down)) / 2e-5;
      worst_reinforce = std::max(worst_reinforce, std::abs(estimate[i] - fd));
    }
  }
  const double secs = seconds_since(start);
  return {worst_entropy < kGradRelTol && worst_reinforce < kReinforceTol && secs < kC1Seconds,
          fmt::format("entropy grad max rel err {:.2e} over {} policies (< {:g}); REINFORCE max "
                      "abs err {:.2e} (< {:g}); {:.2f}s",
                      worst_entropy, policies, kGradRelTol, worst_reinforce, kReinforceTol,
                      secs)};
}

// 2: relative reward examples and scale invariance.
Outcome reward_unit_suite() {
  bool ok = true;
  ok &= relative_individual_reward({{1.0, 2.0}}, {{1.0, 2.0}}) == 0.0;
  ok &= std::abs(relative_individual_reward({{1.0, 2.0}}, {{0.9, 2.2}})) < 1e-15;
  ok &= relative_individual_reward({{2.0}}, {{1.0}}) == 0.5;
  const bool examples = ok;

  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + trial % 8;
    BaselineLosses b, bs;
    EvaluationReport a, as;
    for (std::size_t i = 0; i < m; ++i) {
      const double bi = 0.01 + 10.0 * rng.uniform();
      const double ai = 0.01 + 10.0 * rng.uniform();
      const double s = std::exp(6.0 * (rng.uniform() - 0.5));
      b.losses.push_back(bi);
      a.losses.push_back(ai);
      bs.losses.push_back(s * bi);
      as.losses.push_back(s * ai);
    }
    worst = std::max(worst, std::abs(relative_individual_reward(b, a) -
                                     relative_individual_reward(bs, as)));
  }
  return {examples && worst < kScaleTol,
          fmt::format("examples {}; 1000 rescalings, max change {:.2e} (< {:g})",
                      examples ? "ok" : "WRONG", worst, kScaleTol)};
}

// 3: a dominant objective is found.
Outcome bandit_recovery() {
  const auto start = Clock::now();
  const auto logs = simulate_seeds(
      "dominant", [](std::uint64_t s) { return sim_config(SamplerKind::kMometas, s); });
  int hits = 0;
  double lowest = 1.0;
  for (const auto& log : logs) {
    double p0 = 0.0;
    for (std::size_t c = log.records.size() - 10; c < log.records.size(); ++c) {
      p0 += log.records[c].probabilities[0] / 10.0;
    }
    hits += p0 >= kBanditMinProb ? 1 : 0;
    lowest = std::min(lowest, p0);
  }
  const double secs = seconds_since(start);
  return {hits >= kBanditMinSeeds && secs < kC3Seconds,
          fmt::format("{}/{} seeds with final-10-cycle p0 >= {:g} (need {}); lowest {:.3f}; "
                      "{:.2f}s",
                      hits, kSeeds, kBanditMinProb, kBanditMinSeeds, lowest, secs)};
}

// 4: learned sampler beats uniform under negative transfer.
Outcome beats_uniform() {
  const auto mometas = simulate_seeds(
      "negative_transfer", [](std::uint64_t s) { return sim_config(SamplerKind::kMometas, s); });
  const auto uniform = simulate_seeds(
      "negative_transfer", [](std::uint64_t s) { return sim_config(SamplerKind::kUniform, s); });
  const int wins = strict_wins(mometas, uniform);
  const double mm = mean_terminal(mometas), mu = mean_terminal(uniform);
  return {wins >= required(kWinFraction) && mm < mu,
          fmt::format("mometas lower in {}/{} paired seeds (need {}); mean {:.4g} vs uniform "
                      "{:.4g}",
                      wins, kSeeds, required(kWinFraction), mm, mu)};
}

// 5: the fast objective is sampled less later on.
Outcome easy_objective_downweighted() {
  const auto logs = simulate_seeds(
      "easy_objective", [](std::uint64_t s) { return sim_config(SamplerKind::kMometas, s); });
  int hits = 0;
  double first_mean = 0.0, last_mean = 0.0;
  for (const auto& log : logs) {
    const std::size_t n = log.records.size();
    const std::size_t third = n / 3;
    double first = 0.0, last = 0.0;
    for (std::size_t c = 0; c < third; ++c) first += log.records[c].probabilities[0];
    for (std::size_t c = n - third; c < n; ++c) last += log.records[c].probabilities[0];
    first /= static_cast<double>(third);
    last /= static_cast<double>(third);
    hits += last < first ? 1 : 0;
    first_mean += first / kSeeds;
    last_mean += last / kSeeds;
  }
  return {hits >= required(kWinFraction),
          fmt::format("final-third weight below first-third in {}/{} seeds (need {}); mean "
                      "{:.3f} -> {:.3f}",
                      hits, kSeeds, required(kWinFraction), first_mean, last_mean)};
}

// 6: reward ablation ordering.
Outcome reward_ablation() {
  auto with_reward = [](RewardKind kind) {
    return [kind](std::uint64_t s) {
      auto c = sim_config(SamplerKind::kMometas, s);
      c.reward = kind;
      return c;
    };
  };
  const auto rel = simulate_seeds("negative_transfer", with_reward(RewardKind::kRelativeIndividual));
  const auto hard = simulate_seeds("negative_transfer", with_reward(RewardKind::kHardIndividual));
  const auto overall = simulate_seeds("negative_transfer", with_reward(RewardKind::kOverallLoss));
  const double mr = mean_terminal(rel), mh = mean_terminal(hard), mo = mean_terminal(overall);
  const int wins = strict_wins(rel, overall);
  return {mr < mh && mr < mo && wins >= required(kAblationWinFraction),
          fmt::format("mean terminal loss relative {:.4g}, hard {:.4g}, overall {:.4g}; relative "
                      "beats overall in {}/{} (need {})",
                      mr, mh, mo, wins, kSeeds, required(kAblationWinFraction))};
}

// 7: meta length 100 vs 25.
Outcome meta_length() {
  auto with_k = [](std::size_t k) {
    return [k](std::uint64_t s) {
      auto c = sim_config(SamplerKind::kMometas, s);
      c.meta_length = k;
      return c;
    };
  };
  const auto k25 = simulate_seeds("negative_transfer", with_k(25));
  const auto k100 = simulate_seeds("negative_transfer", with_k(100));
  const double m25 = mean_terminal(k25), m100 = mean_terminal(k100);
  int flatter = 0;
  for (int s = 0; s < kSeeds; ++s) flatter += mean_entropy(k25[s]) >= mean_entropy(k100[s]);
  return {m100 <= m25 && flatter >= required(kEntropyWinFraction),
          fmt::format("mean terminal loss K=100 {:.4g} vs K=25 {:.4g}; K=25 entropy >= K=100 in "
                      "{}/{} (need {})",
                      m100, m25, flatter, kSeeds, required(kEntropyWinFraction))};
}

// 8: shipped defaults.
Outcome defaults() {
  const auto cfg = load_experiment_config(METASCHED_DEFAULT_CONFIG);
  const MetaConfig builtin;
  const bool shipped = cfg.meta.meta_length == 100 && cfg.meta.beta == 0.1 &&
                       cfg.meta.lambda >= 1.0 && cfg.meta.lambda <= 3.0;
  const bool code = builtin.meta_length == 100 && builtin.beta == 0.1 &&
                    builtin.lambda >= 1.0 && builtin.lambda <= 3.0;
  return {shipped && code,
          fmt::format("configs/default.json K={} beta={:g} lambda={:g}; built-in K={} beta={:g} "
                      "lambda={:g}",
                      cfg.meta.meta_length, cfg.meta.beta, cfg.meta.lambda, builtin.meta_length,
                      builtin.beta, builtin.lambda)};
}

// 9: identical runs write identical files.
Outcome determinism() {
  testing::TempDir dir("acceptance");
  RunOptions a{std::nullopt, dir / "a"}, b{std::nullopt, dir / "b"};
  const int ra = cmd_run(METASCHED_DEFAULT_CONFIG, a);
  const int rb = cmd_run(METASCHED_DEFAULT_CONFIG, b);
  bool same = ra == kExitOk && rb == kExitOk;
  std::size_t bytes = 0;
  for (const char* f : {"runlog.jsonl", "weights.csv", "summary.json"}) {
    const auto x = testing::read_file(dir / "a" / f);
    const auto y = testing::read_file(dir / "b" / f);
    same &= !x.empty() && x == y;
    bytes += x.size();
  }
  return {same, fmt::format("runlog.jsonl, weights.csv, summary.json identical across two runs "
                            "({} bytes compared)",
                            bytes)};
}

// 10: evaluation count and wall-time overhead.
Outcome overhead() {
  bool counts_ok = true;
  std::string counts;
  for (auto [k, total] : {std::pair<std::size_t, std::size_t>{100, 10000}, {100, 10050},
                          {25, 1000}, {64, 1000}}) {
    sim::SimEnvironment env(sim::scenario_preset("negative_transfer"));
    testing::CountingEnv counting(env);
    auto c = sim_config(SamplerKind::kMometas, 1);
    c.meta_length = k;
    c.total_steps = total;
    run_pretraining(counting, c);
    counts_ok &= counting.evaluate_calls == total / k + 1;
    counts += fmt::format(" T={}/K={}:{}", total, k, counting.evaluate_calls);
  }

  // Paired runs, alternating which sampler goes first, and the median of the
  // per-pair time ratios: slow drifts in machine speed hit both halves of a
  // pair alike and the median drops preempted outliers.
  auto timed_run = [](SamplerKind kind, std::uint64_t seed) {
    const auto start = Clock::now();
    const double loss = terminal_summed_loss(simulate("negative_transfer", sim_config(kind, seed)));
    const double secs = seconds_since(start);
    return loss > 0.0 ? secs : secs + 1.0;
  };
  std::vector<double> ratios;
  for (int rep = 0; rep < 10; ++rep) {
    for (std::uint64_t s = 0; s < kSeeds; ++s) {
      double tm = 0.0, tu = 0.0;
      if ((rep + s) % 2 == 0) {
        tm = timed_run(SamplerKind::kMometas, s);
        tu = timed_run(SamplerKind::kUniform, s);
      } else {
        tu = timed_run(SamplerKind::kUniform, s);
        tm = timed_run(SamplerKind::kMometas, s);
      }
      ratios.push_back(tm / tu);
    }
  }
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  const double ratio = ratios[ratios.size() / 2] - 1.0;
  return {counts_ok && ratio < kMaxOverhead,
          fmt::format("evaluate calls{} (expected T/K+1); mometas vs uniform wall time "
                      "{:+.2f}% (median of {} paired runs, < {:g}%)",
                      counts, 100.0 * ratio, ratios.size(), 100.0 * kMaxOverhead)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"gradient correctness", gradient_correctness},
      {"relative reward unit suite", reward_unit_suite},
      {"bandit recovery (dominant)", bandit_recovery},
      {"beats uniform (negative_transfer)", beats_uniform},
      {"easy objective downweighted", easy_objective_downweighted},
      {"reward ablation ordering", reward_ablation},
      {"meta length K=100 vs K=25", meta_length},
      {"defaults", defaults},
      {"determinism", determinism},
      {"overhead accounting", overhead},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failures += o.pass ? 0 : 1;
    fmt::print("{} [{:>2}] {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, checks[i].first,
               o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} passed\n", checks.size() - failures, checks.size());
  return failures == 0 ? 0 : 1;
}
