#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "metasched/errors.hpp"
#include "metasched/rewards.hpp"
#include "metasched/rng.hpp"

using namespace metasched;

namespace {

BaselineLosses B(std::vector<double> v) { return BaselineLosses{std::move(v)}; }
EvaluationReport A(std::vector<double> v) { return EvaluationReport{std::move(v)}; }

}  // namespace

TEST_CASE("relative individual reward examples") {
  CHECK(relative_individual_reward(B({1.0, 2.0}), A({1.0, 2.0})) == 0.0);
  CHECK(std::abs(relative_individual_reward(B({1.0, 2.0}), A({0.9, 2.2}))) < 1e-15);
  CHECK(relative_individual_reward(B({2.0}), A({1.0})) == 0.5);

  CHECK_THROWS_AS(relative_individual_reward(B({0.0, 1.0}), A({1.0, 1.0})), InvalidBaseline);
  CHECK_THROWS_AS(relative_individual_reward(B({-1.0, 1.0}), A({1.0, 1.0})), InvalidBaseline);
  CHECK_THROWS_AS(relative_individual_reward(B({1.0, 1.0}), A({1.0})), InvalidArgument);
}

TEST_CASE("hard individual reward examples") {
  CHECK(hard_individual_reward(B({1, 2}), A({0.9, 2.2})) == 0.0);
  CHECK(hard_individual_reward(B({1, 2, 3}), A({0.5, 1.9, 2.0})) == 3.0);
  CHECK(hard_individual_reward(B({1.5, 2.5}), A({1.5, 2.5})) == 0.0);
}

TEST_CASE("overall loss reward examples") {
  CHECK(overall_loss_reward(B({9, 9}), A({1.0, 2.0})) == -3.0);
  CHECK(overall_loss_reward(B({1, 1}), A({0, 0})) == 0.0);
  CHECK(overall_loss_reward(B({1}), A({0.5})) == -0.5);
}

TEST_CASE("update_baseline copies the report") {
  CHECK(update_baseline(B({1, 1}), A({0.5, 2.0})).losses == std::vector<double>{0.5, 2.0});
  auto b = update_baseline(update_baseline(B({1, 1}), A({0.3, 0.4})), A({0.7, 0.8}));
  CHECK(b.losses == std::vector<double>{0.7, 0.8});

  const auto bad = update_baseline(B({1, 1}), A({0.0, 2.0}));
  CHECK_THROWS_AS(compute_reward(RewardKind::kRelativeIndividual, bad, A({1, 1})),
                  InvalidBaseline);
}

TEST_CASE("compute_reward dispatch and names") {
  const auto b = B({1.0, 2.0});
  const auto a = A({0.5, 2.5});
  CHECK(compute_reward(RewardKind::kRelativeIndividual, b, a) ==
        relative_individual_reward(b, a));
  CHECK(compute_reward(RewardKind::kHardIndividual, b, a) == hard_individual_reward(b, a));
  CHECK(compute_reward(RewardKind::kOverallLoss, b, a) == overall_loss_reward(b, a));
  for (auto k : {RewardKind::kRelativeIndividual, RewardKind::kHardIndividual,
                 RewardKind::kOverallLoss}) {
    CHECK(parse_reward_kind(to_string(k)) == k);
  }
  CHECK(to_string(RewardKind::kRelativeIndividual) == "relative_individual");
  CHECK(to_string(RewardKind::kHardIndividual) == "hard_individual");
  CHECK(to_string(RewardKind::kOverallLoss) == "overall_loss");
  CHECK_FALSE(parse_reward_kind("overall").has_value());
}

TEST_CASE("relative reward is invariant to per-objective rescaling") {
  Rng rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + trial % 8;
    std::vector<double> b(m), a(m), bs(m), as(m);
    for (std::size_t i = 0; i < m; ++i) {
      b[i] = 0.01 + 10.0 * rng.uniform();
      a[i] = 0.01 + 10.0 * rng.uniform();
      const double s = std::exp(6.0 * (rng.uniform() - 0.5));
      bs[i] = s * b[i];
      as[i] = s * a[i];
    }
    const double r = relative_individual_reward(B(b), A(a));
    const double rs = relative_individual_reward(B(bs), A(as));
    CHECK(std::abs(r - rs) < 1e-12);
  }
}

TEST_CASE("sign coherence and bounds") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + trial % 6;
    const double md = static_cast<double>(m);
    std::vector<double> b(m), down(m), up(m), mixed(m);
    for (std::size_t i = 0; i < m; ++i) {
      b[i] = 0.05 + 5.0 * rng.uniform();
      down[i] = b[i] * (0.01 + 0.98 * rng.uniform());
      up[i] = b[i] * (1.01 + 3.0 * rng.uniform());
      mixed[i] = 0.01 + 8.0 * rng.uniform();
    }
    CHECK(relative_individual_reward(B(b), A(down)) > 0.0);
    CHECK(hard_individual_reward(B(b), A(down)) == md);
    CHECK(relative_individual_reward(B(b), A(up)) < 0.0);
    CHECK(hard_individual_reward(B(b), A(up)) < 0.0);

    const double h = hard_individual_reward(B(b), A(mixed));
    CHECK(h >= -md);
    CHECK(h <= md);
    CHECK(relative_individual_reward(B(b), A(mixed)) <= md);
  }
}

TEST_CASE("individual rewards are permutation-equivariant") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 6;
    std::vector<double> b(m), a(m);
    for (std::size_t i = 0; i < m; ++i) {
      b[i] = 0.05 + rng.uniform();
      a[i] = 0.05 + rng.uniform();
    }
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = m - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
    }
    std::vector<double> bp(m), ap(m);
    for (std::size_t i = 0; i < m; ++i) {
      bp[i] = b[perm[i]];
      ap[i] = a[perm[i]];
    }
    CHECK(relative_individual_reward(B(bp), A(ap)) ==
          doctest::Approx(relative_individual_reward(B(b), A(a))).epsilon(1e-13));
    CHECK(hard_individual_reward(B(bp), A(ap)) == hard_individual_reward(B(b), A(a)));
  }
}
