#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bandit/environment.hpp"

using namespace bandit;

namespace {

// Term-by-term evaluation of the reward model for K = 3: intercept, mains,
// pairwise products, and the single triple product. Independent of the
// feature-expansion code path.
double brute_force_reward(const ResponseSurface& s, const Arm& a) {
  const double x1 = a.levels[0], x2 = a.levels[1], x3 = a.levels[2];
  return s.theta[0] + s.theta[1] * x1 + s.theta[2] * x2 + s.theta[3] * x3 +
         s.theta[4] * x1 * x2 + s.theta[5] * x1 * x3 + s.theta[6] * x2 * x3 +
         s.theta[7] * x1 * x2 * x3;
}

}  // namespace

TEST_CASE("degenerate probabilities: everything active") {
  HpmConfig cfg;
  cfg.p_main_active = 1.0;
  cfg.heredity_2way = {1.0, 1.0, 1.0};
  cfg.heredity_3way = {1.0, 1.0, 1.0, 1.0};
  cfg.sigma_intercept = 1.0;
  RngStream rng(1, 1);
  const ResponseSurface s =
      sample_surface(rng, cfg, 7, {NoiseKind::laplace, 1.0});
  REQUIRE(s.theta.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) CHECK(s.active[i] == 1);
}

TEST_CASE("main-effect activation rate and coefficient spread match config") {
  HpmConfig cfg;  // defaults: p = 0.41, sigma_main = 10
  RngStream rng(2, 2);
  const int n_surfaces = 10000;
  std::size_t active = 0, terms = 0;
  double sumsq = 0;
  for (int i = 0; i < n_surfaces; ++i) {
    const ResponseSurface s =
        sample_surface(rng, cfg, 7, {NoiseKind::laplace, 1.0});
    for (std::size_t j = 1; j <= 7; ++j) {
      ++terms;
      if (s.active[j]) {
        ++active;
        sumsq += s.theta[j] * s.theta[j];
      }
    }
  }
  const double rate = double(active) / double(terms);
  const double sd = std::sqrt(sumsq / double(active));
  CHECK(std::abs(rate - 0.41) < 0.02);
  CHECK(std::abs(sd - 10.0) < 0.3);
}

TEST_CASE("inactive coefficients are exactly zero by default") {
  HpmConfig cfg;
  RngStream rng(3, 3);
  for (int i = 0; i < 50; ++i) {
    const ResponseSurface s =
        sample_surface(rng, cfg, 5, {NoiseKind::laplace, 1.0});
    for (std::size_t j = 0; j < s.theta.size(); ++j)
      if (!s.active[j]) CHECK(s.theta[j] == 0.0);
  }
}

TEST_CASE("heredity: conditional activation rates follow the configuration") {
  HpmConfig cfg;
  RngStream rng(4, 4);
  const int n_surfaces = 40000;
  const std::size_t k = 5;
  std::size_t hits2[3] = {}, totals2[3] = {};
  std::size_t hits3[4] = {}, totals3[4] = {};
  for (int r = 0; r < n_surfaces; ++r) {
    const ResponseSurface s =
        sample_surface(rng, cfg, k, {NoiseKind::laplace, 1.0});
    std::size_t p = 1 + k;
    for (std::size_t i = 0; i + 1 < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j, ++p) {
        const int parents = s.active[1 + i] + s.active[1 + j];
        ++totals2[parents];
        if (s.active[p]) ++hits2[parents];
      }
    for (std::size_t i = 0; i + 2 < k; ++i)
      for (std::size_t j = i + 1; j + 1 < k; ++j)
        for (std::size_t l = j + 1; l < k; ++l, ++p) {
          const int parents =
              s.active[1 + i] + s.active[1 + j] + s.active[1 + l];
          ++totals3[parents];
          if (s.active[p]) ++hits3[parents];
        }
  }
  for (int c = 0; c < 3; ++c) {
    REQUIRE(totals2[c] > 0);
    const double rate = double(hits2[c]) / double(totals2[c]);
    CHECK(std::abs(rate - cfg.heredity_2way[c]) < 0.02);
  }
  for (int c = 0; c < 4; ++c) {
    REQUIRE(totals3[c] > 0);
    const double rate = double(hits3[c]) / double(totals3[c]);
    CHECK(std::abs(rate - cfg.heredity_3way[c]) < 0.02);
  }
}

TEST_CASE("hierarchy: variance ratios order the coefficient spreads") {
  HpmConfig cfg;
  cfg.r2 = 0.5;
  cfg.r3 = 0.25;
  RngStream rng(5, 5);
  double sq[3] = {};
  std::size_t n[3] = {};
  const std::size_t k = 6;
  const std::size_t mains_end = 1 + k;
  const std::size_t pairs_end = agent_feature_count(k);
  for (int r = 0; r < 20000; ++r) {
    const ResponseSurface s =
        sample_surface(rng, cfg, k, {NoiseKind::laplace, 1.0});
    for (std::size_t j = 1; j < s.theta.size(); ++j) {
      if (!s.active[j]) continue;
      const int order = j < mains_end ? 0 : (j < pairs_end ? 1 : 2);
      sq[order] += s.theta[j] * s.theta[j];
      ++n[order];
    }
  }
  const double sd0 = std::sqrt(sq[0] / n[0]);
  const double sd1 = std::sqrt(sq[1] / n[1]);
  const double sd2 = std::sqrt(sq[2] / n[2]);
  CHECK(sd1 < sd0);
  CHECK(sd2 < sd1);
  CHECK(sd0 == doctest::Approx(10.0).epsilon(0.05));
  CHECK(sd1 == doctest::Approx(5.0).epsilon(0.05));
  CHECK(sd2 == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("expected_reward: zero and intercept-only surfaces") {
  const ArmSet arms = enumerate_arms(3);
  ResponseSurface s;
  s.k = 3;
  s.theta.assign(8, 0.0);
  s.active.assign(8, 0);
  for (const Arm& a : arms.arms) CHECK(expected_reward(s, a) == 0.0);
  s.theta[0] = 2.5;
  for (const Arm& a : arms.arms) CHECK(expected_reward(s, a) == 2.5);
}

TEST_CASE("expected_reward matches term-by-term evaluation on K = 3") {
  HpmConfig cfg;
  cfg.p_main_active = 0.8;
  cfg.heredity_2way = {0.3, 0.5, 0.9};
  cfg.heredity_3way = {0.2, 0.3, 0.5, 0.9};
  cfg.sigma_intercept = 3.0;
  RngStream rng(6, 6);
  const ArmSet arms = enumerate_arms(3);
  for (int r = 0; r < 100; ++r) {
    const ResponseSurface s =
        sample_surface(rng, cfg, 3, {NoiseKind::laplace, 1.0});
    const Vec all = expected_rewards(s, arms);
    for (std::size_t m = 0; m < arms.arms.size(); ++m) {
      const double direct = brute_force_reward(s, arms.arms[m]);
      CHECK(expected_reward(s, arms.arms[m]) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(all[m] == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("observe_reward: zero-noise limit and moment calibration") {
  const ArmSet arms = enumerate_arms(3);
  ResponseSurface s;
  s.k = 3;
  s.theta.assign(8, 0.0);
  s.active.assign(8, 0);
  s.theta[1] = 4.0;
  s.noise = {NoiseKind::laplace, 0.0};
  RngStream rng(7, 7);
  const Arm& arm = arms.arms[5];
  CHECK(observe_reward(s, arm, rng) == expected_reward(s, arm));

  for (NoiseKind kind : {NoiseKind::laplace, NoiseKind::gaussian}) {
    s.noise = {kind, 5.0};
    const double expected = expected_reward(s, arm);
    const int n = 100000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
      const double r = observe_reward(s, arm, rng) - expected;
      sum += r;
      sumsq += r * r;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 * 5.0 / std::sqrt(double(n)));
    CHECK(var == doctest::Approx(25.0).epsilon(0.04));
  }
}

TEST_CASE("optimal_arm: ties break to the lowest index") {
  const ArmSet arms = enumerate_arms(3);
  ResponseSurface s;
  s.k = 3;
  s.theta.assign(8, 0.0);
  s.active.assign(8, 0);

  // All-zero surface: every arm ties; index 0 wins.
  auto [idx0, val0] = optimal_arm(s, arms);
  CHECK(idx0 == 0);
  CHECK(val0 == 0.0);

  // Positive effect on treatment 1: any +1 arm is optimal, lowest index
  // among them is arms[4] (levels +1,-1,-1).
  s.theta[1] = 3.0;
  auto [idx1, val1] = optimal_arm(s, arms);
  CHECK(idx1 == 4);
  CHECK(val1 == doctest::Approx(3.0));
}

TEST_CASE("optimal_arm agrees with exhaustive scan on random surfaces") {
  HpmConfig cfg;
  cfg.p_main_active = 0.7;
  RngStream rng(8, 8);
  const ArmSet arms = enumerate_arms(3);
  for (int r = 0; r < 200; ++r) {
    const ResponseSurface s =
        sample_surface(rng, cfg, 3, {NoiseKind::laplace, 1.0});
    auto [idx, val] = optimal_arm(s, arms);
    double best = -1e300;
    std::size_t best_idx = 0;
    for (std::size_t m = 0; m < arms.arms.size(); ++m) {
      const double v = brute_force_reward(s, arms.arms[m]);
      if (v > best) {
        best = v;
        best_idx = m;
      }
    }
    CHECK(idx == best_idx);
    CHECK(val == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("noise calibration: residual variance equals sigma^2 for both kinds") {
  ResponseSurface s;
  s.k = 1;
  s.theta = {0.0, 1.0};
  s.active = {0, 1};
  const Arm arm{{1}};
  RngStream rng(9, 9);
  for (NoiseKind kind : {NoiseKind::laplace, NoiseKind::gaussian}) {
    for (double sigma : {1.0, 5.0, 10.0}) {
      s.noise = {kind, sigma};
      const double expected = expected_reward(s, arm);
      const int n = 100000;
      double sum = 0, sumsq = 0;
      for (int i = 0; i < n; ++i) {
        const double r = observe_reward(s, arm, rng) - expected;
        sum += r;
        sumsq += r * r;
      }
      const double mean = sum / n;
      const double var = sumsq / n - mean * mean;
      CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
    }
  }
}

TEST_CASE("surface rejection: zero surfaces are resampled, degenerate configs fail") {
  const ArmSet arms = enumerate_arms(3);
  HpmConfig cfg;
  cfg.p_main_active = 0.05;  // frequent all-zero candidates
  cfg.heredity_2way = {0.0, 0.0, 0.0};
  cfg.heredity_3way = {0.0, 0.0, 0.0, 0.0};
  RngStream rng(10, 10);
  std::size_t rejections = 0;
  for (int i = 0; i < 200; ++i) {
    const SurfaceDraw draw =
        sample_admissible_surface(rng, cfg, arms, {NoiseKind::laplace, 1.0});
    rejections += draw.rejected;
    CHECK(draw.optimal_value > cfg.min_optimum);
  }
  CHECK(rejections > 0);

  cfg.p_main_active = 0.0;
  cfg.max_sample_attempts = 50;
  CHECK_THROWS_AS(
      sample_admissible_surface(rng, cfg, arms, {NoiseKind::laplace, 1.0}),
      std::runtime_error);
}

TEST_CASE("hpm config validation") {
  HpmConfig cfg;
  cfg.p_main_active = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
  cfg = HpmConfig{};
  cfg.sigma_main = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
  cfg = HpmConfig{};
  cfg.r2 = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}
