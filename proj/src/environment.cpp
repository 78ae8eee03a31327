#include "bandit/environment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bandit/kernels.hpp"

namespace bandit {

namespace {

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void HpmConfig::validate() const {
  detail::require(is_prob(p_main_active), "hpm: p_main_active outside [0, 1]");
  detail::require(sigma_main > 0.0, "hpm: sigma_main must be positive");
  detail::require(r2 > 0.0 && r2 <= 1.0, "hpm: r2 outside (0, 1]");
  detail::require(r3 > 0.0 && r3 <= 1.0, "hpm: r3 outside (0, 1]");
  for (double p : heredity_2way)
    detail::require(is_prob(p), "hpm: heredity_2way outside [0, 1]");
  for (double p : heredity_3way)
    detail::require(is_prob(p), "hpm: heredity_3way outside [0, 1]");
  detail::require(sigma_intercept >= 0.0, "hpm: sigma_intercept must be >= 0");
  detail::require(inactive_sigma >= 0.0, "hpm: inactive_sigma must be >= 0");
  detail::require(min_optimum > 0.0, "hpm: min_optimum must be positive");
  detail::require(max_sample_attempts >= 1, "hpm: max_sample_attempts >= 1");
}

ResponseSurface sample_surface(RngStream& rng, const HpmConfig& cfg,
                               std::size_t k, NoiseModel noise) {
  cfg.validate();
  detail::require(k >= 1 && k <= 20, "sample_surface: K in [1, 20]");
  detail::require(noise.sigma_eps >= 0.0, "sample_surface: sigma_eps < 0");

  ResponseSurface s;
  s.k = k;
  s.noise = noise;
  const std::size_t n = true_feature_count(k);
  s.theta.assign(n, 0.0);
  s.active.assign(n, 0);

  auto draw_coef = [&](std::size_t idx, bool active, double sigma_active) {
    if (active) {
      s.active[idx] = 1;
      s.theta[idx] = sigma_active * rng.standard_normal();
    } else if (cfg.inactive_sigma > 0.0) {
      s.theta[idx] = cfg.inactive_sigma * rng.standard_normal();
    }
  };

  std::size_t p = 1;
  for (std::size_t i = 0; i < k; ++i, ++p)
    draw_coef(p, rng.uniform01() < cfg.p_main_active, cfg.sigma_main);

  const std::uint8_t* main_active = s.active.data() + 1;
  for (std::size_t i = 0; i + 1 < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j, ++p) {
      const int parents = main_active[i] + main_active[j];
      draw_coef(p, rng.uniform01() < cfg.heredity_2way[parents],
                cfg.r2 * cfg.sigma_main);
    }
  for (std::size_t i = 0; i + 2 < k; ++i)
    for (std::size_t j = i + 1; j + 1 < k; ++j)
      for (std::size_t l = j + 1; l < k; ++l, ++p) {
        const int parents = main_active[i] + main_active[j] + main_active[l];
        draw_coef(p, rng.uniform01() < cfg.heredity_3way[parents],
                  cfg.r3 * cfg.sigma_main);
      }

  if (cfg.sigma_intercept > 0.0) {
    s.active[0] = 1;
    s.theta[0] = cfg.sigma_intercept * rng.standard_normal();
  }
  return s;
}

SurfaceDraw sample_admissible_surface(RngStream& rng, const HpmConfig& cfg,
                                      const ArmSet& arms, NoiseModel noise) {
  SurfaceDraw draw;
  for (std::size_t attempt = 0; attempt < cfg.max_sample_attempts; ++attempt) {
    ResponseSurface s = sample_surface(rng, cfg, arms.k, noise);
    const auto [idx, value] = optimal_arm(s, arms);
    if (value > cfg.min_optimum) {
      draw.surface = std::move(s);
      draw.optimal_index = idx;
      draw.optimal_value = value;
      return draw;
    }
    ++draw.rejected;
  }
  throw std::runtime_error(
      "sample_admissible_surface: rejected " +
      std::to_string(cfg.max_sample_attempts) +
      " consecutive candidates (optimum <= min_optimum); check the HPM "
      "configuration");
}

double expected_reward(const ResponseSurface& s, const Arm& arm) {
  detail::require(arm.levels.size() == s.k,
                  "expected_reward: arm dimension mismatch");
  const Vec u = expand_true_features(arm);
  return kern::dot(s.theta.data(), u.data(), u.size());
}

Vec expected_rewards(const ResponseSurface& s, const ArmSet& arms) {
  detail::require(arms.k == s.k, "expected_rewards: arm set mismatch");
  Vec out(arms.arms.size());
  kern::gemv_rm(arms.true_matrix.data(), arms.true_matrix.rows(),
                arms.true_matrix.cols(), s.theta.data(), out.data());
  return out;
}

double noise_draw(const NoiseModel& noise, RngStream& rng) {
  if (noise.sigma_eps == 0.0) return 0.0;
  return noise.kind == NoiseKind::laplace
             ? sample_laplace(rng, noise.laplace_scale())
             : sample_gaussian(rng, noise.sigma_eps);
}

double observe_reward(const ResponseSurface& s, const Arm& arm,
                      RngStream& rng) {
  return expected_reward(s, arm) + noise_draw(s.noise, rng);
}

std::pair<std::size_t, double> optimal_arm(const ResponseSurface& s,
                                           const ArmSet& arms) {
  detail::require(!arms.arms.empty(), "optimal_arm: empty arm set");
  const Vec values = expected_rewards(s, arms);
  std::size_t best = 0;
  for (std::size_t m = 1; m < values.size(); ++m)
    if (values[m] > values[best]) best = m;
  return {best, values[best]};
}

}  // namespace bandit
