#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <utility>

#include "bandit/arms.hpp"

namespace bandit {

enum class NoiseKind { laplace, gaussian };

// Reward noise at a target standard deviation. For Laplace the internal
// scale is b = sigma_eps / sqrt(2), so Var = sigma_eps^2 for both kinds and
// the two configurations are comparable at equal sigma_eps.
struct NoiseModel {
  NoiseKind kind = NoiseKind::laplace;
  double sigma_eps = 1.0;

  double laplace_scale() const { return sigma_eps / std::numbers::sqrt2; }
};

// Hierarchical probability meta-model over regression coefficients:
// sparsity (activity flags), heredity (interaction activity conditioned on
// the number of active parents) and hierarchy (variance ratios by effect
// order). Only p_main_active and sigma_main are calibrated constants; the
// remaining defaults are configurable stand-ins, not ground truth.
struct HpmConfig {
  double p_main_active = 0.41;
  double sigma_main = 10.0;
  double r2 = 1.0;  // active 2-way std = r2 * sigma_main
  double r3 = 1.0;  // active 3-way std = r3 * sigma_main
  // Activation probability of a 2-way term given 0, 1 or 2 active parents.
  std::array<double, 3> heredity_2way{0.0048, 0.045, 0.33};
  // Same for 3-way terms given 0..3 active parents.
  std::array<double, 4> heredity_3way{0.0005, 0.0048, 0.045, 0.33};
  double sigma_intercept = 0.0;
  // Inactive coefficients are N(0, inactive_sigma^2); 0 means exactly zero.
  double inactive_sigma = 0.0;
  // Surfaces whose best expected reward falls at or below this threshold
  // are rejected and resampled (the performance ratio needs a positive
  // optimum).
  double min_optimum = 1e-6;
  std::size_t max_sample_attempts = 1000;

  void validate() const;
};

// Ground truth: coefficients over the extended (three-way) feature space
// plus the observation noise model.
struct ResponseSurface {
  std::size_t k = 0;
  Vec theta;                         // true_feature_count(k) entries
  std::vector<std::uint8_t> active;  // same length
  NoiseModel noise;
};

// One ancestral pass over the coefficient network: mains, then 2-way,
// then 3-way terms, then the intercept.
ResponseSurface sample_surface(RngStream& rng, const HpmConfig& cfg,
                               std::size_t k, NoiseModel noise);

struct SurfaceDraw {
  ResponseSurface surface;
  std::size_t optimal_index = 0;
  double optimal_value = 0.0;
  std::size_t rejected = 0;  // candidates discarded before acceptance
};

// sample_surface with the non-positive-optimum rejection rule applied.
SurfaceDraw sample_admissible_surface(RngStream& rng, const HpmConfig& cfg,
                                      const ArmSet& arms, NoiseModel noise);

// Noise-free reward: theta . true_features(arm).
double expected_reward(const ResponseSurface& s, const Arm& arm);
// Expected rewards for every arm in the set (one gemv).
Vec expected_rewards(const ResponseSurface& s, const ArmSet& arms);
// expected_reward plus one noise draw (none consumed when sigma_eps == 0).
double observe_reward(const ResponseSurface& s, const Arm& arm, RngStream& rng);
double noise_draw(const NoiseModel& noise, RngStream& rng);

// Argmax of expected reward over the set; ties go to the lowest index.
std::pair<std::size_t, double> optimal_arm(const ResponseSurface& s,
                                           const ArmSet& arms);

}  // namespace bandit
