// Test-only step-by-step replays of the two bootstrap policies,
// independent of the library's solver (SVD pseudo-inverse instead of
// pivoted QR) and of its scoring loops. RNG consumption matches the
// library's contract: t index draws per replicate, nothing else.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "bandit/arms.hpp"
#include "oracles.hpp"

namespace replay {

inline double dotv(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Nearest-rank percentile via a full sort (the library selects instead).
inline double percentile(std::vector<double> v, double delta) {
  std::sort(v.begin(), v.end());
  auto k = static_cast<std::ptrdiff_t>(
      std::ceil(delta * static_cast<double>(v.size()) / 100.0));
  k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(v.size()));
  return v[static_cast<std::size_t>(k - 1)];
}

struct BootstrapReplay {
  bandit::Mat x;
  bandit::Vec r;

  void append(const bandit::Arm& arm, double reward) {
    x.append_row(bandit::expand_agent_features(arm));
    r.push_back(reward);
  }

  std::size_t select(const bandit::ArmSet& arms, bool resample_rows,
                     std::size_t reps, double delta,
                     bandit::RngStream& rng) const {
    const std::size_t t = x.rows();
    const std::size_t f = x.cols();
    const std::size_t m = arms.arms.size();

    bandit::Vec beta_star, fitted(t, 0.0), resid(t, 0.0);
    if (!resample_rows) {
      beta_star = oracle::svd_minnorm_solve(x, r);
      for (std::size_t i = 0; i < t; ++i) {
        fitted[i] = dotv(x.row(i), beta_star.data(), f);
        resid[i] = r[i] - fitted[i];
      }
    }

    std::vector<std::vector<double>> scores(m);
    for (std::size_t b = 0; b < reps; ++b) {
      std::vector<std::uint32_t> idx(t);
      for (auto& v : idx) v = rng.uniform_index(static_cast<std::uint32_t>(t));
      bandit::Vec beta;
      if (resample_rows) {
        bandit::Mat xb(t, f);
        bandit::Vec rb(t);
        for (std::size_t i = 0; i < t; ++i) {
          for (std::size_t j = 0; j < f; ++j) xb(i, j) = x(idx[i], j);
          rb[i] = r[idx[i]];
        }
        beta = oracle::svd_minnorm_solve(xb, rb);
      } else {
        bandit::Vec yb(t);
        for (std::size_t i = 0; i < t; ++i) yb[i] = fitted[i] + resid[idx[i]];
        beta = oracle::svd_minnorm_solve(x, yb);
      }
      for (std::size_t mi = 0; mi < m; ++mi)
        scores[mi].push_back(dotv(arms.agent_matrix.row(mi), beta.data(), f));
    }

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t mi = 0; mi < m; ++mi) {
      const double y = percentile(scores[mi], delta);
      if (y > best_score) {
        best_score = y;
        best = mi;
      }
    }
    return best;
  }
};

}  // namespace replay
