#include "bandit/arms.hpp"

namespace bandit {

std::size_t agent_feature_count(std::size_t k) { return 1 + k + k * (k - 1) / 2; }

std::size_t true_feature_count(std::size_t k) {
  return agent_feature_count(k) + k * (k - 1) * (k - 2) / 6;
}

namespace {

void expand(const Arm& arm, std::span<double> out, bool with_triples) {
  const std::size_t k = arm.levels.size();
  std::size_t p = 0;
  out[p++] = 1.0;
  for (std::size_t i = 0; i < k; ++i) out[p++] = arm.levels[i];
  for (std::size_t i = 0; i + 1 < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      out[p++] = static_cast<double>(arm.levels[i] * arm.levels[j]);
  if (with_triples) {
    for (std::size_t i = 0; i + 2 < k; ++i)
      for (std::size_t j = i + 1; j + 1 < k; ++j)
        for (std::size_t l = j + 1; l < k; ++l)
          out[p++] =
              static_cast<double>(arm.levels[i] * arm.levels[j] * arm.levels[l]);
  }
}

}  // namespace

void expand_agent_features(const Arm& arm, std::span<double> out) {
  detail::require(out.size() == agent_feature_count(arm.levels.size()),
                  "expand_agent_features: output size mismatch");
  expand(arm, out, false);
}

void expand_true_features(const Arm& arm, std::span<double> out) {
  detail::require(out.size() == true_feature_count(arm.levels.size()),
                  "expand_true_features: output size mismatch");
  expand(arm, out, true);
}

Vec expand_agent_features(const Arm& arm) {
  Vec out(agent_feature_count(arm.levels.size()));
  expand(arm, out, false);
  return out;
}

Vec expand_true_features(const Arm& arm) {
  Vec out(true_feature_count(arm.levels.size()));
  expand(arm, out, true);
  return out;
}

ArmSet enumerate_arms(std::size_t k) {
  detail::require(k >= 1 && k <= 20, "enumerate_arms: K must be in [1, 20]");
  const std::size_t m = std::size_t{1} << k;
  ArmSet set;
  set.k = k;
  set.arms.reserve(m);
  set.agent_matrix = Mat(m, agent_feature_count(k));
  set.true_matrix = Mat(m, true_feature_count(k));
  for (std::size_t idx = 0; idx < m; ++idx) {
    Arm arm;
    arm.levels.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const bool set_bit = (idx >> (k - 1 - j)) & 1u;
      arm.levels[j] = set_bit ? 1 : -1;
    }
    expand(arm, {set.agent_matrix.row(idx), set.agent_matrix.cols()}, false);
    expand(arm, {set.true_matrix.row(idx), set.true_matrix.cols()}, true);
    set.arms.push_back(std::move(arm));
  }
  return set;
}

std::size_t arm_index(const Arm& arm) {
  const std::size_t k = arm.levels.size();
  std::size_t idx = 0;
  for (std::size_t j = 0; j < k; ++j)
    if (arm.levels[j] > 0) idx |= std::size_t{1} << (k - 1 - j);
  return idx;
}

}  // namespace bandit
