#pragma once

#include <cstdint>
#include <vector>

#include "bandit/numerics.hpp"

namespace bandit {

// One treatment combination under two-level factorial coding: -1 absent,
// +1 present.
struct Arm {
  std::vector<std::int8_t> levels;
};

// Feature layout, shared by both expansions: intercept, main effects in
// index order, then pairs (i,j) i<j and triples (i,j,k) i<j<k, each in
// lexicographic order of the index tuple.
std::size_t agent_feature_count(std::size_t k);  // 1 + k + C(k,2)
std::size_t true_feature_count(std::size_t k);   // ... + C(k,3)

// Agent-visible model columns: intercept, mains, two-way interactions.
Vec expand_agent_features(const Arm& arm);
// Environment truth columns: agent features plus three-way interactions.
// The agent expansion is always an exact prefix of this one.
Vec expand_true_features(const Arm& arm);

void expand_agent_features(const Arm& arm, std::span<double> out);
void expand_true_features(const Arm& arm, std::span<double> out);

// The full combinatorial arm space with both feature matrices.
struct ArmSet {
  std::size_t k = 0;
  std::vector<Arm> arms;  // 2^k arms, lexicographic in levels (-1 before +1)
  Mat agent_matrix;       // 2^k x agent_feature_count(k)
  Mat true_matrix;        // 2^k x true_feature_count(k)
};

// All 2^k arms in lexicographic order of levels.
ArmSet enumerate_arms(std::size_t k);

// Index of an arm within enumerate_arms(k) ordering.
std::size_t arm_index(const Arm& arm);

}  // namespace bandit
