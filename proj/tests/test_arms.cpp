#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bandit/arms.hpp"

using namespace bandit;

TEST_CASE("feature counts") {
  CHECK(agent_feature_count(7) == 29);
  CHECK(true_feature_count(7) == 64);
  CHECK(agent_feature_count(3) == 7);
  CHECK(true_feature_count(3) == 8);
  CHECK(agent_feature_count(1) == 2);
  CHECK(true_feature_count(1) == 2);
}

TEST_CASE("enumerate_arms: base case K = 1") {
  const ArmSet set = enumerate_arms(1);
  REQUIRE(set.arms.size() == 2);
  CHECK(set.arms[0].levels[0] == -1);
  CHECK(set.arms[1].levels[0] == +1);
}

TEST_CASE("enumerate_arms: K = 7 shapes") {
  const ArmSet set = enumerate_arms(7);
  CHECK(set.arms.size() == 128);
  CHECK(set.agent_matrix.rows() == 128);
  CHECK(set.agent_matrix.cols() == 29);
  CHECK(set.true_matrix.rows() == 128);
  CHECK(set.true_matrix.cols() == 64);
}

TEST_CASE("enumerate_arms: K = 3 true matrix has 8 columns") {
  const ArmSet set = enumerate_arms(3);
  CHECK(set.arms.size() == 8);
  CHECK(set.true_matrix.cols() == 8);
}

TEST_CASE("enumerate_arms: lexicographic order, unique arms, index round trip") {
  const ArmSet set = enumerate_arms(4);
  for (std::size_t i = 0; i + 1 < set.arms.size(); ++i)
    CHECK(std::lexicographical_compare(set.arms[i].levels.begin(),
                                       set.arms[i].levels.end(),
                                       set.arms[i + 1].levels.begin(),
                                       set.arms[i + 1].levels.end()));
  for (std::size_t i = 0; i < set.arms.size(); ++i)
    CHECK(arm_index(set.arms[i]) == i);
  CHECK_THROWS_AS(enumerate_arms(0), ContractViolation);
  CHECK_THROWS_AS(enumerate_arms(21), ContractViolation);
}

TEST_CASE("expand_agent_features: all-ones and all-minus-ones arms") {
  Arm plus{std::vector<std::int8_t>(7, 1)};
  const Vec fp = expand_agent_features(plus);
  REQUIRE(fp.size() == 29);
  for (double v : fp) CHECK(v == 1.0);

  Arm minus{std::vector<std::int8_t>(7, -1)};
  const Vec fm = expand_agent_features(minus);
  CHECK(fm[0] == 1.0);
  for (std::size_t i = 1; i <= 7; ++i) CHECK(fm[i] == -1.0);
  for (std::size_t i = 8; i < 29; ++i) CHECK(fm[i] == 1.0);  // (-1)^2
}

TEST_CASE("expand features: interaction entries are parent products") {
  Arm arm{{+1, -1, +1}};
  const Vec f = expand_agent_features(arm);
  // Layout: 1, x1, x2, x3, x1x2, x1x3, x2x3
  CHECK(f[4] == -1.0);
  CHECK(f[5] == +1.0);
  CHECK(f[6] == -1.0);

  const Vec t = expand_true_features(arm);
  CHECK(t[7] == -1.0);  // x1 x2 x3

  Arm minus3{std::vector<std::int8_t>(7, -1)};
  const Vec tm = expand_true_features(minus3);
  for (std::size_t i = 29; i < 64; ++i) CHECK(tm[i] == -1.0);  // (-1)^3
}

TEST_CASE("agent features are an exact prefix of true features") {
  const ArmSet set = enumerate_arms(5);
  for (const Arm& arm : set.arms) {
    const Vec a = expand_agent_features(arm);
    const Vec t = expand_true_features(arm);
    REQUIRE(t.size() >= a.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == t[i]);
  }
}

TEST_CASE("full arm set: column balance and pairwise orthogonality") {
  const ArmSet set = enumerate_arms(5);
  const Mat& t = set.true_matrix;
  for (std::size_t j = 1; j < t.cols(); ++j) {
    double sum = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) sum += t(i, j);
    CHECK(sum == 0.0);
  }
  for (std::size_t a = 1; a < t.cols(); ++a)
    for (std::size_t b = a + 1; b < t.cols(); ++b) {
      double dot = 0;
      for (std::size_t i = 0; i < t.rows(); ++i) dot += t(i, a) * t(i, b);
      CHECK(dot == 0.0);
    }
}
