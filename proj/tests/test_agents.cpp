#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bandit/agents.hpp"
#include "bandit/simulation.hpp"
#include "oracles.hpp"
#include "replay_oracle.hpp"

using namespace bandit;
using replay::BootstrapReplay;
using replay::dotv;

namespace {

struct Fixture {
  ArmSet arms;
  InitialDesign design;
  ResponseSurface surface;
  Vec expected;

  explicit Fixture(std::size_t k, std::size_t runs, std::uint64_t seed,
                   double p_main = 0.7) {
    arms = enumerate_arms(k);
    RngStream drng(seed, 100);
    design = generate_initial_design(k, runs, drng);
    HpmConfig hpm;
    hpm.p_main_active = p_main;
    RngStream srng(seed, 200);
    surface =
        sample_admissible_surface(srng, hpm, arms, {NoiseKind::laplace, 1.0})
            .surface;
    expected = expected_rewards(surface, arms);
  }

  Vec observe_design(RngStream& rng) const {
    Vec rewards(design.runs.size());
    for (std::size_t i = 0; i < rewards.size(); ++i)
      rewards[i] = expected[arm_index(design.runs[i])] +
                   noise_draw(surface.noise, rng);
    return rewards;
  }
};

}  // namespace

TEST_CASE("x_random matches a step-by-step replay over 20 trials") {
  Fixture fx(3, 8, 11);
  Hyperparams hp;
  hp.b = 50;
  hp.delta = 90.0;

  RngStream impl_rng(77, 1), replay_rng(77, 1);
  const Vec init = fx.observe_design(impl_rng);
  {
    // Keep the replay stream aligned with the implementation stream.
    Vec ignored = fx.observe_design(replay_rng);
    REQUIRE(ignored == init);
  }

  Agent agent(AgentKind::x_random, fx.design, init, hp);
  BootstrapReplay replay{fx.design.model_matrix, init};

  for (int t = 0; t < 20; ++t) {
    const std::size_t got = agent.xrandom_select(fx.arms, impl_rng);
    const std::size_t want =
        replay.select(fx.arms, true, hp.b, hp.delta, replay_rng);
    REQUIRE(got == want);
    const double reward =
        fx.expected[got] + noise_draw(fx.surface.noise, impl_rng);
    const double reward_replay =
        fx.expected[want] + noise_draw(fx.surface.noise, replay_rng);
    REQUIRE(reward == reward_replay);
    agent.update(fx.arms.arms[got], reward);
    replay.append(fx.arms.arms[want], reward_replay);
  }
}

TEST_CASE("x_fixed matches a step-by-step replay over 20 trials") {
  Fixture fx(3, 8, 13);
  Hyperparams hp;
  hp.b = 50;
  hp.delta = 95.0;

  RngStream impl_rng(78, 2), replay_rng(78, 2);
  const Vec init = fx.observe_design(impl_rng);
  {
    Vec ignored = fx.observe_design(replay_rng);
    REQUIRE(ignored == init);
  }

  Agent agent(AgentKind::x_fixed, fx.design, init, hp);
  BootstrapReplay replay{fx.design.model_matrix, init};

  for (int t = 0; t < 20; ++t) {
    const std::size_t got = agent.xfixed_select(fx.arms, impl_rng);
    const std::size_t want =
        replay.select(fx.arms, false, hp.b, hp.delta, replay_rng);
    REQUIRE(got == want);
    const double reward =
        fx.expected[got] + noise_draw(fx.surface.noise, impl_rng);
    noise_draw(fx.surface.noise, replay_rng);
    agent.update(fx.arms.arms[got], reward);
    replay.append(fx.arms.arms[got], reward);
  }
}

TEST_CASE("degenerate exploration: all five agents agree on 100 random histories") {
  const ArmSet arms = enumerate_arms(3);
  RngStream drng(5, 3);
  const InitialDesign design = generate_initial_design(3, 8, drng);
  RngStream rng(99, 4);

  for (int h = 0; h < 100; ++h) {
    // Random history: design rewards plus a few extra random pulls.
    Vec rewards(design.runs.size());
    for (auto& v : rewards) v = 10.0 * (2.0 * rng.uniform01() - 1.0);

    Hyperparams boot;
    boot.b = 1;
    boot.identity_resample = true;
    boot.delta = 100.0;
    Hyperparams greedy;
    greedy.lambda = 0.0;
    greedy.radius_override = 0.0;
    greedy.linucb_alpha = 0.0;
    greedy.ts_v = 0.0;

    std::vector<Agent> agents;
    agents.emplace_back(AgentKind::x_random, design, rewards, boot);
    agents.emplace_back(AgentKind::x_fixed, design, rewards, boot);
    agents.emplace_back(AgentKind::oful, design, rewards, greedy);
    agents.emplace_back(AgentKind::linucb, design, rewards, greedy);
    agents.emplace_back(AgentKind::thompson, design, rewards, greedy);

    const std::size_t extra = rng.uniform_index(6);
    for (std::size_t e = 0; e < extra; ++e) {
      const std::size_t m = rng.uniform_index(8);
      const double reward = 10.0 * (2.0 * rng.uniform01() - 1.0);
      for (Agent& a : agents) a.update(arms.arms[m], reward);
    }

    // Greedy reference: argmax of U . beta on the least-squares fit.
    const Vec beta = least_squares(agents[0].history_x(), agents[0].history_r());
    std::size_t want = 0;
    double best = -1e300;
    for (std::size_t m = 0; m < arms.arms.size(); ++m) {
      const double s = dotv(arms.agent_matrix.row(m), beta.data(), beta.size());
      if (s > best) {
        best = s;
        want = m;
      }
    }

    for (Agent& a : agents) {
      RngStream select_rng(1000 + h, 5);
      REQUIRE(a.select(arms, select_rng) == want);
    }
  }
}

TEST_CASE("x_fixed with zero residuals is greedy for every seed and B") {
  // Noiseless well-specified rewards with a unique optimum: residuals are
  // at rounding level, so every replicate refit returns beta* and the
  // selection cannot move between seeds or replicate counts.
  const ArmSet arms = enumerate_arms(3);
  RngStream drng(17, 100);
  const InitialDesign design = generate_initial_design(3, 8, drng);
  ResponseSurface s;
  s.k = 3;
  s.theta = {0.0, 5.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  s.active = {0, 1, 1, 1, 0, 0, 0, 0};
  const Vec expected = expected_rewards(s, arms);

  Vec exact(design.runs.size());
  for (std::size_t i = 0; i < exact.size(); ++i)
    exact[i] = expected[arm_index(design.runs[i])];

  std::size_t reference = SIZE_MAX;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (std::size_t b : {1u, 7u, 40u}) {
      Hyperparams hp;
      hp.b = b;
      hp.delta = 95.0;
      Agent agent(AgentKind::x_fixed, design, exact, hp);
      RngStream rng(seed, 6);
      const std::size_t got = agent.xfixed_select(arms, rng);
      if (reference == SIZE_MAX) reference = got;
      CHECK(got == reference);
    }
  }
  CHECK(expected[reference] == doctest::Approx(8.0));  // the unique optimum
}

TEST_CASE("residual bootstrap refits are mean-centered on beta*") {
  Fixture fx(3, 8, 19);
  RngStream rng(21, 7);
  Vec rewards(fx.design.runs.size());
  for (std::size_t i = 0; i < rewards.size(); ++i)
    rewards[i] = fx.expected[arm_index(fx.design.runs[i])] +
                 sample_laplace(rng, 1.0);

  const Mat& x = fx.design.model_matrix;
  const Vec beta_star = least_squares(x, rewards);
  const std::size_t t = x.rows(), f = x.cols();
  Vec fitted(t), resid(t);
  for (std::size_t i = 0; i < t; ++i) {
    fitted[i] = dotv(x.row(i), beta_star.data(), f);
    resid[i] = rewards[i] - fitted[i];
  }

  const int reps = 4000;
  Vec mean(f, 0.0);
  Vec yb(t);
  for (int b = 0; b < reps; ++b) {
    const auto idx = sample_indices_with_replacement(rng, t);
    for (std::size_t i = 0; i < t; ++i) yb[i] = fitted[i] + resid[idx[i]];
    const Vec beta = least_squares(x, yb);
    for (std::size_t j = 0; j < f; ++j) mean[j] += beta[j];
  }
  for (std::size_t j = 0; j < f; ++j) {
    mean[j] /= reps;
    CHECK(mean[j] == doctest::Approx(beta_star[j]).epsilon(0.0).scale(0.0).epsilon(1e9));
    CHECK(std::abs(mean[j] - beta_star[j]) < 0.08);
  }
}

TEST_CASE("linucb equals oful when alpha is set to the computed radius") {
  Fixture fx(3, 8, 23);
  RngStream rng(31, 8);
  for (int trial = 0; trial < 25; ++trial) {
    Vec rewards(fx.design.runs.size());
    for (auto& v : rewards) v = 5.0 * (2.0 * rng.uniform01() - 1.0);

    Hyperparams oful_hp;
    oful_hp.lambda = 1.0;
    oful_hp.oful_confidence = 0.05;
    oful_hp.subgaussian_r = 1.3;
    oful_hp.theta_bound = 2.0;
    Agent oful_agent(AgentKind::oful, fx.design, rewards, oful_hp);

    // Recompute the radius from the same sufficient statistics.
    const std::size_t f = fx.design.model_matrix.cols();
    std::vector<double> v = oful_agent.gram();
    for (std::size_t i = 0; i < f; ++i) v[i * f + i] += oful_hp.lambda;
    REQUIRE(cholesky_in_place(v, f));
    const double radius =
        oful_hp.subgaussian_r *
            std::sqrt(2.0 * std::log(1.0 / oful_hp.oful_confidence) +
                      chol_logdet(v, f) -
                      double(f) * std::log(oful_hp.lambda)) +
        std::sqrt(oful_hp.lambda) * oful_hp.theta_bound;

    Hyperparams lin_hp;
    lin_hp.lambda = oful_hp.lambda;
    lin_hp.linucb_alpha = radius;
    Agent lin_agent(AgentKind::linucb, fx.design, rewards, lin_hp);

    CHECK(oful_agent.oful_select(fx.arms) == lin_agent.linucb_select(fx.arms));
  }
}

TEST_CASE("linucb limits: alpha 0 is greedy, huge alpha chases uncertainty") {
  Fixture fx(3, 8, 29);
  RngStream rng(41, 9);
  Vec rewards(fx.design.runs.size());
  for (auto& v : rewards) v = 3.0 * (2.0 * rng.uniform01() - 1.0);

  Hyperparams hp;
  hp.lambda = 1.0;
  hp.linucb_alpha = 0.0;
  Agent greedy(AgentKind::linucb, fx.design, rewards, hp);
  // Unbalance the uncertainty: pull arm 3 a few times.
  for (int i = 0; i < 6; ++i) greedy.update(fx.arms.arms[3], 0.5);

  const Vec beta = ridge_solve(greedy.history_x(), greedy.history_r(), 1.0);
  std::size_t want = 0;
  double best = -1e300;
  for (std::size_t m = 0; m < fx.arms.arms.size(); ++m) {
    const double s =
        dotv(fx.arms.agent_matrix.row(m), beta.data(), beta.size());
    if (s > best) {
      best = s;
      want = m;
    }
  }
  CHECK(greedy.linucb_select(fx.arms) == want);

  // With alpha huge the exploration term dominates: the chosen arm must
  // maximize x' A^{-1} x. Pull a lopsided mix so the uncertainties are
  // pairwise distinct.
  Hyperparams wide = hp;
  wide.linucb_alpha = 1e9;
  Agent explorer(AgentKind::linucb, fx.design, rewards, wide);
  const int pulls[] = {5, 3, 3, 7, 1, 0, 2, 1};
  for (std::size_t m = 0; m < 8; ++m)
    for (int i = 0; i < pulls[m]; ++i) explorer.update(fx.arms.arms[m], 0.5);

  const std::size_t f = explorer.history_x().cols();
  std::vector<double> v = explorer.gram();
  for (std::size_t i = 0; i < f; ++i) v[i * f + i] += 1.0;
  REQUIRE(cholesky_in_place(v, f));
  std::size_t most_uncertain = 0;
  double umax = -1, second = -1;
  Vec z(f);
  for (std::size_t m = 0; m < fx.arms.arms.size(); ++m) {
    chol_forward(v, f, {fx.arms.agent_matrix.row(m), f}, z);
    const double unc = dotv(z.data(), z.data(), f);
    if (unc > umax) {
      second = umax;
      umax = unc;
      most_uncertain = m;
    } else if (unc > second) {
      second = unc;
    }
  }
  REQUIRE(umax > second * (1 + 1e-9));  // unique maximum
  CHECK(explorer.linucb_select(fx.arms) == most_uncertain);
}

TEST_CASE("thompson selection frequency matches the Gaussian orthant probability") {
  // Two-arm toy (K = 1): features (1, -1) and (1, +1).
  const ArmSet arms = enumerate_arms(1);
  InitialDesign design;
  design.k = 1;
  design.model_matrix = Mat(4, 2);
  const int lv[4] = {-1, 1, -1, 1};
  for (int i = 0; i < 4; ++i) {
    design.runs.push_back(Arm{{static_cast<std::int8_t>(lv[i])}});
    design.model_matrix(i, 0) = 1.0;
    design.model_matrix(i, 1) = lv[i];
  }
  const Vec rewards = {0.4, 0.7, 0.2, 0.6};

  Hyperparams hp;
  hp.lambda = 1.0;
  hp.ts_v = 1.0;
  Agent agent(AgentKind::thompson, design, rewards, hp);

  // Closed form: P(select arm 1) = Phi(d.theta_hat / (v sqrt(d' V^-1 d)))
  // with d = u1 - u0 = (0, 2).
  const Vec theta = ridge_solve(design.model_matrix, rewards, hp.lambda);
  std::vector<double> v = agent.gram();
  v[0] += 1.0;
  v[3] += 1.0;
  const double det = v[0] * v[3] - v[1] * v[2];
  // d' V^-1 d for d = (0, 2): 4 * V^-1[1][1] = 4 * v[0] / det.
  const double quad = 4.0 * v[0] / det;
  const double mean_gap = 2.0 * theta[1];
  const double p1 =
      0.5 * std::erfc(-(mean_gap / (hp.ts_v * std::sqrt(quad))) / std::sqrt(2.0));

  RngStream rng(51, 10);
  const int n = 20000;
  int picked1 = 0;
  for (int i = 0; i < n; ++i)
    if (agent.thompson_select(arms, rng) == 1) ++picked1;
  const double freq = double(picked1) / n;
  CHECK(std::abs(freq - p1) < 4.0 * std::sqrt(p1 * (1 - p1) / n));

  // v = 0 collapses to the greedy argmax, consuming no randomness.
  Hyperparams hp0 = hp;
  hp0.ts_v = 0.0;
  Agent greedy(AgentKind::thompson, design, rewards, hp0);
  RngStream a(1, 1), b(1, 1);
  const std::size_t pick = greedy.thompson_select(arms, a);
  CHECK(pick == (theta[1] > 0 ? 1u : 0u));
  CHECK(a.next_u64() == b.next_u64());

  // Fixed seed, fixed arm.
  RngStream c(9, 9), d(9, 9);
  CHECK(agent.thompson_select(arms, c) == agent.thompson_select(arms, d));
}

TEST_CASE("update: appends one row and keeps sufficient statistics in sync") {
  Fixture fx(3, 8, 31);
  RngStream rng(61, 11);
  Vec rewards(fx.design.runs.size());
  for (auto& v : rewards) v = 2.0 * rng.uniform01() - 1.0;
  Agent agent(AgentKind::linucb, fx.design, rewards, Hyperparams{});

  for (int step = 0; step < 25; ++step) {
    const std::size_t before = agent.trials();
    const std::size_t m = rng.uniform_index(8);
    agent.update(fx.arms.arms[m], 2.0 * rng.uniform01() - 1.0);
    CHECK(agent.trials() == before + 1);

    const std::vector<double> direct = gram_matrix(agent.history_x());
    const std::vector<double>& incremental = agent.gram();
    for (std::size_t i = 0; i < direct.size(); ++i)
      CHECK(incremental[i] == doctest::Approx(direct[i]).epsilon(1e-9));

    Vec xty(agent.history_x().cols(), 0.0);
    for (std::size_t i = 0; i < agent.history_x().rows(); ++i)
      for (std::size_t j = 0; j < xty.size(); ++j)
        xty[j] += agent.history_r()[i] * agent.history_x()(i, j);
    for (std::size_t j = 0; j < xty.size(); ++j)
      CHECK(agent.xty()[j] == doctest::Approx(xty[j]).epsilon(1e-9));
  }
}

TEST_CASE("bootstrap selection is invariant under positive reward scaling") {
  Fixture fx(3, 8, 37);
  RngStream rng(71, 12);
  Vec rewards(fx.design.runs.size());
  for (auto& v : rewards) v = 4.0 * (2.0 * rng.uniform01() - 1.0);

  for (AgentKind kind : {AgentKind::x_random, AgentKind::x_fixed}) {
    for (double c : {2.0, 0.5, 3.7}) {
      Hyperparams hp;
      hp.b = 40;
      hp.delta = 90.0;
      Agent base(kind, fx.design, rewards, hp);
      Vec scaled = rewards;
      for (auto& v : scaled) v *= c;
      Agent scaled_agent(kind, fx.design, scaled, hp);
      RngStream r1(81, 13), r2(81, 13);
      CHECK(base.select(fx.arms, r1) == scaled_agent.select(fx.arms, r2));
    }
  }
}

TEST_CASE("all-zero rewards tie every arm; index 0 wins everywhere") {
  Fixture fx(3, 8, 41);
  const Vec zero(fx.design.runs.size(), 0.0);
  Hyperparams boot;
  boot.b = 10;
  Hyperparams greedy;
  greedy.radius_override = 0.0;
  greedy.linucb_alpha = 0.0;
  greedy.ts_v = 0.0;

  RngStream rng(91, 14);
  Agent xr(AgentKind::x_random, fx.design, zero, boot);
  CHECK(xr.select(fx.arms, rng) == 0);
  Agent xf(AgentKind::x_fixed, fx.design, zero, boot);
  CHECK(xf.select(fx.arms, rng) == 0);
  Agent of(AgentKind::oful, fx.design, zero, greedy);
  CHECK(of.select(fx.arms, rng) == 0);
  Agent lin(AgentKind::linucb, fx.design, zero, greedy);
  CHECK(lin.select(fx.arms, rng) == 0);
  Agent ts(AgentKind::thompson, fx.design, zero, greedy);
  CHECK(ts.select(fx.arms, rng) == 0);
}

TEST_CASE("noiseless well-specified surfaces: full-rank resamples pick the optimum") {
  // No three-way terms, sigma = 0: the agent model is exactly correct.
  HpmConfig hpm;
  hpm.p_main_active = 0.7;
  hpm.heredity_3way = {0.0, 0.0, 0.0, 0.0};
  const ArmSet arms = enumerate_arms(3);
  RngStream drng(3, 15);
  const InitialDesign design = generate_initial_design(3, 8, drng);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream srng(seed, 16);
    const SurfaceDraw draw =
        sample_admissible_surface(srng, hpm, arms, {NoiseKind::laplace, 0.0});
    const Vec expected = expected_rewards(draw.surface, arms);
    Vec exact(design.runs.size());
    for (std::size_t i = 0; i < exact.size(); ++i)
      exact[i] = expected[arm_index(design.runs[i])];

    Hyperparams identity;
    identity.b = 5;
    identity.identity_resample = true;  // forced full-rank resample
    Hyperparams greedy;
    greedy.lambda = 0.0;
    greedy.radius_override = 0.0;
    greedy.linucb_alpha = 0.0;
    greedy.ts_v = 0.0;
    Hyperparams residual;
    residual.b = 30;  // real resampling; zero residuals make it exact

    std::vector<Agent> agents;
    agents.emplace_back(AgentKind::x_random, design, exact, identity);
    agents.emplace_back(AgentKind::x_fixed, design, exact, residual);
    agents.emplace_back(AgentKind::oful, design, exact, greedy);
    agents.emplace_back(AgentKind::linucb, design, exact, greedy);
    agents.emplace_back(AgentKind::thompson, design, exact, greedy);

    RngStream rng(seed, 17);
    for (int t = 0; t < 10; ++t) {
      for (Agent& a : agents) {
        const std::size_t m = a.select(arms, rng);
        CHECK(expected[m] == doctest::Approx(draw.optimal_value).epsilon(1e-12));
        a.update(arms.arms[m], expected[m]);
      }
    }
  }
}

TEST_CASE("init_agent contract checks") {
  Fixture fx(3, 8, 43);
  CHECK_THROWS_AS(
      Agent(AgentKind::oful, fx.design, Vec{}, Hyperparams{}),
      ContractViolation);
  CHECK_THROWS_AS(
      Agent(AgentKind::oful, fx.design, Vec(5, 1.0), Hyperparams{}),
      ContractViolation);

  Hyperparams bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(Agent(AgentKind::x_random, fx.design, Vec(8, 1.0), bad),
                  ContractViolation);
  Hyperparams bad2;
  bad2.b = 0;
  CHECK_THROWS_AS(Agent(AgentKind::x_random, fx.design, Vec(8, 1.0), bad2),
                  ContractViolation);
  Hyperparams bad3;
  bad3.lambda = 0.0;  // oful radius undefined without an override
  CHECK_THROWS_AS(Agent(AgentKind::oful, fx.design, Vec(8, 1.0), bad3),
                  ContractViolation);
}

TEST_CASE("identical inputs and streams give identical selections") {
  Fixture fx(3, 8, 47);
  RngStream rng(101, 18);
  Vec rewards(fx.design.runs.size());
  for (auto& v : rewards) v = 2.0 * rng.uniform01() - 1.0;

  for (AgentKind kind : kAllAgentKinds) {
    Hyperparams hp;
    hp.b = 20;
    Agent a(kind, fx.design, rewards, hp);
    Agent b(kind, fx.design, rewards, hp);
    RngStream ra(7, 19), rb(7, 19);
    CHECK(a.select(fx.arms, ra) == b.select(fx.arms, rb));
  }
}
