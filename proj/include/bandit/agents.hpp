#pragma once

#include <optional>
#include <string_view>

#include "bandit/design.hpp"
#include "bandit/environment.hpp"

namespace bandit {

enum class AgentKind { x_random, x_fixed, oful, linucb, thompson };

inline constexpr AgentKind kAllAgentKinds[] = {
    AgentKind::x_random, AgentKind::x_fixed, AgentKind::oful,
    AgentKind::linucb, AgentKind::thompson};

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> agent_kind_from(std::string_view name);

// Per-algorithm tunables, one bag for all five policies; each policy reads
// only its own fields.
struct Hyperparams {
  std::size_t b = 100;            // bootstrap replicates
  double delta = 95.0;            // bootstrap UCB percentile, (0, 100]
  double lambda = 1.0;            // ridge regularizer (baselines)
  double oful_confidence = 0.05;  // ellipsoid failure probability
  double subgaussian_r = 1.0;     // assumed noise scale in the OFUL radius
  double theta_bound = 1.0;       // assumed ||theta|| bound in the radius
  double radius_override = -1.0;  // >= 0 replaces the computed OFUL radius
  double linucb_alpha = 1.0;
  double ts_v = 1.0;              // Thompson posterior scale
  // Diagnostic switch: both bootstrap agents resample the identity
  // permutation, which removes all bootstrap randomness.
  bool identity_resample = false;

  void validate(AgentKind kind) const;
};

// One arm-selection policy bound to its pull history. All five policies
// share the contract: select() scores every arm and returns the argmax
// index (ties to the lowest index); update() appends one (arm, reward)
// observation.
//
// Instances are single-threaded; distinct instances may run on distinct
// threads, each with its own RngStream.
class Agent {
 public:
  Agent(AgentKind kind, const InitialDesign& design, const Vec& rewards,
        const Hyperparams& hp);

  AgentKind kind() const { return kind_; }
  const Hyperparams& hyperparams() const { return hp_; }
  std::size_t trials() const { return x_.rows(); }
  const Mat& history_x() const { return x_; }
  const Vec& history_r() const { return r_; }
  // Incrementally maintained sufficient statistics (X'X, X'R).
  const std::vector<double>& gram() const { return gram_; }
  const Vec& xty() const { return xty_; }

  std::size_t select(const ArmSet& arms, RngStream& rng);
  void update(const Arm& arm, double reward);

  // Policy-specific entry points (select() dispatches to these).
  std::size_t xrandom_select(const ArmSet& arms, RngStream& rng);
  std::size_t xfixed_select(const ArmSet& arms, RngStream& rng);
  std::size_t oful_select(const ArmSet& arms);
  std::size_t linucb_select(const ArmSet& arms);
  std::size_t thompson_select(const ArmSet& arms, RngStream& rng);

 private:
  std::size_t bootstrap_select(const ArmSet& arms, RngStream& rng,
                               bool resample_rows);
  std::size_t confidence_select(const ArmSet& arms, bool use_oful_radius);
  void factor_posterior();  // v_ <- chol(X'X + lambda I), theta_hat_
  std::size_t argmax_scores(std::span<const double> scores) const;

  AgentKind kind_;
  Hyperparams hp_;
  Mat x_;
  Vec r_;
  std::vector<double> gram_;  // F x F
  Vec xty_;

  // Scratch reused across trials.
  QrFactor qr_;
  std::vector<std::uint32_t> idx_;
  Vec yb_, beta_, fitted_, resid_;
  std::vector<double> betas_;   // B x F
  std::vector<double> scores_;  // B x M
  std::vector<double> percbuf_, ucb_;
  std::vector<double> v_;  // F x F posterior factor
  Vec theta_hat_, zbuf_, gbuf_;
};

// History seeded with the design's model matrix and the observed rewards.
Agent init_agent(AgentKind kind, const InitialDesign& design,
                 const Vec& rewards, const Hyperparams& hp);

}  // namespace bandit
