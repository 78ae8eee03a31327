#include "bandit/agents.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bandit/kernels.hpp"

namespace bandit {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::x_random: return "x_random";
    case AgentKind::x_fixed: return "x_fixed";
    case AgentKind::oful: return "oful";
    case AgentKind::linucb: return "linucb";
    case AgentKind::thompson: return "thompson";
  }
  return "?";
}

std::optional<AgentKind> agent_kind_from(std::string_view name) {
  for (AgentKind k : kAllAgentKinds)
    if (name == to_string(k)) return k;
  return std::nullopt;
}

void Hyperparams::validate(AgentKind kind) const {
  detail::require(b >= 1, "hyperparams: b must be >= 1");
  detail::require(delta > 0.0 && delta <= 100.0,
                  "hyperparams: delta outside (0, 100]");
  detail::require(lambda >= 0.0, "hyperparams: lambda must be >= 0");
  detail::require(oful_confidence > 0.0 && oful_confidence < 1.0,
                  "hyperparams: oful_confidence outside (0, 1)");
  detail::require(subgaussian_r >= 0.0, "hyperparams: subgaussian_r >= 0");
  detail::require(theta_bound >= 0.0, "hyperparams: theta_bound >= 0");
  detail::require(linucb_alpha >= 0.0, "hyperparams: linucb_alpha >= 0");
  detail::require(ts_v >= 0.0, "hyperparams: ts_v >= 0");
  if (kind == AgentKind::oful)
    detail::require(lambda > 0.0 || radius_override >= 0.0,
                    "hyperparams: oful needs lambda > 0 or radius_override");
}

Agent::Agent(AgentKind kind, const InitialDesign& design, const Vec& rewards,
             const Hyperparams& hp)
    : kind_(kind), hp_(hp) {
  hp_.validate(kind);
  detail::require(!rewards.empty() &&
                      rewards.size() == design.model_matrix.rows(),
                  "init_agent: rewards length != design run count");
  x_ = design.model_matrix;
  r_ = rewards;
  const std::size_t f = x_.cols();
  gram_ = gram_matrix(x_);
  xty_.assign(f, 0.0);
  for (std::size_t i = 0; i < x_.rows(); ++i)
    kern::axpy(r_[i], x_.row(i), xty_.data(), f);
}

Agent init_agent(AgentKind kind, const InitialDesign& design,
                 const Vec& rewards, const Hyperparams& hp) {
  return Agent(kind, design, rewards, hp);
}

void Agent::update(const Arm& arm, double reward) {
  const Vec u = expand_agent_features(arm);
  detail::require(u.size() == x_.cols(), "update: arm dimension mismatch");
  x_.append_row(u);
  r_.push_back(reward);
  gram_rank1_update(gram_, u);
  kern::axpy(reward, u.data(), xty_.data(), x_.cols());
}

std::size_t Agent::select(const ArmSet& arms, RngStream& rng) {
  switch (kind_) {
    case AgentKind::x_random: return xrandom_select(arms, rng);
    case AgentKind::x_fixed: return xfixed_select(arms, rng);
    case AgentKind::oful: return oful_select(arms);
    case AgentKind::linucb: return linucb_select(arms);
    case AgentKind::thompson: return thompson_select(arms, rng);
  }
  throw std::logic_error("select: unknown agent kind");
}

std::size_t Agent::argmax_scores(std::span<const double> scores) const {
  std::size_t best = 0;
  for (std::size_t m = 1; m < scores.size(); ++m)
    if (scores[m] > scores[best]) best = m;
  return best;
}

// Shared tail of both bootstrap policies: given B fitted coefficient
// vectors, score all arms per replicate, then rank arms by the delta
// percentile of their score column.
std::size_t Agent::bootstrap_select(const ArmSet& arms, RngStream& rng,
                                    bool resample_rows) {
  const std::size_t t = x_.rows();
  const std::size_t f = x_.cols();
  const std::size_t m = arms.arms.size();
  const std::size_t reps = hp_.b;
  detail::require(t >= f, "bootstrap select: history has fewer rows than features");
  detail::require(arms.agent_matrix.cols() == f,
                  "bootstrap select: arm feature width mismatch");

  betas_.resize(reps * f);
  scores_.resize(reps * m);
  idx_.resize(t);
  yb_.resize(t);

  if (!resample_rows) {
    // Residual bootstrap: one factorization of the fixed X serves every
    // replicate.
    qr_.load(x_);
    qr_.solve(r_, beta_);
    fitted_.resize(t);
    kern::gemv_rm(x_.data(), t, f, beta_.data(), fitted_.data());
    resid_.resize(t);
    for (std::size_t i = 0; i < t; ++i) resid_[i] = r_[i] - fitted_[i];
  }

  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (hp_.identity_resample) {
      for (std::size_t i = 0; i < t; ++i) idx_[i] = static_cast<std::uint32_t>(i);
    } else {
      const auto bound = static_cast<std::uint32_t>(t);
      for (std::size_t i = 0; i < t; ++i) idx_[i] = rng.uniform_index(bound);
    }
    if (resample_rows) {
      qr_.load_rows(x_, idx_);
      for (std::size_t i = 0; i < t; ++i) yb_[i] = r_[idx_[i]];
    } else {
      for (std::size_t i = 0; i < t; ++i) yb_[i] = fitted_[i] + resid_[idx_[i]];
    }
    qr_.solve(yb_, beta_);
    std::copy(beta_.begin(), beta_.end(), betas_.begin() + rep * f);
    kern::gemv_rm(arms.agent_matrix.data(), m, f, betas_.data() + rep * f,
                  scores_.data() + rep * m);
  }

  percbuf_.resize(reps);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t mi = 0; mi < m; ++mi) {
    for (std::size_t rep = 0; rep < reps; ++rep)
      percbuf_[rep] = scores_[rep * m + mi];
    const double y = percentile_inplace(percbuf_, hp_.delta);
    if (y > best_score) {
      best_score = y;
      best = mi;
    }
  }
  return best;
}

std::size_t Agent::xrandom_select(const ArmSet& arms, RngStream& rng) {
  return bootstrap_select(arms, rng, /*resample_rows=*/true);
}

std::size_t Agent::xfixed_select(const ArmSet& arms, RngStream& rng) {
  return bootstrap_select(arms, rng, /*resample_rows=*/false);
}

void Agent::factor_posterior() {
  const std::size_t f = x_.cols();
  detail::require(x_.rows() >= 1, "select: history is empty");
  v_ = gram_;
  for (std::size_t i = 0; i < f; ++i) v_[i * f + i] += hp_.lambda;
  if (!cholesky_in_place(v_, f))
    throw ContractViolation(
        "select: X'X + lambda I not positive definite (lambda too small for "
        "this history)");
  theta_hat_.assign(f, 0.0);
  chol_solve(v_, f, xty_, theta_hat_);
}

std::size_t Agent::confidence_select(const ArmSet& arms, bool use_oful_radius) {
  const std::size_t f = x_.cols();
  detail::require(arms.agent_matrix.cols() == f,
                  "select: arm feature width mismatch");
  factor_posterior();

  double radius;
  if (use_oful_radius) {
    if (hp_.radius_override >= 0.0) {
      radius = hp_.radius_override;
    } else {
      // Ellipsoid radius at confidence 1 - oful_confidence:
      //   R * sqrt(2 log(1/conf) + log det(V) - F log(lambda)) + sqrt(lambda) S
      const double logdet = chol_logdet(v_, f);
      radius = hp_.subgaussian_r *
                   std::sqrt(2.0 * std::log(1.0 / hp_.oful_confidence) +
                             logdet - static_cast<double>(f) * std::log(hp_.lambda)) +
               std::sqrt(hp_.lambda) * hp_.theta_bound;
    }
  } else {
    radius = hp_.linucb_alpha;
  }

  const std::size_t m = arms.arms.size();
  ucb_.resize(m);
  zbuf_.resize(f);
  for (std::size_t mi = 0; mi < m; ++mi) {
    const double* u = arms.agent_matrix.row(mi);
    double score = kern::dot(u, theta_hat_.data(), f);
    if (radius > 0.0) {
      chol_forward(v_, f, {u, f}, zbuf_);
      score += radius * std::sqrt(kern::dot(zbuf_.data(), zbuf_.data(), f));
    }
    ucb_[mi] = score;
  }
  return argmax_scores(ucb_);
}

std::size_t Agent::oful_select(const ArmSet& arms) {
  return confidence_select(arms, /*use_oful_radius=*/true);
}

std::size_t Agent::linucb_select(const ArmSet& arms) {
  return confidence_select(arms, /*use_oful_radius=*/false);
}

std::size_t Agent::thompson_select(const ArmSet& arms, RngStream& rng) {
  const std::size_t f = x_.cols();
  detail::require(arms.agent_matrix.cols() == f,
                  "select: arm feature width mismatch");
  factor_posterior();

  if (hp_.ts_v > 0.0) {
    // theta ~ N(theta_hat, v^2 V^{-1}) via L' z = g with V = L L'.
    gbuf_.resize(f);
    for (std::size_t i = 0; i < f; ++i) gbuf_[i] = rng.standard_normal();
    zbuf_.resize(f);
    chol_backward(v_, f, gbuf_, zbuf_);
    kern::axpy(hp_.ts_v, zbuf_.data(), theta_hat_.data(), f);
  }

  const std::size_t m = arms.arms.size();
  ucb_.resize(m);
  kern::gemv_rm(arms.agent_matrix.data(), m, f, theta_hat_.data(), ucb_.data());
  return argmax_scores(ucb_);
}

}  // namespace bandit
