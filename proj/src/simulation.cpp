#include "bandit/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace bandit {

void ExperimentConfig::validate() const {
  detail::require(k >= 1 && k <= 20, "experiment.k outside [1, 20]");
  detail::require(design_runs >= agent_feature_count(k),
                  "experiment.design_runs below the model column count");
  detail::require(n_surfaces >= 1, "experiment.n_surfaces must be >= 1");
  detail::require(horizon >= 1, "experiment.horizon must be >= 1");
  detail::require(!report_horizons.empty(),
                  "experiment.report_horizons must be nonempty");
  for (std::size_t h : report_horizons)
    detail::require(h >= 1 && h <= horizon,
                    "experiment.report_horizons entry outside [1, horizon]");
  detail::require(!noise_sigmas.empty(),
                  "experiment.noise.sigmas must be nonempty");
  for (double s : noise_sigmas)
    detail::require(s >= 0.0, "experiment.noise.sigmas entry must be >= 0");
  for (std::size_t i = 0; i < noise_sigmas.size(); ++i)
    for (std::size_t j = i + 1; j < noise_sigmas.size(); ++j)
      detail::require(noise_sigmas[i] != noise_sigmas[j],
                      "experiment.noise.sigmas must be distinct");
  detail::require(!agents.empty(), "agents: roster must be nonempty");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].base.validate(agents[i].kind);
    for (const auto& [sigma, hp] : agents[i].per_noise) {
      detail::require(sigma >= 0.0, "agents.per_noise key must be >= 0");
      hp.validate(agents[i].kind);
    }
    for (std::size_t j = i + 1; j < agents.size(); ++j)
      detail::require(agents[i].kind != agents[j].kind,
                      "agents: duplicate kinds in the roster");
  }
  hpm.validate();
  detail::require(tune_surfaces >= 1, "experiment.tune_surfaces must be >= 1");
  detail::require(tune_surface_offset >= n_surfaces,
                  "experiment.tune_surface_offset overlaps evaluation ids");
}

std::uint64_t stream_id_for(StreamPhase phase, std::uint64_t surface_id,
                            AgentKind kind, double sigma) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(phase) + 0x243F6A8885A308D3ULL);
  h = mix64(h ^ surface_id);
  h = mix64(h ^ (static_cast<std::uint64_t>(kind) + 1));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(sigma));
  return h;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double pseudo_performance(const ResponseSurface& s, const ArmSet& arms,
                          std::size_t arm_index) {
  detail::require(arm_index < arms.arms.size(),
                  "pseudo_performance: arm index out of range");
  const Vec expected = expected_rewards(s, arms);
  const double opt = *std::max_element(expected.begin(), expected.end());
  detail::require(opt > 0.0, "pseudo_performance: non-positive optimum");
  return 100.0 * expected[arm_index] / opt;
}

double cumulative_regret(std::span<const std::uint32_t> trajectory,
                         const ResponseSurface& s, const ArmSet& arms) {
  detail::require(!trajectory.empty(), "cumulative_regret: empty trajectory");
  const Vec expected = expected_rewards(s, arms);
  const double opt = *std::max_element(expected.begin(), expected.end());
  detail::require(opt > 0.0, "cumulative_regret: non-positive optimum");
  double total = 0.0;
  for (std::uint32_t m : trajectory) total += 1.0 - expected[m] / opt;
  return total;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

SurfaceContext SurfaceContext::of(const ArmSet& arms,
                                  const InitialDesign& design,
                                  const ResponseSurface& s) {
  SurfaceContext ctx;
  ctx.arms = &arms;
  ctx.design = &design;
  ctx.surface = &s;
  ctx.expected = expected_rewards(s, arms);
  ctx.optimal_index = 0;
  for (std::size_t m = 1; m < ctx.expected.size(); ++m)
    if (ctx.expected[m] > ctx.expected[ctx.optimal_index]) ctx.optimal_index = m;
  ctx.optimal_value = ctx.expected[ctx.optimal_index];
  return ctx;
}

RunResult run_single(const SurfaceContext& ctx, AgentKind kind,
                     const Hyperparams& hp, std::size_t horizon,
                     NoiseModel noise, RngStream& rng) {
  detail::require(ctx.optimal_value > 0.0,
                  "run_single: surface optimum must be positive");
  const ArmSet& arms = *ctx.arms;
  const InitialDesign& design = *ctx.design;
  const double opt = ctx.optimal_value;

  // Initialization pulls: observe the design runs on this surface.
  Vec init_rewards(design.runs.size());
  double init_regret = 0.0;
  for (std::size_t i = 0; i < design.runs.size(); ++i) {
    const std::size_t ai = arm_index(design.runs[i]);
    const double expected = ctx.expected[ai];
    init_rewards[i] = expected + noise_draw(noise, rng);
    init_regret += 1.0 - expected / opt;
  }

  Agent agent(kind, design, init_rewards, hp);

  RunResult rr;
  rr.kind = kind;
  rr.sigma = noise.sigma_eps;
  rr.arms.reserve(horizon);
  rr.pseudo_performance.reserve(horizon);
  rr.regret.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t m = agent.select(arms, rng);
    const double expected = ctx.expected[m];
    agent.update(arms.arms[m], expected + noise_draw(noise, rng));
    const double ratio = expected / opt;
    rr.arms.push_back(static_cast<std::uint32_t>(m));
    rr.pseudo_performance.push_back(100.0 * ratio);
    rr.regret.push_back(1.0 - ratio);
    rr.cumulative_regret += 1.0 - ratio;
  }
  rr.cumulative_regret_with_init = rr.cumulative_regret + init_regret;
  return rr;
}

RunResult run_single(const ResponseSurface& surface, const ArmSet& arms,
                     const InitialDesign& design, AgentKind kind,
                     const Hyperparams& hp, std::size_t horizon,
                     NoiseModel noise, RngStream& rng) {
  const SurfaceContext ctx = SurfaceContext::of(arms, design, surface);
  return run_single(ctx, kind, hp, horizon, noise, rng);
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

namespace {

unsigned effective_threads(unsigned requested, std::size_t n_tasks) {
  unsigned t = requested != 0 ? requested : std::thread::hardware_concurrency();
  if (t == 0) t = 1;
  return static_cast<unsigned>(
      std::min<std::size_t>(t, std::max<std::size_t>(n_tasks, 1)));
}

// Runs fn(0..n) on a small pool. Work items must be independent; output
// ordering is the caller's job (write into preallocated slots).
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = effective_threads(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct RunOutcome {
  RunResult result;
  std::string error;  // nonempty on failure
  bool ok = false;
};

struct MeanAccum {
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double stderr_mean() const {
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    const double var = std::max(0.0, (sumsq - sum * sum / nn) / (nn - 1.0));
    return std::sqrt(var / nn);
  }
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ArmSet arms = enumerate_arms(cfg.k);
  RngStream design_rng(cfg.root_seed,
                       stream_id_for(StreamPhase::design, 0,
                                     AgentKind::x_random, 0.0));
  const InitialDesign design =
      generate_initial_design(cfg.k, cfg.design_runs, design_rng);

  ExperimentReport report;
  report.root_seed = cfg.root_seed;

  const std::size_t n_sigmas = cfg.noise_sigmas.size();
  const std::size_t n_agents = cfg.agents.size();
  const std::size_t horizon = cfg.horizon;

  struct Agg {
    std::vector<MeanAccum> per_trial;    // horizon entries
    std::vector<MeanAccum> per_horizon;  // report_horizons entries
    MeanAccum with_init;
  };
  std::vector<Agg> agg(n_agents * n_sigmas);
  for (auto& a : agg) {
    a.per_trial.resize(horizon);
    a.per_horizon.resize(cfg.report_horizons.size());
  }

  constexpr std::size_t kBlock = 256;  // surfaces per scheduling block
  std::vector<ResponseSurface> surfaces(std::min(kBlock, cfg.n_surfaces));
  std::vector<SurfaceContext> ctx(surfaces.size());
  const NoiseModel sample_noise{cfg.noise_kind, cfg.noise_sigmas.front()};

  for (std::size_t s0 = 0; s0 < cfg.n_surfaces; s0 += kBlock) {
    const std::size_t count = std::min(kBlock, cfg.n_surfaces - s0);
    for (std::size_t i = 0; i < count; ++i) {
      RngStream srng(cfg.root_seed,
                     stream_id_for(StreamPhase::surface, s0 + i,
                                   AgentKind::x_random, 0.0));
      SurfaceDraw draw =
          sample_admissible_surface(srng, cfg.hpm, arms, sample_noise);
      report.surfaces_rejected += draw.rejected;
      surfaces[i] = std::move(draw.surface);
      ctx[i] = SurfaceContext::of(arms, design, surfaces[i]);
    }

    const std::size_t n_tasks = count * n_sigmas * n_agents;
    std::vector<RunOutcome> outcomes(n_tasks);
    parallel_for(n_tasks, cfg.threads, [&](std::size_t task) {
      const std::size_t i = task / (n_sigmas * n_agents);
      const std::size_t rest = task % (n_sigmas * n_agents);
      const std::size_t si = rest / n_agents;
      const std::size_t ai = rest % n_agents;
      const std::uint64_t surface_id = s0 + i;
      const double sigma = cfg.noise_sigmas[si];
      const AgentSpec& spec = cfg.agents[ai];
      RngStream rng(cfg.root_seed, stream_id_for(StreamPhase::run, surface_id,
                                                 spec.kind, sigma));
      RunOutcome& out = outcomes[task];
      try {
        out.result = run_single(ctx[i], spec.kind, spec.at_noise(sigma),
                                horizon, NoiseModel{cfg.noise_kind, sigma}, rng);
        out.result.surface_id = surface_id;
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    });

    // Deterministic ordered reduction (task index order).
    for (std::size_t task = 0; task < n_tasks; ++task) {
      const std::size_t i = task / (n_sigmas * n_agents);
      const std::size_t rest = task % (n_sigmas * n_agents);
      const std::size_t si = rest / n_agents;
      const std::size_t ai = rest % n_agents;
      RunOutcome& out = outcomes[task];
      if (!out.ok) {
        report.failures.push_back({s0 + i, cfg.agents[ai].kind,
                                   cfg.noise_sigmas[si], out.error});
        continue;
      }
      Agg& a = agg[ai * n_sigmas + si];
      for (std::size_t t = 0; t < horizon; ++t)
        a.per_trial[t].add(out.result.pseudo_performance[t]);
      for (std::size_t h = 0; h < cfg.report_horizons.size(); ++h) {
        double partial = 0.0;
        for (std::size_t t = 0; t < cfg.report_horizons[h]; ++t)
          partial += out.result.regret[t];
        a.per_horizon[h].add(partial);
      }
      a.with_init.add(out.result.cumulative_regret_with_init);
    }
  }

  // Emit rows ordered by (agent name, sigma, trial/horizon).
  std::vector<std::size_t> agent_order(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) agent_order[i] = i;
  std::sort(agent_order.begin(), agent_order.end(), [&](std::size_t a, std::size_t b) {
    return to_string(cfg.agents[a].kind) < to_string(cfg.agents[b].kind);
  });
  std::vector<std::size_t> sigma_order(n_sigmas);
  for (std::size_t i = 0; i < n_sigmas; ++i) sigma_order[i] = i;
  std::sort(sigma_order.begin(), sigma_order.end(), [&](std::size_t a, std::size_t b) {
    return cfg.noise_sigmas[a] < cfg.noise_sigmas[b];
  });
  std::vector<std::size_t> horizon_order(cfg.report_horizons.size());
  for (std::size_t i = 0; i < horizon_order.size(); ++i) horizon_order[i] = i;
  std::sort(horizon_order.begin(), horizon_order.end(),
            [&](std::size_t a, std::size_t b) {
              return cfg.report_horizons[a] < cfg.report_horizons[b];
            });

  for (std::size_t ao : agent_order) {
    for (std::size_t so : sigma_order) {
      const Agg& a = agg[ao * n_sigmas + so];
      for (std::size_t t = 0; t < horizon; ++t)
        report.curve.push_back({cfg.agents[ao].kind, cfg.noise_sigmas[so],
                                t + 1, a.per_trial[t].mean(),
                                a.per_trial[t].stderr_mean(),
                                a.per_trial[t].n});
      for (std::size_t h : horizon_order)
        report.summary.push_back(
            {cfg.agents[ao].kind, cfg.noise_sigmas[so], cfg.report_horizons[h],
             a.per_horizon[h].mean(), a.per_horizon[h].stderr_mean(),
             a.per_horizon[h].n, a.with_init.mean()});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

bool set_hyperparam(Hyperparams& hp, std::string_view name, double value) {
  if (name == "b") {
    hp.b = static_cast<std::size_t>(std::llround(value));
    return true;
  }
  if (name == "delta") { hp.delta = value; return true; }
  if (name == "lambda") { hp.lambda = value; return true; }
  if (name == "oful_confidence") { hp.oful_confidence = value; return true; }
  if (name == "subgaussian_r") { hp.subgaussian_r = value; return true; }
  if (name == "theta_bound") { hp.theta_bound = value; return true; }
  if (name == "radius_override") { hp.radius_override = value; return true; }
  if (name == "linucb_alpha") { hp.linucb_alpha = value; return true; }
  if (name == "ts_v") { hp.ts_v = value; return true; }
  return false;
}

TuneResult tune_sweep(const ExperimentConfig& cfg, const TuneGrid& grid) {
  cfg.validate();
  const ArmSet arms = enumerate_arms(cfg.k);
  RngStream design_rng(cfg.root_seed,
                       stream_id_for(StreamPhase::design, 0,
                                     AgentKind::x_random, 0.0));
  const InitialDesign design =
      generate_initial_design(cfg.k, cfg.design_runs, design_rng);

  // Tuning surface set: ids disjoint from the evaluation range.
  std::vector<ResponseSurface> surfaces(cfg.tune_surfaces);
  std::vector<SurfaceContext> ctx(cfg.tune_surfaces);
  const NoiseModel sample_noise{cfg.noise_kind, cfg.noise_sigmas.front()};
  for (std::size_t i = 0; i < cfg.tune_surfaces; ++i) {
    const std::uint64_t sid = cfg.tune_surface_offset + i;
    RngStream srng(cfg.root_seed, stream_id_for(StreamPhase::surface, sid,
                                                AgentKind::x_random, 0.0));
    surfaces[i] =
        sample_admissible_surface(srng, cfg.hpm, arms, sample_noise).surface;
    ctx[i] = SurfaceContext::of(arms, design, surfaces[i]);
  }

  // Expand each roster agent's grid into hyperparameter points (ascending
  // parameter order; ties in the sweep then resolve to the smallest tuple).
  struct Point {
    Hyperparams hp;
    std::vector<std::pair<std::string, double>> values;
  };
  struct Job {
    std::size_t agent;
    std::vector<Point> points;
  };
  std::vector<Job> jobs;
  for (std::size_t ai = 0; ai < cfg.agents.size(); ++ai) {
    const AgentSpec& spec = cfg.agents[ai];
    Job job;
    job.agent = ai;
    auto it = grid.params.find(spec.kind);
    if (it == grid.params.end() || it->second.empty()) {
      job.points.push_back({spec.base, {}});
    } else {
      std::vector<std::pair<std::string, std::vector<double>>> axes = it->second;
      for (auto& [name, values] : axes) {
        detail::require(!values.empty(), "tune grid: empty value list");
        std::sort(values.begin(), values.end());
      }
      std::vector<std::size_t> pos(axes.size(), 0);
      bool done = false;
      while (!done) {
        Point p;
        p.hp = spec.base;
        for (std::size_t d = 0; d < axes.size(); ++d) {
          const double v = axes[d].second[pos[d]];
          detail::require(set_hyperparam(p.hp, axes[d].first, v),
                          "tune grid: unknown hyperparameter name");
          p.values.emplace_back(axes[d].first, v);
        }
        job.points.push_back(std::move(p));
        done = true;
        for (std::size_t d = axes.size(); d-- > 0;) {  // last axis fastest
          if (++pos[d] < axes[d].second.size()) {
            done = false;
            break;
          }
          pos[d] = 0;
        }
      }
    }
    jobs.push_back(std::move(job));
  }

  // Flatten (job, sigma, point, surface) into one parallel task list.
  struct Task {
    std::size_t job, sigma, point, surface;
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (std::size_t si = 0; si < cfg.noise_sigmas.size(); ++si)
      for (std::size_t p = 0; p < jobs[j].points.size(); ++p)
        for (std::size_t s = 0; s < cfg.tune_surfaces; ++s)
          tasks.push_back({j, si, p, s});

  std::vector<double> regret(tasks.size(), 0.0);
  std::vector<std::uint8_t> ok(tasks.size(), 0);
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t ti) {
    const Task& tk = tasks[ti];
    const AgentSpec& spec = cfg.agents[jobs[tk.job].agent];
    const double sigma = cfg.noise_sigmas[tk.sigma];
    const std::uint64_t sid = cfg.tune_surface_offset + tk.surface;
    RngStream rng(cfg.root_seed,
                  stream_id_for(StreamPhase::tune_run, sid, spec.kind, sigma));
    try {
      const RunResult rr =
          run_single(ctx[tk.surface], spec.kind, jobs[tk.job].points[tk.point].hp,
                     cfg.horizon, NoiseModel{cfg.noise_kind, sigma}, rng);
      regret[ti] = rr.cumulative_regret;
      ok[ti] = 1;
    } catch (const std::exception&) {
      ok[ti] = 0;
    }
  });

  TuneResult result;
  std::size_t cursor = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const AgentSpec& spec = cfg.agents[jobs[j].agent];
    for (std::size_t si = 0; si < cfg.noise_sigmas.size(); ++si) {
      const double sigma = cfg.noise_sigmas[si];
      std::size_t best_point = 0;
      double best_mean = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < jobs[j].points.size(); ++p) {
        MeanAccum acc;
        for (std::size_t s = 0; s < cfg.tune_surfaces; ++s, ++cursor)
          if (ok[cursor]) acc.add(regret[cursor]);
        result.table.push_back({spec.kind, sigma, jobs[j].points[p].values,
                                acc.mean(), acc.stderr_mean()});
        if (acc.n > 0 && acc.mean() < best_mean) {
          best_mean = acc.mean();
          best_point = p;
        }
      }
      result.choices.push_back({spec.kind, sigma,
                                jobs[j].points[best_point].hp,
                                jobs[j].points[best_point].values, best_mean});
    }
  }
  return result;
}

}  // namespace bandit
