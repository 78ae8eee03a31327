#pragma once

#include <map>
#include <string>

#include "bandit/agents.hpp"

namespace bandit {

// One policy entry in the experiment roster. Hyperparameters may be
// overridden per noise level (that is what tuning produces).
struct AgentSpec {
  AgentKind kind = AgentKind::x_random;
  Hyperparams base;
  std::map<double, Hyperparams> per_noise;

  const Hyperparams& at_noise(double sigma) const {
    auto it = per_noise.find(sigma);
    return it == per_noise.end() ? base : it->second;
  }
};

struct ExperimentConfig {
  std::size_t k = 7;
  std::size_t design_runs = 32;
  std::size_t n_surfaces = 100;
  std::size_t horizon = 300;
  std::vector<std::size_t> report_horizons{50, 100, 300};
  NoiseKind noise_kind = NoiseKind::laplace;
  std::vector<double> noise_sigmas{1.0, 5.0, 10.0};
  std::vector<AgentSpec> agents;
  HpmConfig hpm;
  std::uint64_t root_seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::size_t tune_surfaces = 100;
  std::uint64_t tune_surface_offset = 1'000'000'000;

  void validate() const;  // throws ContractViolation naming the field
};

// Per-trial trace of one (surface, agent, noise) run plus its summaries.
struct RunResult {
  std::uint64_t surface_id = 0;
  AgentKind kind = AgentKind::x_random;
  double sigma = 0.0;
  std::vector<std::uint32_t> arms;  // chosen arm index per trial
  Vec pseudo_performance;           // percent of the optimal expected reward
  Vec regret;                       // 1 - performance ratio, per trial
  double cumulative_regret = 0.0;   // post-initialization trials only
  // Alternative accounting that charges the initialization pulls too.
  double cumulative_regret_with_init = 0.0;
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// 100 * expected(arm) / expected(optimum); requires a positive optimum.
double pseudo_performance(const ResponseSurface& s, const ArmSet& arms,
                          std::size_t arm_index);
// Sum over the trajectory of (1 - performance ratio).
double cumulative_regret(std::span<const std::uint32_t> trajectory,
                         const ResponseSurface& s, const ArmSet& arms);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

// Shared per-surface state, computed once and reused across agents.
struct SurfaceContext {
  const ArmSet* arms = nullptr;
  const InitialDesign* design = nullptr;
  const ResponseSurface* surface = nullptr;
  Vec expected;  // expected reward per arm
  std::size_t optimal_index = 0;
  double optimal_value = 0.0;

  static SurfaceContext of(const ArmSet& arms, const InitialDesign& design,
                           const ResponseSurface& s);
};

// Initialization (noisy rewards on the design runs) plus T rounds of
// select / observe / update. Deterministic given the stream.
RunResult run_single(const SurfaceContext& ctx, AgentKind kind,
                     const Hyperparams& hp, std::size_t horizon,
                     NoiseModel noise, RngStream& rng);

// Spec-shaped convenience used by tests; builds the context on the fly.
RunResult run_single(const ResponseSurface& surface, const ArmSet& arms,
                     const InitialDesign& design, AgentKind kind,
                     const Hyperparams& hp, std::size_t horizon,
                     NoiseModel noise, RngStream& rng);

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

struct ExperimentReport {
  struct CurveRow {
    AgentKind kind;
    double sigma;
    std::size_t trial;  // 1-based
    double mean_pseudo_performance;
    double stderr_mean;
    std::size_t n;
  };
  struct SummaryRow {
    AgentKind kind;
    double sigma;
    std::size_t horizon;
    double mean_cumulative_regret;
    double stderr_mean;
    std::size_t n;
    double mean_with_init;  // printed, not serialized
  };
  struct Failure {
    std::uint64_t surface_id;
    AgentKind kind;
    double sigma;
    std::string message;
  };

  std::vector<CurveRow> curve;      // (agent name, sigma, trial) ascending
  std::vector<SummaryRow> summary;  // (agent name, sigma, horizon) ascending
  std::vector<Failure> failures;
  std::size_t surfaces_rejected = 0;
  std::uint64_t root_seed = 0;
};

// Full experiment: surfaces x noise levels x agents, parallel over runs.
// Output is a pure function of the config (including root_seed); thread
// count never changes any number.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

// Per-agent grids: ordered (parameter name, ascending values) lists whose
// cartesian product is evaluated on the tuning surface set.
struct TuneGrid {
  std::map<AgentKind, std::vector<std::pair<std::string, std::vector<double>>>>
      params;
};

// Assign a hyperparameter by its config-file name. Returns false for an
// unknown name.
bool set_hyperparam(Hyperparams& hp, std::string_view name, double value);

struct TuneResult {
  struct Choice {
    AgentKind kind;
    double sigma;
    Hyperparams hp;
    std::vector<std::pair<std::string, double>> point;
    double mean_regret;
  };
  struct Cell {
    AgentKind kind;
    double sigma;
    std::vector<std::pair<std::string, double>> point;
    double mean_regret;
    double stderr_mean;
  };
  std::vector<Choice> choices;  // one per (roster agent, noise level)
  std::vector<Cell> table;      // every evaluated grid point
};

// Evaluates each grid point on the tuning surfaces (ids disjoint from the
// evaluation range) and returns the argmin of mean cumulative regret; ties
// resolve to the smallest parameter tuple.
TuneResult tune_sweep(const ExperimentConfig& cfg, const TuneGrid& grid);

// Stream-id derivation (exposed for tests).
enum class StreamPhase : std::uint64_t {
  design = 1,
  surface = 2,
  run = 3,
  tune_run = 4,
};
std::uint64_t stream_id_for(StreamPhase phase, std::uint64_t surface_id,
                            AgentKind kind, double sigma);

}  // namespace bandit
