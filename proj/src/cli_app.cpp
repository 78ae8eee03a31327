#include "bandit/cli_app.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bandit/report.hpp"

namespace bandit {

namespace fs = std::filesystem;

namespace {

unsigned resolve_threads(bool flag_present, unsigned flag_value,
                         unsigned config_value) {
  if (flag_present) return flag_value;
  if (const char* env = std::getenv("BANDITSIM_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0') return static_cast<unsigned>(v);
    std::cerr << "warning: ignoring malformed BANDITSIM_THREADS=\"" << env
              << "\"\n";
  }
  return config_value;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_csv(const fs::path& path, Fn&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
}

int cmd_simulate(const std::string& config_path, bool seed_set,
                 std::uint64_t seed, bool threads_set, unsigned threads,
                 const std::string& out_override) {
  FullConfig cfg = parse_config_file(config_path);
  if (seed_set) cfg.experiment.root_seed = seed;
  cfg.experiment.threads =
      resolve_threads(threads_set, threads, cfg.experiment.threads);
  if (!out_override.empty()) cfg.output.dir = out_override;

  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);

  const ExperimentReport report = run_experiment(cfg.experiment);

  write_csv(dir / "curve.csv", [&](std::ostream& os) { write_curve_csv(os, report); });
  write_csv(dir / "summary.csv",
            [&](std::ostream& os) { write_summary_csv(os, report); });
  write_file(dir / "effective_config.json", effective_config_text(cfg));
  if (!report.failures.empty())
    write_csv(dir / "failures.csv",
              [&](std::ostream& os) { write_failures_csv(os, report); });

  // One line per agent and noise level, at the largest reported horizon.
  std::size_t max_h = 0;
  for (const auto& row : report.summary) max_h = std::max(max_h, row.horizon);
  for (const auto& row : report.summary) {
    if (row.horizon != max_h) continue;
    std::cout << to_string(row.kind) << " sigma=" << format_sig6(row.sigma)
              << ": cumulative regret " << format_sig6(row.mean_cumulative_regret)
              << " +- " << format_sig6(row.stderr_mean) << " (with init "
              << format_sig6(row.mean_with_init) << ", n=" << row.n << ")\n";
  }
  if (report.surfaces_rejected > 0)
    std::cout << "surfaces rejected during sampling: "
              << report.surfaces_rejected << "\n";
  if (!report.failures.empty())
    std::cout << report.failures.size()
              << " run(s) failed; see failures.csv\n";
  return 0;
}

int cmd_tune(const std::string& config_path, const std::string& grid_path,
             bool seed_set, std::uint64_t seed, bool threads_set,
             unsigned threads, const std::string& out_override) {
  FullConfig cfg = parse_config_file(config_path);
  const TuneGrid grid = parse_grid_file(grid_path);
  if (seed_set) cfg.experiment.root_seed = seed;
  cfg.experiment.threads =
      resolve_threads(threads_set, threads, cfg.experiment.threads);
  if (!out_override.empty()) cfg.output.dir = out_override;

  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);

  const TuneResult result = tune_sweep(cfg.experiment, grid);
  apply_tune_choices(cfg, result);

  write_file(dir / "tuned_config.json", effective_config_text(cfg));
  write_csv(dir / "tune_table.csv",
            [&](std::ostream& os) { write_tune_table_csv(os, result); });

  for (const auto& choice : result.choices) {
    std::cout << to_string(choice.kind) << " sigma=" << format_sig6(choice.sigma)
              << ":";
    if (choice.point.empty()) std::cout << " base";
    for (const auto& [name, value] : choice.point)
      std::cout << ' ' << name << '=' << format_sig6(value);
    std::cout << " (mean regret " << format_sig6(choice.mean_regret) << ")\n";
  }
  return 0;
}

int cmd_validate_design(std::size_t k, std::size_t runs, std::uint64_t seed,
                        const std::string& out_dir) {
  RngStream rng(seed,
                stream_id_for(StreamPhase::design, 0, AgentKind::x_random, 0.0));
  InitialDesign design;
  try {
    design = generate_initial_design(k, runs, rng);
  } catch (const DesignSearchError& e) {
    std::cerr << "design search failed: " << e.what() << "\n";
    return 1;
  }
  const DesignValidation v = validate_design(design);

  double max_balance = 0.0;
  for (double s : v.column_balance) max_balance = std::max(max_balance, std::abs(s));
  std::cout << "design: runs=" << runs << " k=" << k
            << " model_columns=" << v.columns << "\n"
            << "balance: max |column sum| = " << format_sig6(max_balance) << "\n"
            << "main-effect orthogonality: max |gram off-diagonal| = "
            << format_sig6(v.max_main_offdiag) << "\n"
            << "model-matrix rank: " << v.rank << " / " << v.columns << "\n"
            << "result: " << (v.pass() ? "PASS" : "FAIL") << "\n";

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_csv(dir / "design.csv",
            [&](std::ostream& os) { write_design_csv(os, design); });
  return v.pass() ? 0 : 1;
}

int cmd_sample_surfaces(const std::string& config_path, std::size_t count,
                        bool seed_set, std::uint64_t seed,
                        const std::string& out_override) {
  FullConfig cfg = parse_config_file(config_path);
  if (seed_set) cfg.experiment.root_seed = seed;
  if (!out_override.empty()) cfg.output.dir = out_override;
  if (count == 0) throw ConfigError("--count must be >= 1");

  const ArmSet arms = enumerate_arms(cfg.experiment.k);
  const NoiseModel noise{cfg.experiment.noise_kind,
                         cfg.experiment.noise_sigmas.front()};
  std::vector<ResponseSurface> surfaces;
  surfaces.reserve(count);
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng(cfg.experiment.root_seed,
                  stream_id_for(StreamPhase::surface, i, AgentKind::x_random, 0.0));
    SurfaceDraw draw =
        sample_admissible_surface(rng, cfg.experiment.hpm, arms, noise);
    rejected += draw.rejected;
    surfaces.push_back(std::move(draw.surface));
  }

  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);
  write_csv(dir / "surfaces.csv", [&](std::ostream& os) {
    write_surfaces_csv(os, surfaces);
  });

  // Activation rates and coefficient spread per effect order.
  const std::size_t k = cfg.experiment.k;
  const std::size_t mains_end = 1 + k;
  const std::size_t pairs_end = agent_feature_count(k);
  const std::size_t total = true_feature_count(k);
  struct OrderStats {
    std::size_t terms = 0, active = 0;
    double sumsq = 0.0;
  } mains, pairs, triples;
  double intercept_sumsq = 0.0;
  for (const ResponseSurface& s : surfaces) {
    intercept_sumsq += s.theta[0] * s.theta[0];
    for (std::size_t i = 1; i < total; ++i) {
      OrderStats& st =
          i < mains_end ? mains : (i < pairs_end ? pairs : triples);
      ++st.terms;
      if (s.active[i]) {
        ++st.active;
        st.sumsq += s.theta[i] * s.theta[i];
      }
    }
  }
  auto line = [](const char* name, const OrderStats& st) {
    const double rate =
        st.terms ? static_cast<double>(st.active) / static_cast<double>(st.terms)
                 : 0.0;
    const double sd = st.active ? std::sqrt(st.sumsq / static_cast<double>(st.active))
                                : 0.0;
    std::cout << name << ": activation " << format_sig6(rate)
              << ", active-coefficient std " << format_sig6(sd) << "\n";
  };
  std::cout << "surfaces: " << surfaces.size() << " (rejected " << rejected
            << ")\n";
  line("main effects", mains);
  line("two-way     ", pairs);
  line("three-way   ", triples);
  std::cout << "intercept std: "
            << format_sig6(surfaces.empty()
                               ? 0.0
                               : std::sqrt(intercept_sumsq /
                                           static_cast<double>(surfaces.size())))
            << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Linear stochastic bandit simulator with bootstrap agents"};
  app.require_subcommand(1);

  std::string config_path, grid_path, out_dir;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t k = 7, runs = 32, count = 1;

  auto* sim = app.add_subcommand("simulate",
                                 "Run the configured experiment; write curve "
                                 "and summary CSVs");
  sim->add_option("--config", config_path, "Config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sim_out = sim->add_option("--out", out_dir, "Output directory");
  auto* sim_seed = sim->add_option("--seed", seed, "Override root seed");
  auto* sim_threads = sim->add_option("--threads", threads, "Worker threads");

  auto* tune = app.add_subcommand(
      "tune", "Sweep hyperparameter grids; write a tuned config");
  tune->add_option("--config", config_path, "Config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  tune->add_option("--grid", grid_path, "Grid file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* tune_out = tune->add_option("--out", out_dir, "Output directory");
  auto* tune_seed = tune->add_option("--seed", seed, "Override root seed");
  auto* tune_threads = tune->add_option("--threads", threads, "Worker threads");

  auto* vd = app.add_subcommand("validate-design",
                                "Generate and validate an initialization "
                                "design; write its CSV");
  vd->add_option("--k", k, "Number of treatments")->required();
  vd->add_option("--runs", runs, "Number of design runs")->required();
  vd->add_option("--seed", seed, "Search seed");
  vd->add_option("--out", out_dir, "Output directory")->default_val(".");

  auto* ss = app.add_subcommand("sample-surfaces",
                                "Sample response surfaces; write them and "
                                "print calibration stats");
  ss->add_option("--config", config_path, "Config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  ss->add_option("--count", count, "Number of surfaces")->required();
  auto* ss_seed = ss->add_option("--seed", seed, "Override root seed");
  auto* ss_out = ss->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, sim_seed->count() > 0, seed,
                          sim_threads->count() > 0, threads,
                          sim_out->count() ? out_dir : "");
    if (tune->parsed())
      return cmd_tune(config_path, grid_path, tune_seed->count() > 0, seed,
                      tune_threads->count() > 0, threads,
                      tune_out->count() ? out_dir : "");
    if (vd->parsed()) return cmd_validate_design(k, runs, seed, out_dir);
    if (ss->parsed())
      return cmd_sample_surfaces(config_path, count, ss_seed->count() > 0, seed,
                                 ss_out->count() ? out_dir : "");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace bandit
