#include "bandit/report.hpp"

#include <cstdio>
#include <ostream>

namespace bandit {

std::string format_sig6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_curve_csv(std::ostream& os, const ExperimentReport& report) {
  os << "agent,noise_sigma,trial,mean_pseudo_performance,stderr,n_surfaces\n";
  for (const auto& row : report.curve) {
    os << to_string(row.kind) << ',' << format_sig6(row.sigma) << ','
       << row.trial << ',' << format_sig6(row.mean_pseudo_performance) << ','
       << format_sig6(row.stderr_mean) << ',' << row.n << '\n';
  }
}

void write_summary_csv(std::ostream& os, const ExperimentReport& report) {
  os << "agent,noise_sigma,horizon,mean_cumulative_regret,stderr,n_surfaces,"
        "seed\n";
  for (const auto& row : report.summary) {
    os << to_string(row.kind) << ',' << format_sig6(row.sigma) << ','
       << row.horizon << ',' << format_sig6(row.mean_cumulative_regret) << ','
       << format_sig6(row.stderr_mean) << ',' << row.n << ','
       << report.root_seed << '\n';
  }
}

void write_failures_csv(std::ostream& os, const ExperimentReport& report) {
  os << "surface,agent,noise_sigma,message\n";
  for (const auto& f : report.failures) {
    std::string msg = f.message;
    for (char& c : msg)
      if (c == ',' || c == '\n') c = ';';
    os << f.surface_id << ',' << to_string(f.kind) << ','
       << format_sig6(f.sigma) << ',' << msg << '\n';
  }
}

void write_design_csv(std::ostream& os, const InitialDesign& design) {
  for (const Arm& run : design.runs) {
    for (std::size_t j = 0; j < run.levels.size(); ++j) {
      if (j) os << ',';
      os << static_cast<int>(run.levels[j]);
    }
    os << '\n';
  }
}

void write_surfaces_csv(std::ostream& os,
                        std::span<const ResponseSurface> surfaces) {
  os << "surface,index,coefficient,active\n";
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    const ResponseSurface& surf = surfaces[s];
    for (std::size_t i = 0; i < surf.theta.size(); ++i) {
      os << s << ',' << i << ',' << format_sig6(surf.theta[i]) << ','
         << static_cast<int>(surf.active[i]) << '\n';
    }
  }
}

void write_tune_table_csv(std::ostream& os, const TuneResult& result) {
  os << "agent,noise_sigma,point,mean_cumulative_regret,stderr\n";
  for (const auto& cell : result.table) {
    os << to_string(cell.kind) << ',' << format_sig6(cell.sigma) << ',';
    for (std::size_t i = 0; i < cell.point.size(); ++i) {
      if (i) os << ';';
      os << cell.point[i].first << '=' << format_sig6(cell.point[i].second);
    }
    if (cell.point.empty()) os << "base";
    os << ',' << format_sig6(cell.mean_regret) << ','
       << format_sig6(cell.stderr_mean) << '\n';
  }
}

}  // namespace bandit
