#pragma once

#include <iosfwd>
#include <string>

#include "bandit/config.hpp"

namespace bandit {

// 6-significant-digit decimal serialization; reproducible bytes for
// identical inputs.
std::string format_sig6(double v);

// header: agent,noise_sigma,trial,mean_pseudo_performance,stderr,n_surfaces
void write_curve_csv(std::ostream& os, const ExperimentReport& report);
// header: agent,noise_sigma,horizon,mean_cumulative_regret,stderr,n_surfaces,seed
void write_summary_csv(std::ostream& os, const ExperimentReport& report);
// header: surface,agent,noise_sigma,message
void write_failures_csv(std::ostream& os, const ExperimentReport& report);

// One run per row, comma-separated +-1 levels, no header.
void write_design_csv(std::ostream& os, const InitialDesign& design);

// header: surface,index,coefficient,active
void write_surfaces_csv(std::ostream& os,
                        std::span<const ResponseSurface> surfaces);

// header: agent,noise_sigma,point,mean_cumulative_regret,stderr
void write_tune_table_csv(std::ostream& os, const TuneResult& result);

}  // namespace bandit
