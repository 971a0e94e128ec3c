#pragma once

#include <iosfwd>

#include "smclab/config.hpp"
#include "smclab/report.hpp"

namespace smclab {

ExperimentReport run_variance_step0(const ExperimentConfig& cfg);
ExperimentReport run_conjecture1(const ExperimentConfig& cfg);
ExperimentReport run_conjecture2(const ExperimentConfig& cfg);
ExperimentReport run_variance_step1(const ExperimentConfig& cfg);
ExperimentReport run_clt(const ExperimentConfig& cfg);
ExperimentReport run_compare_resamplers(const ExperimentConfig& cfg);

// Dispatches on cfg.experiment; beta-table has its own writer.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

void write_beta_table(const ExperimentConfig& cfg, std::ostream& out);

// Trajectory CSV of one filter run with cfg.particles particles up to cfg.step.
void write_trajectory(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace smclab
