#pragma once

#include <string>

#include "agmon/config.hpp"
#include "agmon/weights.hpp"

namespace agmon {

struct SweepRow {
    double epsilon = 0;
    std::string mode;
    double E0 = 0;
    double r1 = 0, r2 = 0, r3 = 0;
    double slope = 0;
    double lemma23_slack = 0;
    bool region_pass = false;
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    double c_prime = 0;
    double b_big = 0;
    bool omega_in_core = false;
    bool thm24_ok = false;
    double min_f = 0;
    double delta_used = 0;
    int cut_count = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool pass = true;
};

/// full per-epsilon, per-mode verification pipeline (weights, regions, decay)
SweepResult agmon_sweep(const ExperimentConfig& cfg);

/// executes one CLI command; returns the process exit code
int run_command(const ExperimentConfig& cfg, const std::string& command,
                const std::string& out_dir, bool serial);

} // namespace agmon
