#pragma once

#include <optional>
#include <string>

#include "nonlocal/config.hpp"
#include "nonlocal/report.hpp"

namespace nonlocal {

/// Executes the configured experiment and returns its report (no I/O).
VerificationReport run_experiment(const ExperimentConfig& cfg);

struct RunOutcome {
    VerificationReport report;
    int exit_code = 0;  // 0 pass, 2 soft-verdict failure, 1 error / hard failure
};

/// run + persist: writes report.json, cases.csv and timings.csv under out_dir;
/// compares against the baseline file when one is supplied and applies the
/// two-tier verdict.
RunOutcome run_and_persist(const ExperimentConfig& cfg, const std::string& out_dir,
                           const std::optional<std::string>& baseline_path);

/// Freezes the summary of a fresh run as the regression baseline (refuses to
/// overwrite a baseline recorded under a different config hash).
void freeze_baseline(const ExperimentConfig& cfg, const std::string& out_dir,
                     const std::string& baseline_path);

}  // namespace nonlocal
