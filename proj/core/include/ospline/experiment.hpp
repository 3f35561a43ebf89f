#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ospline/generators.hpp"
#include "ospline/ortho.hpp"
#include "ospline/report.hpp"

namespace ospline {

/// Experiment settings, readable from flat `key=value` text.
struct ExperimentConfig {
  int k = 2;
  Family family = Family::dyadic;
  int n = 16;
  std::vector<double> p_list{1.5};
  std::uint64_t seed = 1;
  int trials = 10;
  int m = 8;  ///< grid subdivision per knot interval
  int n_k_override = -1;  ///< first asymptotic index; -1 picks max(2k+2, 4k)
  std::string output_dir = "out";
  std::string input;  ///< knot file, used by the custom-file family
};

/// Parses `key=value` lines; blank lines and `#` comments are skipped;
/// unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Enforces the desk-scale ceilings: 1 <= n <= 2000, 1 <= k <= 6, every
/// p in (1, inf), trials >= 1, 1 <= m <= 64.
void validate_config(const ExperimentConfig& cfg);

/// Index of the first function treated as asymptotic in the tracked checks.
int first_asymptotic_index(const ExperimentConfig& cfg);

/// Sign-flip Monte Carlo: r_max/r_min over `trials` Rademacher patterns of
/// ||sum_n eps_n a_n f_n||_p / ||f||_p, along with r_s = ||Sf||_p / ||f||_p.
struct UnconditionalityResult {
  double r_max = 0.0;
  double r_min = 0.0;
  double r_s = 0.0;
  int trials = 0;
};

UnconditionalityResult unconditionality_trial(const OrthoSystem& sys,
                                              const std::vector<double>& coeffs,
                                              double p, int trials,
                                              std::uint64_t seed, int m);

/// Runs the whole battery on the clamped system generated from the config
/// and, when n >= 2k+2, also on the periodic one.
VerificationReport run_experiment(const ExperimentConfig& cfg);

/// Writes summary.csv, report.json, meta.json, and checks/<name>.csv.
void emit_report(const VerificationReport& r, const ExperimentConfig& cfg,
                 const std::string& dir);

/// 0 when every exact check passed, 1 otherwise.
int report_exit_code(const VerificationReport& r);

}  // namespace ospline
