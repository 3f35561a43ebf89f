#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ospline {

/// One verification check: exact checks gate the exit code, tracked checks
/// only record measured constants and fits.
struct CheckResult {
  std::string name;
  bool exact = false;
  bool pass = true;  ///< meaningful for exact checks; tracked ones stay true
  std::map<std::string, double> values;
  std::string note;
};

struct VerificationReport {
  std::string id;
  int k = 0;
  int n = 0;
  std::string family;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
};

/// True iff every exact check passed.
bool all_exact_pass(const VerificationReport& r);

/// Appends a check, rejecting duplicate names.
void add_check(VerificationReport& r, CheckResult c);

/// summary.csv: header `check,exact,pass,detail`, one row per check, detail
/// holding `key=value` pairs joined by `;`.  Fully deterministic: map order,
/// shortest round-trip doubles, no timestamps.
std::string summary_csv_text(const VerificationReport& r);
void write_summary_csv(const std::string& path, const VerificationReport& r);

/// checks/<name>.csv: header `key,value`, one row per measured value.
void write_check_csv(const std::string& path, const CheckResult& c);

/// Whole report as JSON; read_report_json inverts it exactly.
std::string report_json_text(const VerificationReport& r);
void write_report_json(const std::string& path, const VerificationReport& r);
VerificationReport read_report_json(const std::string& path);

}  // namespace ospline
