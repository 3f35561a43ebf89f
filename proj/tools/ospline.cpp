// Command line front end: runs the verification battery, re-emits stored
// reports, and writes knot files for the custom-file family.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ospline/experiment.hpp"
#include "ospline/generators.hpp"
#include "ospline/io.hpp"
#include "ospline/knots.hpp"
#include "ospline/report.hpp"

namespace {

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

void print_check(const ospline::CheckResult& c, bool exact_only) {
  if (exact_only && !c.exact) return;
  if (c.exact)
    std::cout << (c.pass ? "PASS " : "FAIL ");
  else
    std::cout << "  *  ";
  std::cout << c.name;
  for (const auto& [key, value] : c.values)
    std::cout << " " << key << "=" << ospline::format_double(value);
  if (!c.note.empty()) std::cout << "  (" << c.note << ")";
  std::cout << "\n";
}

void print_report(const ospline::VerificationReport& rep, bool exact_only) {
  std::cout << "battery " << rep.id << "\n";
  int exact_total = 0, exact_passed = 0;
  for (const ospline::CheckResult& c : rep.checks) {
    print_check(c, exact_only);
    if (c.exact) {
      ++exact_total;
      if (c.pass) ++exact_passed;
    }
  }
  std::cout << "exact checks: " << exact_passed << "/" << exact_total
            << " passed\n";
}

struct CliOptions {
  std::string config;
  int k = 2;
  std::string family = "dyadic";
  int n = 16;
  std::string p = "1.5";
  std::uint64_t seed = 1;
  int trials = 10;
  int m = 8;
  int n_min = -1;
  std::string out = "out";
  std::string input;
};

void add_battery_options(CLI::App* cmd, CliOptions* o, bool with_out) {
  cmd->add_option("--config", o->config,
                  "key=value config file; other battery flags are ignored");
  cmd->add_option("--k", o->k, "spline order")->check(CLI::Range(1, 6));
  cmd->add_option("--family", o->family,
                  "dyadic | uniform-random | clustered | repeated-knot | "
                  "custom-file");
  cmd->add_option("--n", o->n, "interior knot count")
      ->check(CLI::Range(1, 2000));
  cmd->add_option("--p", o->p, "comma separated exponents, each in (1,inf)");
  cmd->add_option("--seed", o->seed, "random seed");
  cmd->add_option("--trials", o->trials, "sign-flip trials")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--m", o->m, "grid cells per knot interval")
      ->check(CLI::Range(1, 64));
  cmd->add_option("--n-min", o->n_min,
                  "first asymptotic index; -1 picks max(2k+2, 4k)");
  cmd->add_option("--input", o->input, "knot file for the custom-file family");
  if (with_out) cmd->add_option("--out", o->out, "output directory");
}

ospline::ExperimentConfig to_config(const CliOptions& o) {
  if (!o.config.empty()) return ospline::parse_config_file(o.config);
  ospline::ExperimentConfig cfg;
  cfg.k = o.k;
  cfg.family = ospline::parse_family(o.family);
  cfg.n = o.n;
  cfg.p_list = split_doubles(o.p);
  cfg.seed = o.seed;
  cfg.trials = o.trials;
  cfg.m = o.m;
  cfg.n_k_override = o.n_min;
  cfg.output_dir = o.out;
  cfg.input = o.input;
  ospline::validate_config(cfg);
  return cfg;
}

int cmd_run(const CliOptions& o) {
  const ospline::ExperimentConfig cfg = to_config(o);
  const ospline::VerificationReport rep = ospline::run_experiment(cfg);
  ospline::emit_report(rep, cfg, cfg.output_dir);
  print_report(rep, false);
  std::cout << "wrote " << cfg.output_dir << "/summary.csv\n";
  return ospline::report_exit_code(rep);
}

int cmd_verify(const CliOptions& o, bool quick) {
  ospline::ExperimentConfig cfg = to_config(o);
  if (quick) {
    cfg.n = std::min(cfg.n, 20);
    cfg.trials = std::min(cfg.trials, 5);
    cfg.m = std::min(cfg.m, 4);
  }
  const ospline::VerificationReport rep = ospline::run_experiment(cfg);
  print_report(rep, quick);
  return ospline::report_exit_code(rep);
}

int cmd_report(const std::string& from, const std::string& format) {
  const ospline::VerificationReport rep =
      ospline::read_report_json(from + "/report.json");
  if (format == "json")
    std::cout << ospline::report_json_text(rep);
  else
    std::cout << ospline::summary_csv_text(rep);
  return ospline::report_exit_code(rep);
}

int cmd_knots(int k, const std::string& family, int n, std::uint64_t seed,
              const std::string& domain, const std::string& out) {
  const ospline::Domain d = domain == "torus" ? ospline::Domain::torus
                                              : ospline::Domain::interval;
  const ospline::KnotSequence seq = ospline::generate_sequence(
      ospline::parse_family(family), n, seed, k, d);
  ospline::write_knot_sequence(out, seq);
  std::cout << "wrote " << out << " (" << seq.points.size() << " knots)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthonormal spline system workbench"};
  app.require_subcommand(1);

  CliOptions run_opts;
  CLI::App* run = app.add_subcommand(
      "run", "run the verification battery and write a report directory");
  add_battery_options(run, &run_opts, true);

  CliOptions verify_opts;
  bool quick = false;
  CLI::App* verify = app.add_subcommand(
      "verify", "run the battery and print results without writing files");
  add_battery_options(verify, &verify_opts, false);
  verify->add_flag("--quick", quick,
                   "small system, exact checks only in the output");

  std::string from, format = "csv";
  CLI::App* report =
      app.add_subcommand("report", "re-emit a stored report to stdout");
  report->add_option("--from", from, "report directory")->required();
  report->add_option("--format", format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  int kk = 2, kn = 8;
  std::uint64_t kseed = 1;
  std::string kfamily = "dyadic", kdomain = "torus", kout = "knots.txt";
  CLI::App* knots =
      app.add_subcommand("knots", "generate a knot sequence file");
  knots->add_option("--k", kk, "spline order")->check(CLI::Range(1, 6));
  knots->add_option("--family", kfamily, "generator family");
  knots->add_option("--n", kn, "knot count")->check(CLI::Range(1, 2000));
  knots->add_option("--seed", kseed, "random seed");
  knots->add_option("--domain", kdomain, "interval | torus")
      ->check(CLI::IsMember({"interval", "torus"}));
  knots->add_option("--out", kout, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (verify->parsed()) return cmd_verify(verify_opts, quick);
    if (report->parsed()) return cmd_report(from, format);
    if (knots->parsed())
      return cmd_knots(kk, kfamily, kn, kseed, kdomain, kout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
