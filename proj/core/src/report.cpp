#include "ospline/report.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "ospline/io.hpp"

namespace ospline {

bool all_exact_pass(const VerificationReport& r) {
  for (const CheckResult& c : r.checks)
    if (c.exact && !c.pass) return false;
  return true;
}

void add_check(VerificationReport& r, CheckResult c) {
  for (const CheckResult& old : r.checks)
    if (old.name == c.name)
      throw std::invalid_argument("duplicate check name: " + c.name);
  r.checks.push_back(std::move(c));
}

namespace {

std::string csv_escape(const std::string& s) {
  bool quote = false;
  for (char c : s)
    if (c == ',' || c == '"' || c == '\n') quote = true;
  if (!quote) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string detail_string(const CheckResult& c) {
  std::string out;
  for (const auto& [key, value] : c.values) {
    if (!out.empty()) out += ";";
    out += key + "=" + format_double(value);
  }
  if (!c.note.empty()) {
    if (!out.empty()) out += ";";
    out += "note=" + c.note;
  }
  return out;
}

}  // namespace

std::string summary_csv_text(const VerificationReport& r) {
  std::string out = "check,exact,pass,detail\n";
  for (const CheckResult& c : r.checks)
    out += csv_escape(c.name) + "," + (c.exact ? "1" : "0") + "," +
           (c.pass ? "1" : "0") + "," + csv_escape(detail_string(c)) + "\n";
  return out;
}

void write_summary_csv(const std::string& path, const VerificationReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << summary_csv_text(r);
  if (!out) throw std::runtime_error("write failed on " + path);
}

void write_check_csv(const std::string& path, const CheckResult& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "key,value\n";
  out << "exact," << (c.exact ? 1 : 0) << "\n";
  out << "pass," << (c.pass ? 1 : 0) << "\n";
  for (const auto& [key, value] : c.values)
    out << csv_escape(key) << "," << format_double(value) << "\n";
  if (!c.note.empty()) out << "note," << csv_escape(c.note) << "\n";
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::string report_json_text(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["k"] = r.k;
  j["n"] = r.n;
  j["family"] = r.family;
  j["seed"] = r.seed;
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : r.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["exact"] = c.exact;
    jc["pass"] = c.pass;
    nlohmann::ordered_json vals = nlohmann::ordered_json::object();
    for (const auto& [key, value] : c.values) vals[key] = value;
    jc["values"] = vals;
    jc["note"] = c.note;
    j["checks"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const VerificationReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report_json_text(r);
  if (!out) throw std::runtime_error("write failed on " + path);
}

VerificationReport read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  in >> j;
  VerificationReport r;
  r.id = j.at("id").get<std::string>();
  r.k = j.at("k").get<int>();
  r.n = j.at("n").get<int>();
  r.family = j.at("family").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jc : j.at("checks")) {
    CheckResult c;
    c.name = jc.at("name").get<std::string>();
    c.exact = jc.at("exact").get<bool>();
    c.pass = jc.at("pass").get<bool>();
    for (const auto& [key, value] : jc.at("values").items())
      c.values[key] = value.get<double>();
    c.note = jc.at("note").get<std::string>();
    r.checks.push_back(std::move(c));
  }
  return r;
}

}  // namespace ospline
