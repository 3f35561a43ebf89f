#include "ospline/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ospline {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_knot_sequence(const std::string& path, const KnotSequence& seq) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "k=" << seq.order << " domain="
      << (seq.domain == Domain::torus ? "torus" : "interval") << "\n";
  for (double x : seq.points) out << format_double(x) << "\n";
  if (!out) throw std::runtime_error("write failed on " + path);
}

KnotSequence read_knot_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("missing header in " + path);
  KnotSequence seq;
  std::istringstream hs(header);
  std::string tok;
  bool have_k = false, have_domain = false;
  while (hs >> tok) {
    if (tok.rfind("k=", 0) == 0) {
      seq.order = std::stoi(tok.substr(2));
      have_k = true;
    } else if (tok.rfind("domain=", 0) == 0) {
      const std::string d = tok.substr(7);
      if (d == "torus")
        seq.domain = Domain::torus;
      else if (d == "interval")
        seq.domain = Domain::interval;
      else
        throw std::runtime_error("unknown domain in " + path);
      have_domain = true;
    } else {
      throw std::runtime_error("unexpected header token in " + path);
    }
  }
  if (!have_k || !have_domain)
    throw std::runtime_error("incomplete header in " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    seq.points.push_back(std::stod(line));
  }
  validate(seq);
  return seq;
}

void write_dense_matrix(const std::string& path, int rows, int cols,
                        const std::vector<double>& row_major) {
  if (row_major.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("matrix data does not match its shape");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << rows << " " << cols << "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) out << " ";
      out << format_double(row_major[static_cast<std::size_t>(r) * cols + c]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::vector<double> read_dense_matrix(const std::string& path, int* rows,
                                      int* cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  int r = 0, c = 0;
  if (!(in >> r >> c) || r < 0 || c < 0)
    throw std::runtime_error("bad matrix header in " + path);
  std::vector<double> data(static_cast<std::size_t>(r) * c);
  for (double& x : data)
    if (!(in >> x)) throw std::runtime_error("truncated matrix in " + path);
  if (rows) *rows = r;
  if (cols) *cols = c;
  return data;
}

void write_system_table(const std::string& path, const OrthoSystem& sys) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int k = sys.sequence.order;
  out << "# n i0 norm2 J_left J_length alpha[" << k + 1 << "] w[level dim]\n";
  for (int i = 0; i < sys.size(); ++i) {
    const int block = static_cast<int>(sys.initial_block.size());
    out << (i + 1) << " ";
    if (i < block) {
      const Spline& s = sys.initial_block[static_cast<std::size_t>(i)];
      out << -1 << " " << format_double(1.0) << " " << format_double(0.0)
          << " " << format_double(1.0);
      for (int t = 0; t <= k; ++t) out << " " << format_double(0.0);
      for (double x : s.coeffs) out << " " << format_double(x);
    } else {
      const OrthoFunction& f =
          sys.functions[static_cast<std::size_t>(i - block)];
      out << f.i0 << " " << format_double(f.norm2) << " "
          << format_double(f.J.J.left) << " " << format_double(f.J.J.length);
      for (double x : alpha_window(f)) out << " " << format_double(x);
      for (double x : f.w) out << " " << format_double(x);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed on " + path);
}

}  // namespace ospline
