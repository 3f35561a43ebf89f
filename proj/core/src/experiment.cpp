#include "ospline/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ospline/analysis.hpp"
#include "ospline/io.hpp"
#include "ospline/quadrature.hpp"

namespace ospline {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> parse_p_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty p list");
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                             line.back() == '\r'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const std::size_t eq = line.find('=', start);
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = line.substr(start, eq - start);
    const std::string value = line.substr(eq + 1);
    if (key == "k")
      cfg.k = std::stoi(value);
    else if (key == "family")
      cfg.family = parse_family(value);
    else if (key == "n")
      cfg.n = std::stoi(value);
    else if (key == "p_list")
      cfg.p_list = parse_p_list(value);
    else if (key == "seed")
      cfg.seed = std::stoull(value);
    else if (key == "trials")
      cfg.trials = std::stoi(value);
    else if (key == "m")
      cfg.m = std::stoi(value);
    else if (key == "n_k_override" || key == "N_k_override")
      cfg.n_k_override = std::stoi(value);
    else if (key == "output_dir")
      cfg.output_dir = value;
    else if (key == "input")
      cfg.input = value;
    else
      throw std::invalid_argument("unknown config key: " + key);
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.k < 1 || cfg.k > 6)
    throw std::invalid_argument("order k must lie in [1, 6]");
  if (cfg.n < 1 || cfg.n > 2000)
    throw std::invalid_argument("knot count n must lie in [1, 2000]");
  if (cfg.p_list.empty()) throw std::invalid_argument("empty p list");
  for (double p : cfg.p_list)
    if (!(p > 1.0) || !(p < 1e6))
      throw std::invalid_argument("exponents must satisfy 1 < p < inf");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (cfg.m < 1 || cfg.m > 64)
    throw std::invalid_argument("grid subdivision m must lie in [1, 64]");
  if (cfg.family == Family::custom_file && cfg.input.empty())
    throw std::invalid_argument("custom-file experiments need input=<path>");
}

int first_asymptotic_index(const ExperimentConfig& cfg) {
  if (cfg.n_k_override > 0) return cfg.n_k_override;
  return std::max(2 * cfg.k + 2, 4 * cfg.k);
}

namespace {

double test_wave(double x) {
  return std::sin(2.0 * kPi * x) + 0.3 * std::cos(6.0 * kPi * x) +
         0.15 * std::sin(10.0 * kPi * x + 1.0);
}

struct Bundle {
  bool torus = false;
  OrthoSystem sys;
  std::vector<double> a;  ///< expansion of the projected test wave
  Spline pf;              ///< that projection, primal on the finest level
};

Bundle make_bundle(const KnotSequence& seq) {
  Bundle b;
  b.torus = seq.domain == Domain::torus;
  b.sys = build_system(seq);
  const GramSystem& gram = *b.sys.finest_gram;
  b.pf = gram.project(test_wave);
  b.a.resize(static_cast<std::size_t>(b.sys.size()));
  for (int n = 0; n < b.sys.size(); ++n)
    b.a[static_cast<std::size_t>(n)] =
        gram_dot(gram, b.pf.coeffs, b.sys.finest[static_cast<std::size_t>(n)]);
  return b;
}

Spline combine(const OrthoSystem& sys, const std::vector<double>& coeffs) {
  std::vector<double> c(sys.finest.front().size(), 0.0);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (coeffs[n] == 0.0) continue;
    const std::vector<double>& fn = sys.finest[n];
    for (std::size_t r = 0; r < c.size(); ++r) c[r] += coeffs[n] * fn[r];
  }
  return make_primal(sys.finest_level(), std::move(c));
}

double grid_lp(const GridFunction& g, double p) {
  double acc = 0.0;
  const std::size_t pts = g.point.size();
  for (int i = 0; i < g.cells(); ++i) {
    const double va = std::abs(g.value[static_cast<std::size_t>(i)]);
    const double vb = std::abs(g.value[(static_cast<std::size_t>(i) + 1) % pts]);
    acc += 0.5 * (std::pow(va, p) + std::pow(vb, p)) *
           (g.cell_right(i) - g.cell_left(i));
  }
  return std::pow(acc, 1.0 / p);
}

std::string pkey(const std::string& prefix, double p) {
  return prefix + "_p" + format_double(p);
}

const char* side_name(const Bundle& b) {
  return b.torus ? "periodic" : "clamped";
}

std::vector<double> knot_values(const Partition& p) {
  std::vector<double> out;
  for (int i = 0; i < p.count(); ++i) {
    const double v = p.knot(i);
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

double interval_distance(double lo1, double hi1, double lo2, double hi2) {
  if (hi1 < lo2) return lo2 - hi1;
  if (hi2 < lo1) return lo1 - hi2;
  return 0.0;
}

double legendre_eval(int d, double t) {
  if (d == 0) return 1.0;
  double pm1 = 1.0, p0 = t;
  for (int n = 1; n < d; ++n) {
    const double pn = ((2.0 * n + 1.0) * t * p0 - n * pm1) / (n + 1.0);
    pm1 = p0;
    p0 = pn;
  }
  return p0;
}

/// Integral of fn over the arc, split at the partition breakpoints (and
/// their period images) so piecewise-polynomial integrands stay exact
/// under the Gauss rule.
double integrate_arc(const Partition& part, const Arc& v, bool torus,
                     int nodes, const std::function<double(double)>& fn) {
  std::vector<double> cuts{v.left, arc_right(v)};
  const std::vector<double> bp = breakpoints(part);
  for (int shift = 0; shift <= (torus ? 1 : 0); ++shift)
    for (double b : bp) {
      const double z = b + shift;
      if (z > cuts.front() && z < cuts.back()) cuts.push_back(z);
    }
  std::sort(cuts.begin(), cuts.end());
  const QuadRule& rule = gauss_rule(nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double hal = 0.5 * (cuts[i + 1] - cuts[i]);
    if (hal <= 0.0) continue;
    for (std::size_t q = 0; q < rule.node.size(); ++q)
      acc += hal * rule.weight[q] * fn(mid + hal * rule.node[q]);
  }
  return acc;
}

/// Own-level partition of the n-th system function (coarsest level for the
/// initial block).
const Partition& own_partition(const OrthoSystem& sys, int n) {
  const int block = static_cast<int>(sys.initial_block.size());
  if (n < block) return *sys.levels.front();
  return *sys.functions[static_cast<std::size_t>(n - block)].partition;
}

bool keeps_no_knot_inside(const Partition& p, const Arc& v, bool torus) {
  const double vl = v.left, vr = arc_right(v);
  for (double y : knot_values(p))
    for (int shift = 0; shift <= (torus ? 1 : 0); ++shift) {
      const double z = y + shift;
      if (z > vl + 1e-14 && z < vr - 1e-14) return false;
    }
  return true;
}

/// Residual of the second vanishing-moment route: subtract from f its best
/// degree-<k polynomial fit on v; the difference pairs to zero with every
/// system function whose own partition keeps no knot inside v.
double polynomial_projection_residual(const Bundle& b, const Arc& v) {
  const OrthoSystem& sys = b.sys;
  const auto part = sys.finest_level();
  const int k = sys.sequence.order;
  const Spline f = combine(sys, b.a);
  const double len = v.length, vl = v.left;
  auto tmap = [&](double x) { return 2.0 * (x - vl) / len - 1.0; };
  std::vector<double> c(static_cast<std::size_t>(k), 0.0);
  for (int d = 0; d < k; ++d)
    c[static_cast<std::size_t>(d)] =
        (2.0 * d + 1.0) / len *
        integrate_arc(*part, v, b.torus, k + 1, [&](double x) {
          return eval(f, x) * legendre_eval(d, tmap(x));
        });
  auto fit = [&](double x) {
    double acc = 0.0;
    for (int d = 0; d < k; ++d)
      acc += c[static_cast<std::size_t>(d)] * legendre_eval(d, tmap(x));
    return acc;
  };
  double worst = 0.0;
  for (int n = 0; n < sys.size(); ++n) {
    if (!keeps_no_knot_inside(own_partition(sys, n), v, b.torus)) continue;
    const Spline fn = finest_spline(sys, n);
    const double resid =
        integrate_arc(*part, v, b.torus, k + 1, [&](double x) {
          return (eval(f, x) - fit(x)) * eval(fn, x);
        });
    worst = std::max(worst, std::abs(resid));
  }
  return worst;
}

// ---- exact checks ---------------------------------------------------------

void check_orthogonality(VerificationReport& rep, const Bundle& c,
                         const Bundle* t) {
  CheckResult r;
  r.name = "orthogonality";
  r.exact = true;
  const double dc = max_orthonormality_defect(c.sys);
  r.values["clamped_defect"] = dc;
  double dt = 0.0;
  if (t) {
    dt = max_orthonormality_defect(t->sys);
    r.values["periodic_defect"] = dt;
  }
  r.pass = dc <= 1e-8 && dt <= 1e-8;
  add_check(rep, std::move(r));
}

double boehm_error(const Bundle& b, std::uint64_t seed) {
  double worst = 0.0;
  const std::size_t levels = b.sys.tables.size();
  const std::size_t stride = std::max<std::size_t>(1, levels / 8);
  for (std::size_t m = 0; m < levels; m += stride) {
    const auto& coarse_p = b.sys.levels[m];
    const auto& fine_p = b.sys.levels[m + 1];
    Rng rng(splitmix64(seed ^ (0xb0e5 + m)));
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> cc(static_cast<std::size_t>(coarse_p->dimension()));
      for (double& x : cc) x = 2.0 * rng.uniform() - 1.0;
      const Spline coarse = make_primal(coarse_p, cc);
      const Spline fine = make_primal(
          fine_p, refine_coeffs(b.sys.tables[m], *fine_p, coarse.coeffs));
      for (int j = 0; j <= 100; ++j) {
        const double x = b.torus ? j / 101.0 : j / 100.0;
        worst = std::max(worst, std::abs(eval(coarse, x) - eval(fine, x)));
      }
    }
  }
  return worst;
}

void check_boehm(VerificationReport& rep, const Bundle& c, const Bundle* t,
                 std::uint64_t seed) {
  CheckResult r;
  r.name = "boehm_identity";
  r.exact = true;
  const double ec = boehm_error(c, seed);
  r.values["clamped_err"] = ec;
  double et = 0.0;
  if (t) {
    et = boehm_error(*t, seed);
    r.values["periodic_err"] = et;
  }
  r.pass = ec <= 1e-12 && et <= 1e-12;
  add_check(rep, std::move(r));
}

void check_remez(VerificationReport& rep, int k, std::uint64_t seed) {
  CheckResult r;
  r.name = "remez";
  r.exact = true;
  Rng rng(splitmix64(seed ^ 0x5e3e2));
  int failures = 0;
  double min_margin = 1.0;
  const int cases = 100;
  for (int t = 0; t < cases; ++t) {
    std::vector<double> poly(static_cast<std::size_t>(k));
    for (double& x : poly) x = 2.0 * rng.uniform() - 1.0;
    const double len = 0.05 + 0.9 * rng.uniform();
    const double a = (1.0 - len) * rng.uniform();
    const RemezResult res = remez_check(poly, a, a + len, k);
    if (!res.pass) ++failures;
    min_margin = std::min(min_margin, res.measure / len - 0.5);
  }
  r.values["cases"] = cases;
  r.values["failures"] = failures;
  r.values["min_margin"] = min_margin;
  r.pass = failures == 0;
  add_check(rep, std::move(r));
}

void check_p2_invariance(VerificationReport& rep, const Bundle& c,
                         const Bundle* t, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "p2_sign_invariance";
  r.exact = true;
  double worst = 0.0;
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    const Spline base = combine(b->sys, b->a);
    const double den = lp_norm(base, 2.0);
    double side = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      std::vector<double> flipped(b->a.size());
      for (std::size_t n = 0; n < b->a.size(); ++n)
        flipped[n] = rademacher_sign(cfg.seed, static_cast<std::uint64_t>(trial),
                                     static_cast<std::uint64_t>(n)) *
                     b->a[n];
      const double num = lp_norm(combine(b->sys, flipped), 2.0);
      side = std::max(side, std::abs(num / den - 1.0));
    }
    r.values[std::string(side_name(*b)) + "_max_dev"] = side;
    worst = std::max(worst, side);
  }
  r.values["trials"] = cfg.trials;
  r.pass = worst <= 1e-8;
  add_check(rep, std::move(r));
}

void check_level_inclusion(VerificationReport& rep, const Bundle& c,
                           const Bundle* t, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "level_inclusion";
  r.exact = true;
  int total = 0;
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    int violations = 0;
    int sets = 0;
    for (int pattern = 0; pattern < 3; ++pattern) {
      std::vector<double> coeffs(b->a.size());
      for (std::size_t n = 0; n < b->a.size(); ++n)
        coeffs[n] = pattern == 0
                        ? b->a[n]
                        : rademacher_sign(cfg.seed, 900 + pattern,
                                          static_cast<std::uint64_t>(n)) *
                              b->a[n];
      const Expansion e = make_expansion(b->sys, coeffs);
      const GridFunction sf = square_function(e, cfg.m);
      std::vector<double> positive;
      for (double v : sf.value)
        if (v > 0.0) positive.push_back(v);
      if (positive.empty()) continue;
      std::sort(positive.begin(), positive.end());
      for (double quant : {0.25, 0.5, 0.75, 0.9}) {
        const double lambda =
            positive[static_cast<std::size_t>(quant * (positive.size() - 1))];
        const LevelSets ls = level_sets(sf, lambda, 0.5);
        ++sets;
        if (!ls.inclusion) ++violations;
      }
    }
    r.values[std::string(side_name(*b)) + "_violations"] = violations;
    r.values[std::string(side_name(*b)) + "_sets"] = sets;
    total += violations;
  }
  r.pass = total == 0;
  add_check(rep, std::move(r));
}

void check_beta_support(VerificationReport& rep, const Bundle* t, int k) {
  CheckResult r;
  r.name = "beta_support";
  r.exact = true;
  if (!t || t->sys.finest_level()->count() < 2 * k + 2) {
    r.values["cases"] = 0;
    r.note = "needs a periodic system with n >= 2k+2";
    add_check(rep, std::move(r));
    return;
  }
  const auto part = t->sys.finest_level();
  const int n = part->count();
  double c_min = 1e300, c_max = 0.0, spread_max = 0.0, off_rel = 0.0;
  double rj_min = 1e300, rj_max = 0.0, beta_max = 0.0;
  int cases = 0;
  for (int s = 0; s < 5; ++s) {
    const long i0 = static_cast<long>(s) * n / 5;
    const ComparisonReport cr = compare_periodic_nonperiodic(part, i0);
    ++cases;
    c_min = std::min(c_min, cr.c);
    c_max = std::max(c_max, cr.c);
    spread_max = std::max(spread_max, cr.c_spread);
    off_rel = std::max(off_rel, cr.max_offB_residual / cr.g_norm2);
    rj_min = std::min(rj_min, cr.ratio_J);
    rj_max = std::max(rj_max, cr.ratio_J);
    beta_max = std::max(beta_max, cr.max_beta);
  }
  r.values["cases"] = cases;
  r.values["c_min"] = c_min;
  r.values["c_max"] = c_max;
  r.values["c_spread_max"] = spread_max;
  r.values["beta_off_rel_max"] = off_rel;
  r.values["ratioJ_min"] = rj_min;
  r.values["ratioJ_max"] = rj_max;
  r.values["beta_boundary_max"] = beta_max;
  r.pass = c_min > 0.0 && spread_max <= 1e-10 && off_rel <= 1e-10;
  add_check(rep, std::move(r));
}

// ---- tracked checks -------------------------------------------------------

void check_gram_decay(VerificationReport& rep, const Bundle& c,
                      const Bundle* t, double* q_clamped, double* q_periodic) {
  CheckResult r;
  r.name = "gram_decay";
  const DecayFit fc = c.sys.finest_gram->fit_decay();
  r.values["clamped_q"] = fc.q;
  r.values["clamped_C"] = fc.C;
  r.values["clamped_rms"] = fc.residual;
  r.values["clamped_points"] = static_cast<double>(fc.points);
  *q_clamped = fc.q;
  if (t) {
    const DecayFit ft = t->sys.finest_gram->fit_decay();
    r.values["periodic_q"] = ft.q;
    r.values["periodic_C"] = ft.C;
    r.values["periodic_rms"] = ft.residual;
    r.values["periodic_points"] = static_cast<double>(ft.points);
    *q_periodic = ft.q;
  }
  r.note = "inverse-entry decay; q below one expected";
  add_check(rep, std::move(r));
}

void check_w_decay(VerificationReport& rep, const Bundle& c, const Bundle* t,
                   int n_min, double* q_w) {
  CheckResult r;
  r.name = "w_decay";
  {
    std::vector<double> xs, ys;
    for (const OrthoFunction& f : c.sys.functions) {
      if (f.index_n < n_min || f.J.whole_domain) continue;
      const Partition& p = *f.partition;
      double wmax = 0.0;
      for (double w : f.w) wmax = std::max(wmax, std::abs(w));
      for (long j = -p.order(); j < p.count(); ++j) {
        const double wj = f.w[static_cast<std::size_t>(j + p.order())];
        if (std::abs(wj) <= 1e-14 * wmax) continue;
        const double lo = p.knot(j), hi = p.knot(j + p.order());
        const double dist =
            interval_distance(lo, hi, f.J.J.left, arc_right(f.J.J));
        xs.push_back(static_cast<double>(distance_count(p, p.knot(j), f.J)));
        ys.push_back(std::log(std::abs(wj) * (f.J.J.length + dist + (hi - lo))));
      }
    }
    const LineFit fit = fit_line(xs, ys);
    r.values["clamped_q"] = std::exp(fit.slope);
    r.values["clamped_C"] = std::exp(fit.intercept);
    r.values["clamped_rms"] = fit.rms;
    r.values["clamped_points"] = static_cast<double>(fit.points);
    *q_w = std::exp(fit.slope);
  }
  if (t) {
    std::vector<double> xs, ys;
    for (const OrthoFunction& f : t->sys.functions) {
      if (f.index_n < n_min || f.J.whole_domain) continue;
      const Partition& p = *f.partition;
      const int n = p.count();
      const int k = p.order();
      double wmax = 0.0;
      for (double w : f.w) wmax = std::max(wmax, std::abs(w));
      for (int i = 0; i < n; ++i) {
        const double wi = f.w[static_cast<std::size_t>(i)];
        if (std::abs(wi) <= 1e-14 * wmax) continue;
        double denom = 1e300;
        for (long j = f.i0 - k; j <= f.i0; ++j)
          denom = std::min(denom, std::max(p.support(i), p.support(j)));
        xs.push_back(static_cast<double>(periodic_distance(n, i, f.i0)));
        ys.push_back(std::log(std::abs(wi) * denom));
      }
    }
    const LineFit fit = fit_line(xs, ys);
    r.values["periodic_q"] = std::exp(fit.slope);
    r.values["periodic_C"] = std::exp(fit.intercept);
    r.values["periodic_rms"] = fit.rms;
    r.values["periodic_points"] = static_cast<double>(fit.points);
  }
  r.note = "primal coefficient decay against the grid distance";
  add_check(rep, std::move(r));
}

void check_projection_norm(VerificationReport& rep, const Bundle& c,
                           const Bundle* t) {
  CheckResult r;
  r.name = "projection_norm";
  if (c.sys.finest_gram->dimension() <= 150) {
    r.values["clamped"] = c.sys.finest_gram->projection_infinity_norm();
    if (t) r.values["periodic"] = t->sys.finest_gram->projection_infinity_norm();
  } else {
    r.values["skipped"] = 1.0;
    r.note = "dimension above the sampling budget";
  }
  add_check(rep, std::move(r));
}

void check_dual_stability(VerificationReport& rep, const Bundle& c,
                          const Bundle* t, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "dual_stability";
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    const auto part = b->sys.finest_level();
    const GramSystem& gram = *b->sys.finest_gram;
    for (double p : cfg.p_list) {
      double rmin = 1e300, rmax = 0.0;
      Rng rng(splitmix64(cfg.seed ^ 0xd0a1));
      for (int trial = 0; trial < 12; ++trial) {
        std::vector<double> bcoef(static_cast<std::size_t>(part->dimension()));
        for (double& x : bcoef)
          x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
        const Spline h = gram.dual_to_primal(make_dual(part, bcoef));
        const double lhs = lp_norm(h, p);
        double rhs = 0.0;
        for (long j = part->first_index();
             j < part->first_index() + part->dimension(); ++j) {
          const double nu = part->support(j);
          rhs += std::pow(std::abs(bcoef[static_cast<std::size_t>(
                              j - part->first_index())]),
                          p) *
                 std::pow(nu, 1.0 - p);
        }
        rhs = std::pow(rhs, 1.0 / p);
        const double ratio = lhs / rhs;
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
      }
      r.values[pkey(std::string(side_name(*b)) + "_min", p)] = rmin;
      r.values[pkey(std::string(side_name(*b)) + "_max", p)] = rmax;
    }
  }
  r.note = "dual-coefficient norm equivalence ratios";
  add_check(rep, std::move(r));
}

void check_norm_equivalence(VerificationReport& rep, const Bundle& c,
                            const Bundle* t, const ExperimentConfig& cfg,
                            int n_min) {
  CheckResult r;
  r.name = "norm_equivalence";
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    for (double p : cfg.p_list) {
      double lo = 1e300, hi = 0.0;
      int count = 0;
      for (const OrthoFunction& f : b->sys.functions) {
        if (f.index_n < n_min || f.J.whole_domain) continue;
        const double norm = lp_norm(primal_g(f), p);
        const double val = norm * std::pow(f.J.J.length, 1.0 - 1.0 / p);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
        ++count;
      }
      if (count == 0) continue;
      r.values[pkey(std::string(side_name(*b)) + "_min", p)] = lo;
      r.values[pkey(std::string(side_name(*b)) + "_max", p)] = hi;
      r.values[pkey(std::string(side_name(*b)) + "_window", p)] = hi / lo;
    }
  }
  r.note = "window of ||g||_p |J|^{1-1/p} over asymptotic functions";
  add_check(rep, std::move(r));
}

void check_tail_bound(VerificationReport& rep, const Bundle& c, int n_min,
                      double q_w, double p) {
  CheckResult r;
  r.name = "tail_bound";
  if (!(q_w > 1e-3) || !(q_w < 0.9999)) {
    r.values["skipped"] = 1.0;
    r.note = "no usable coefficient-decay base";
    add_check(rep, std::move(r));
    return;
  }
  double worst = 0.0;
  int samples = 0;
  int picked = 0;
  for (const OrthoFunction& f : c.sys.functions) {
    if (f.index_n < n_min || f.J.whole_domain) continue;
    if (++picked > 8) break;
    const Partition& part = *f.partition;
    const Spline fs = primal_f(f);
    const double jl = f.J.J.left, jr = arc_right(f.J.J);
    for (double x : knot_values(part)) {
      const bool leftside = x < jl, rightside = x > jr;
      if (!leftside && !rightside) continue;
      const double piece = leftside ? x : 1.0 - x;
      if (piece <= 0.0) continue;
      const double dist = leftside ? jl - x : x - jr;
      const double d = static_cast<double>(distance_count(part, x, f.J));
      const double tail =
          lp_norm(fs, p, leftside ? Arc{0.0, x} : Arc{x, 1.0 - x});
      const double bound = std::pow(q_w, d) * std::sqrt(f.J.J.length) /
                           std::pow(f.J.J.length + dist, 1.0 - 1.0 / p);
      if (bound > 0.0) {
        worst = std::max(worst, tail / bound);
        ++samples;
      }
    }
  }
  r.values["max_ratio"] = worst;
  r.values["samples"] = samples;
  r.values["q_base"] = q_w;
  r.note = "one-sided tail mass against the decay envelope";
  add_check(rep, std::move(r));
}

void check_pointwise_env(VerificationReport& rep, const Bundle* t, int n_min,
                         double q_hat) {
  CheckResult r;
  r.name = "pointwise_envelope";
  if (!t || !(q_hat > 1e-3) || !(q_hat < 0.9999)) {
    r.values["skipped"] = 1.0;
    add_check(rep, std::move(r));
    return;
  }
  double worst = 0.0;
  int samples = 0;
  int picked = 0;
  for (const OrthoFunction& f : t->sys.functions) {
    if (f.index_n < n_min || f.J.whole_domain) continue;
    if (++picked > 6) break;
    const Partition& part = *f.partition;
    const Spline g = primal_g(f);
    const int n = part.count();
    const int stride = std::max(1, n / 24);
    for (int ell = 0; ell < n; ell += stride) {
      const EnclosureInfo enc = minimal_enclosure(part, f.J, ell);
      const double mid =
          part.knot(ell) + 0.5 * (part.knot(ell + 1) - part.knot(ell));
      const double gx = std::abs(eval(g, mid));
      const double env = std::pow(q_hat, static_cast<double>(enc.K)) /
                         std::max(enc.C.length, 1e-300);
      worst = std::max(worst, gx / env);
      ++samples;
    }
  }
  r.values["max_ratio"] = worst;
  r.values["samples"] = samples;
  r.values["q_base"] = q_hat;
  r.note = "pointwise dual-normalized envelope over enclosing arcs";
  add_check(rep, std::move(r));
}

void check_subset_bound(VerificationReport& rep, const Bundle* t, int n_min,
                        double q_hat, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "subset_bound";
  if (!t || !(q_hat > 1e-3) || !(q_hat < 0.9999)) {
    r.values["skipped"] = 1.0;
    add_check(rep, std::move(r));
    return;
  }
  const double p = cfg.p_list.front();
  double worst = 0.0;
  int cases = 0;
  int picked = 0;
  for (const OrthoFunction& f : t->sys.functions) {
    if (f.index_n < n_min || f.J.whole_domain) continue;
    if (++picked > 6) break;
    const Partition& part = *f.partition;
    const Spline fs = primal_f(f);
    const int n = part.count();
    double lhs = 0.0, rhs = 0.0;
    for (int ell = 0; ell < n; ++ell) {
      if (splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(f.index_n) << 20) ^
                     static_cast<std::uint64_t>(ell)) %
              10 >=
          3)
        continue;
      const double len = part.knot(ell + 1) - part.knot(ell);
      if (len <= 0.0) continue;
      const EnclosureInfo enc = minimal_enclosure(part, f.J, ell);
      lhs += std::pow(lp_norm(fs, p, Arc{part.knot(ell), len}), p);
      rhs += std::pow(q_hat, p * static_cast<double>(enc.K)) /
             std::pow(std::max(enc.C.length, 1e-300), p) * len;
    }
    rhs *= std::pow(f.J.J.length, p / 2.0);
    if (rhs > 0.0) {
      worst = std::max(worst, lhs / rhs);
      ++cases;
    }
  }
  r.values["max_ratio"] = worst;
  r.values["cases"] = cases;
  r.values["q_base"] = q_hat;
  r.note = "restricted p-mass against the enclosure envelope";
  add_check(rep, std::move(r));
}

void check_charint_combinatorics(VerificationReport& rep, const Bundle& c,
                                 const Bundle* t, std::uint64_t seed) {
  CheckResult nested;
  nested.name = "charint_nested";
  CheckResult fk;
  fk.name = "charint_count";
  CheckResult kap;
  kap.name = "charint_chain_decay";
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    const bool torus = b->torus;
    std::vector<CharInterval> list;
    for (const OrthoFunction& f : b->sys.functions)
      if (!f.J.whole_domain) list.push_back(f.J);
    long violations = 0, pairs = 0;
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        ++pairs;
        const Arc& x = list[i].J;
        const Arc& y = list[j].J;
        if (arc_covers(x, y, torus) || arc_covers(y, x, torus)) continue;
        double overlap = 0.0;
        for (int shift = -1; shift <= 1; ++shift) {
          if (!torus && shift != 0) continue;
          overlap = std::max(overlap,
                             std::min(arc_right(x), arc_right(y) + shift) -
                                 std::max(x.left, y.left + shift));
        }
        if (overlap > 0.0) ++violations;
      }
    nested.values[std::string(side_name(*b)) + "_pairs"] =
        static_cast<double>(pairs);
    nested.values[std::string(side_name(*b)) + "_violations"] =
        static_cast<double>(violations);
    Rng rng(splitmix64(seed ^ 0xfacc));
    long cmax = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const double len = 0.05 + 0.9 * rng.uniform();
      const double left = torus ? rng.uniform() : (1.0 - len) * rng.uniform();
      cmax = std::max(cmax,
                      count_large_nested(list, Arc{left, len}, 0.25, torus));
    }
    fk.values[std::string(side_name(*b)) + "_max"] = static_cast<double>(cmax);
    double kmin = 1e300, kmax = 0.0;
    int chains = 0;
    for (std::size_t start = 0; start < list.size() && chains < 20; ++start) {
      std::vector<CharInterval> chain{list[start]};
      for (std::size_t j = start + 1; j < list.size(); ++j)
        if (list[j].J.length < chain.back().J.length &&
            arc_covers(chain.back().J, list[j].J, torus))
          chain.push_back(list[j]);
      if (chain.size() < 4) continue;
      const GeometricFit fit = nested_decay_ratio(chain, torus);
      kmin = std::min(kmin, fit.kappa);
      kmax = std::max(kmax, fit.kappa);
      ++chains;
    }
    if (chains > 0) {
      kap.values[std::string(side_name(*b)) + "_kappa_min"] = kmin;
      kap.values[std::string(side_name(*b)) + "_kappa_max"] = kmax;
      kap.values[std::string(side_name(*b)) + "_chains"] = chains;
    }
  }
  nested.note = "characteristic intervals pairwise nested or disjoint";
  fk.note = "count of nested intervals at least a quarter of the test arc";
  kap.note = "geometric decay fits over greedy nested chains";
  add_check(rep, std::move(nested));
  add_check(rep, std::move(fk));
  add_check(rep, std::move(kap));
}

void check_lemma_tail(VerificationReport& rep, const Bundle* t, int n_min,
                      const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "tail_mass";
  if (!t) {
    r.values["skipped"] = 1.0;
    add_check(rep, std::move(r));
    return;
  }
  const Expansion e = make_expansion(t->sys, t->a);
  Rng rng(splitmix64(cfg.seed ^ 0x7a11));
  double worst = 0.0;
  long terms = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const Arc v{rng.uniform(), 0.1 + 0.2 * rng.uniform()};
    const TailRatio tr = tail_mass_ratio(e, v, n_min, cfg.m);
    worst = std::max(worst, tr.ratio);
    terms += tr.terms;
  }
  r.values["max_ratio"] = worst;
  r.values["terms"] = static_cast<double>(terms);
  r.note = "outside-arc first moment against inside square mass";
  add_check(rep, std::move(r));
}

void check_lemma_level(VerificationReport& rep, const Bundle* t, int n_min,
                       const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "level_mass";
  if (!t) {
    r.values["skipped"] = 1.0;
    add_check(rep, std::move(r));
    return;
  }
  std::vector<double> tail(t->a.size(), 0.0);
  for (std::size_t n = 0; n < t->a.size(); ++n)
    if (static_cast<int>(n) + 1 >= n_min) tail[n] = t->a[n];
  const Expansion e = make_expansion(t->sys, tail);
  const GridFunction sf = square_function(e, cfg.m);
  std::vector<double> positive;
  for (double v : sf.value)
    if (v > 0.0) positive.push_back(v);
  if (positive.empty()) {
    r.values["skipped"] = 1.0;
    add_check(rep, std::move(r));
    return;
  }
  std::sort(positive.begin(), positive.end());
  const double lambda = positive[positive.size() / 2];
  const LevelRatio lr = level_mass_ratio(e, lambda, 0.5, n_min, cfg.m);
  r.values["ratio"] = lr.ratio;
  r.values["e_measure"] = lr.e_measure;
  r.values["terms"] = static_cast<double>(lr.terms);
  r.values["lambda"] = lambda;
  r.note = "square mass on the level set against its complement";
  add_check(rep, std::move(r));
}

void check_lemma_support(VerificationReport& rep, const Bundle* t, int n_min,
                         const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "support_weights";
  if (!t) {
    r.values["skipped"] = 1.0;
    add_check(rep, std::move(r));
    return;
  }
  const Arc v{0.3, 0.25};
  const double cmid = 0.425, cw = 0.1;
  const int k = t->sys.sequence.order;
  auto bump = [&](double x) {
    const double tt = (x - cmid) / cw;
    if (std::abs(tt) >= 1.0) return 0.0;
    return std::pow(1.0 - tt * tt, k);
  };
  const Spline ph = t->sys.finest_gram->project(bump);
  const double p = cfg.p_list.front();
  const std::vector<double> radii{1.05, 1.1, 1.2};
  const SupportReport sr = support_sweep(t->sys, ph, v, p, radii, n_min);
  r.values["rhs"] = sr.rhs;
  r.values["terms"] = static_cast<double>(sr.terms);
  for (std::size_t i = 0; i < sr.sweep.size(); ++i) {
    r.values["R" + std::to_string(i)] = sr.sweep[i].R;
    r.values["ratio" + std::to_string(i)] = sr.sweep[i].ratio;
  }
  r.note = "weighted tail sums of a bump supported in the arc";
  add_check(rep, std::move(r));
}

void check_moment_orthogonality(VerificationReport& rep, const Bundle& c,
                                const Bundle* t, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "moment_orthogonality";
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    Rng rng(splitmix64(cfg.seed ^ 0x303));
    double bump_max = 0.0, proj_max = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const double len = 0.1 + 0.2 * rng.uniform();
      const double left =
          b->torus ? rng.uniform() : (1.0 - len) * rng.uniform();
      const Arc v{left, len};
      bump_max = std::max(bump_max, vanishing_moment_residual(b->sys, v));
      proj_max = std::max(proj_max, polynomial_projection_residual(*b, v));
    }
    r.values[std::string(side_name(*b)) + "_bump_max"] = bump_max;
    r.values[std::string(side_name(*b)) + "_projection_max"] = proj_max;
  }
  r.note = "inner products that vanish for functions untouched by the arc";
  add_check(rep, std::move(r));
}

void check_domination(VerificationReport& rep, const Bundle& c,
                      const Bundle* t, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "domination";
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    const Expansion e = make_expansion(b->sys, b->a);
    const DominationReport mp = domination_partial_sum(e, cfg.m);
    r.values[std::string(side_name(*b)) + "_partial_sum"] = mp.ratio;
    const DominationReport pr =
        domination_projection(*b->sys.finest_gram, test_wave, cfg.m);
    r.values[std::string(side_name(*b)) + "_projection"] = pr.ratio;
  }
  r.note = "maximal partial sums and projections against interval averages";
  add_check(rep, std::move(r));
}

void check_unconditionality(VerificationReport& rep, const Bundle& c,
                            const Bundle* t, const ExperimentConfig& cfg) {
  CheckResult r;
  r.name = "unconditionality";
  for (const Bundle* b : {&c, t}) {
    if (!b) continue;
    for (double p : cfg.p_list) {
      const UnconditionalityResult u =
          unconditionality_trial(b->sys, b->a, p, cfg.trials, cfg.seed, cfg.m);
      r.values[pkey(std::string(side_name(*b)) + "_rmax", p)] = u.r_max;
      r.values[pkey(std::string(side_name(*b)) + "_rmin", p)] = u.r_min;
      r.values[pkey(std::string(side_name(*b)) + "_rS", p)] = u.r_s;
    }
  }
  r.values["trials"] = cfg.trials;
  r.note = "sign-flip norm ratios and the square-function ratio";
  add_check(rep, std::move(r));
}

}  // namespace

UnconditionalityResult unconditionality_trial(const OrthoSystem& sys,
                                              const std::vector<double>& coeffs,
                                              double p, int trials,
                                              std::uint64_t seed, int m) {
  if (coeffs.size() != static_cast<std::size_t>(sys.size()))
    throw std::invalid_argument("coefficient count does not match the system");
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  UnconditionalityResult out;
  out.trials = trials;
  const Spline base = combine(sys, coeffs);
  const double den = lp_norm(base, p);
  if (den == 0.0) return out;
  out.r_min = 1e300;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> flipped(coeffs.size());
    for (std::size_t n = 0; n < coeffs.size(); ++n)
      flipped[n] = rademacher_sign(seed, static_cast<std::uint64_t>(trial),
                                   static_cast<std::uint64_t>(n)) *
                   coeffs[n];
    const double num = lp_norm(combine(sys, flipped), p);
    out.r_max = std::max(out.r_max, num / den);
    out.r_min = std::min(out.r_min, num / den);
  }
  const GridFunction sf = square_function(make_expansion(sys, coeffs), m);
  out.r_s = grid_lp(sf, p) / den;
  return out;
}

VerificationReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  KnotSequence clamped_seq, periodic_seq;
  if (cfg.family == Family::custom_file) {
    const KnotSequence loaded = read_knot_sequence(cfg.input);
    clamped_seq.domain = Domain::interval;
    clamped_seq.order = loaded.order;
    for (double x : loaded.points)
      if (x > 0.0 && x < 1.0) clamped_seq.points.push_back(x);
    validate(clamped_seq);
    periodic_seq = loaded;
    periodic_seq.domain = Domain::torus;
    validate(periodic_seq);
  } else {
    clamped_seq =
        generate_sequence(cfg.family, cfg.n, cfg.seed, cfg.k, Domain::interval);
    periodic_seq =
        generate_sequence(cfg.family, cfg.n, cfg.seed, cfg.k, Domain::torus);
  }
  const int k_eff = clamped_seq.order;
  const int n_eff = static_cast<int>(periodic_seq.points.size());

  VerificationReport rep;
  rep.k = k_eff;
  rep.n = cfg.family == Family::custom_file ? n_eff : cfg.n;
  rep.family = family_name(cfg.family);
  rep.seed = cfg.seed;
  rep.id = "k" + std::to_string(rep.k) + "-" + rep.family + "-n" +
           std::to_string(rep.n) + "-seed" + std::to_string(cfg.seed);

  Bundle clamped = make_bundle(clamped_seq);
  const bool want_periodic = n_eff >= 2 * k_eff + 2;
  Bundle periodic;
  if (want_periodic) periodic = make_bundle(periodic_seq);
  Bundle* t = want_periodic ? &periodic : nullptr;
  const int n_min = cfg.n_k_override > 0 ? cfg.n_k_override
                                         : std::max(2 * k_eff + 2, 4 * k_eff);

  check_orthogonality(rep, clamped, t);
  check_boehm(rep, clamped, t, cfg.seed);
  check_remez(rep, k_eff, cfg.seed);
  check_level_inclusion(rep, clamped, t, cfg);
  check_beta_support(rep, t, k_eff);
  check_p2_invariance(rep, clamped, t, cfg);

  double q_clamped = 0.0, q_periodic = 0.0, q_w = 0.0;
  check_gram_decay(rep, clamped, t, &q_clamped, &q_periodic);
  check_w_decay(rep, clamped, t, n_min, &q_w);
  check_projection_norm(rep, clamped, t);
  check_dual_stability(rep, clamped, t, cfg);
  check_norm_equivalence(rep, clamped, t, cfg, n_min);
  check_tail_bound(rep, clamped, n_min, q_w, cfg.p_list.front());
  check_pointwise_env(rep, t, n_min, q_periodic);
  check_subset_bound(rep, t, n_min, q_periodic, cfg);
  check_charint_combinatorics(rep, clamped, t, cfg.seed);
  check_lemma_tail(rep, t, n_min, cfg);
  check_lemma_level(rep, t, n_min, cfg);
  check_lemma_support(rep, t, n_min, cfg);
  check_moment_orthogonality(rep, clamped, t, cfg);
  check_domination(rep, clamped, t, cfg);
  check_unconditionality(rep, clamped, t, cfg);
  return rep;
}

void emit_report(const VerificationReport& r, const ExperimentConfig& cfg,
                 const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "checks");
  write_summary_csv((fs::path(dir) / "summary.csv").string(), r);
  write_report_json((fs::path(dir) / "report.json").string(), r);
  for (const CheckResult& c : r.checks)
    write_check_csv((fs::path(dir) / "checks" / (c.name + ".csv")).string(), c);
  nlohmann::ordered_json meta;
  meta["schema"] = 1;
  meta["id"] = r.id;
  meta["k"] = r.k;
  meta["family"] = r.family;
  meta["n"] = r.n;
  meta["p_list"] = cfg.p_list;
  meta["seed"] = cfg.seed;
  meta["trials"] = cfg.trials;
  meta["m"] = cfg.m;
  meta["n_min"] = cfg.n_k_override > 0 ? cfg.n_k_override
                                       : std::max(2 * r.k + 2, 4 * r.k);
  if (!cfg.input.empty()) meta["input"] = cfg.input;
  std::ofstream out((fs::path(dir) / "meta.json").string());
  if (!out) throw std::runtime_error("cannot write meta.json under " + dir);
  out << meta.dump(2) << "\n";
}

int report_exit_code(const VerificationReport& r) {
  return all_exact_pass(r) ? 0 : 1;
}

}  // namespace ospline
