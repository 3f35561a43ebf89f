#include "ospline/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ospline/quadrature.hpp"

namespace ospline {

namespace {

double wrap_unit(double x) { return x - std::floor(x); }

constexpr double kGuard = 1e-14;

}  // namespace

std::vector<double> make_grid(const Partition& p, int m) {
  if (m < 1) throw std::invalid_argument("grid subdivision needs m >= 1");
  const std::vector<double> bp = breakpoints(p);
  std::vector<double> pts;
  if (p.is_periodic()) {
    pts.reserve(bp.size() * static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < bp.size(); ++i) {
      const double a = bp[i];
      const double b = i + 1 < bp.size() ? bp[i + 1] : bp.front() + 1.0;
      for (int t = 0; t < m; ++t)
        pts.push_back(a + (b - a) * t / m);
    }
  } else {
    pts.reserve((bp.size() - 1) * static_cast<std::size_t>(m) + 1);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
      for (int t = 0; t < m; ++t)
        pts.push_back(bp[i] + (bp[i + 1] - bp[i]) * t / m);
    pts.push_back(bp.back());
  }
  return pts;
}

namespace {

GridFunction grid_shell(std::shared_ptr<const Partition> p, int m) {
  GridFunction g;
  g.torus = p->is_periodic();
  g.partition = std::move(p);
  g.point = make_grid(*g.partition, m);
  const std::size_t cells = g.torus ? g.point.size() : g.point.size() - 1;
  g.value.assign(g.point.size(), 0.0);
  g.mass.assign(cells, 0.0);
  g.prefix.assign(cells + 1, 0.0);
  return g;
}

void fill_prefix(GridFunction& g) {
  for (std::size_t i = 0; i < g.mass.size(); ++i)
    g.prefix[i + 1] = g.prefix[i] + g.mass[i];
}

// Fixed 4-node Gauss estimate of the cell mass of |f|.
void fill_masses(GridFunction& g, const std::function<double(double)>& f) {
  const QuadRule& rule = gauss_rule(4);
  for (int i = 0; i < g.cells(); ++i) {
    const double a = g.cell_left(i);
    const double b = g.cell_right(i);
    const double mid = 0.5 * (a + b);
    const double hal = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.node.size(); ++q)
      acc += rule.weight[q] * std::abs(f(mid + hal * rule.node[q]));
    g.mass[static_cast<std::size_t>(i)] = acc * hal;
  }
  fill_prefix(g);
}

}  // namespace

GridFunction sample_function(std::shared_ptr<const Partition> p, int m,
                             const std::function<double(double)>& f) {
  GridFunction g = grid_shell(std::move(p), m);
  for (std::size_t i = 0; i < g.point.size(); ++i) g.value[i] = f(g.point[i]);
  fill_masses(g, f);
  return g;
}

GridFunction indicator_function(std::shared_ptr<const Partition> p, int m,
                                const std::vector<char>& cell_set) {
  GridFunction g = grid_shell(std::move(p), m);
  if (cell_set.size() != g.mass.size())
    throw std::invalid_argument("indicator cell mask has the wrong size");
  const std::size_t n = g.point.size();
  for (std::size_t i = 0; i < g.mass.size(); ++i) {
    if (!cell_set[i]) continue;
    g.mass[i] = g.cell_right(static_cast<int>(i)) - g.cell_left(static_cast<int>(i));
    g.value[i] = 1.0;
    g.value[(i + 1) % n] = 1.0;
  }
  fill_prefix(g);
  return g;
}

double grid_integral(const GridFunction& g, std::optional<Arc> sub) {
  if (!sub) return g.total_mass();
  // Clip every cell against the arc; partial overlaps contribute their
  // proportional share of the cell mass.
  double acc = 0.0;
  const double lo = g.torus ? wrap_unit(sub->left) : sub->left;
  const double hi = lo + sub->length;
  for (int i = 0; i < g.cells(); ++i) {
    const double a = g.cell_left(i);
    const double b = g.cell_right(i);
    for (int shift = -1; shift <= 1; ++shift) {
      if (!g.torus && shift != 0) continue;
      const double ca = std::max(a + shift, lo);
      const double cb = std::min(b + shift, hi);
      if (cb > ca)
        acc += g.mass[static_cast<std::size_t>(i)] * (cb - ca) / (b - a);
    }
  }
  return acc;
}

double grid_l2(const GridFunction& g) {
  double acc = 0.0;
  const std::size_t n = g.point.size();
  for (int i = 0; i < g.cells(); ++i) {
    const double va = g.value[static_cast<std::size_t>(i)];
    const double vb = g.value[(static_cast<std::size_t>(i) + 1) % n];
    acc += 0.5 * (va * va + vb * vb) * (g.cell_right(i) - g.cell_left(i));
  }
  return std::sqrt(acc);
}

Expansion make_expansion(const OrthoSystem& sys, std::vector<double> coeffs) {
  if (coeffs.size() != static_cast<std::size_t>(sys.size()))
    throw std::invalid_argument("expansion size does not match the system");
  return Expansion{&sys, std::move(coeffs)};
}

void SystemEvaluator::eval_all(double x, std::vector<double>& out) const {
  const OrthoSystem& sys = *sys_;
  const Partition& p = *sys.finest_level();
  const LocalBasis lb = eval_basis_local(p, x);
  const int n = sys.size();
  out.assign(static_cast<std::size_t>(n), 0.0);
  std::size_t idx[max_order];
  for (int t = 0; t < lb.count; ++t)
    idx[t] = static_cast<std::size_t>(
        p.is_periodic() ? periodic_mod(lb.first + t, p.count())
                        : lb.first + t - p.first_index());
  for (int i = 0; i < n; ++i) {
    const std::vector<double>& c = sys.finest[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (int t = 0; t < lb.count; ++t)
      acc += lb.value[static_cast<std::size_t>(t)] * c[idx[t]];
    out[static_cast<std::size_t>(i)] = acc;
  }
}

double SystemEvaluator::eval_one(int n, double x) const {
  const OrthoSystem& sys = *sys_;
  const Partition& p = *sys.finest_level();
  const LocalBasis lb = eval_basis_local(p, x);
  const std::vector<double>& c = sys.finest[static_cast<std::size_t>(n)];
  double acc = 0.0;
  for (int t = 0; t < lb.count; ++t) {
    const std::size_t idx = static_cast<std::size_t>(
        p.is_periodic() ? periodic_mod(lb.first + t, p.count())
                        : lb.first + t - p.first_index());
    acc += lb.value[static_cast<std::size_t>(t)] * c[idx];
  }
  return acc;
}

GridFunction synthesize(const Expansion& e, int m) {
  const OrthoSystem& sys = *e.system;
  // The synthesis is itself a spline: combine the finest coefficients once.
  std::vector<double> c(sys.finest.front().size(), 0.0);
  for (std::size_t n = 0; n < e.coeffs.size(); ++n) {
    const double a = e.coeffs[n];
    if (a == 0.0) continue;
    const std::vector<double>& fn = sys.finest[n];
    for (std::size_t r = 0; r < c.size(); ++r) c[r] += a * fn[r];
  }
  const Spline f = make_primal(sys.finest_level(), std::move(c));
  return sample_function(sys.finest_level(), m,
                         [&f](double x) { return eval(f, x); });
}

GridFunction square_function(const Expansion& e, int m) {
  const OrthoSystem& sys = *e.system;
  const SystemEvaluator ev(sys);
  GridFunction g = grid_shell(sys.finest_level(), m);
  std::vector<double> vals;
  auto sf = [&](double x) {
    ev.eval_all(x, vals);
    double acc = 0.0;
    for (std::size_t n = 0; n < vals.size(); ++n) {
      const double t = e.coeffs[n] * vals[n];
      acc += t * t;
    }
    return std::sqrt(acc);
  };
  for (std::size_t i = 0; i < g.point.size(); ++i) g.value[i] = sf(g.point[i]);
  fill_masses(g, sf);
  return g;
}

GridFunction maximal_partial_sum(const Expansion& e, int m) {
  const OrthoSystem& sys = *e.system;
  const SystemEvaluator ev(sys);
  GridFunction g = grid_shell(sys.finest_level(), m);
  std::vector<double> vals;
  auto mf = [&](double x) {
    ev.eval_all(x, vals);
    double run = 0.0;
    double best = 0.0;
    for (std::size_t n = 0; n < vals.size(); ++n) {
      run += e.coeffs[n] * vals[n];
      best = std::max(best, std::abs(run));
    }
    return best;
  };
  for (std::size_t i = 0; i < g.point.size(); ++i) g.value[i] = mf(g.point[i]);
  fill_masses(g, mf);
  return g;
}

GridFunction hardy_littlewood(const GridFunction& g) {
  GridFunction out = g;
  const int cells = g.cells();
  const std::size_t pts = g.point.size();
  if (g.torus) {
    // Doubled prefix: index j in [0, 2*cells] walks two turns around.
    std::vector<double> pt2(2 * static_cast<std::size_t>(cells) + 1);
    std::vector<double> pf2(2 * static_cast<std::size_t>(cells) + 1);
    for (std::size_t j = 0; j < pt2.size(); ++j) {
      const std::size_t r = j % pts;
      pt2[j] = g.point[r] + (j / pts) * 1.0;
      pf2[j] = (j <= static_cast<std::size_t>(cells))
                   ? g.prefix[j]
                   : g.total_mass() + g.prefix[j - static_cast<std::size_t>(cells)];
    }
    for (int i = 0; i < static_cast<int>(pts); ++i) {
      // Windows with the point as an endpoint, up to one full turn:
      // backward ones end at the second copy c, forward ones start at the
      // first copy i (starting at c would cap their length at 1 - point[i]).
      const std::size_t first = static_cast<std::size_t>(i);
      const std::size_t c = first + static_cast<std::size_t>(cells);
      double best = 0.0;
      for (std::size_t a = first; a < c; ++a)
        best = std::max(best, (pf2[c] - pf2[a]) / (pt2[c] - pt2[a]));
      for (std::size_t b = first + 1; b < c; ++b)
        best = std::max(best, (pf2[b] - pf2[first]) / (pt2[b] - pt2[first]));
      out.value[static_cast<std::size_t>(i)] = best;
    }
  } else {
    for (std::size_t i = 0; i < pts; ++i) {
      double best = 0.0;
      for (std::size_t a = 0; a < i; ++a)
        best = std::max(best,
                        (g.prefix[i] - g.prefix[a]) / (g.point[i] - g.point[a]));
      for (std::size_t b = i + 1; b < pts; ++b)
        best = std::max(best,
                        (g.prefix[b] - g.prefix[i]) / (g.point[b] - g.point[i]));
      out.value[i] = best;
    }
  }
  // Masses of the maximal function itself: trapezoid on the new values.
  for (int i = 0; i < cells; ++i) {
    const double va = out.value[static_cast<std::size_t>(i)];
    const double vb = out.value[(static_cast<std::size_t>(i) + 1) % pts];
    out.mass[static_cast<std::size_t>(i)] =
        0.5 * (va + vb) * (g.cell_right(i) - g.cell_left(i));
  }
  fill_prefix(out);
  return out;
}

LevelSets level_sets(const GridFunction& sf, double lambda, double r) {
  if (!(r > 0.0) || !(r < 1.0))
    throw std::invalid_argument("level sets need 0 < r < 1");
  LevelSets ls;
  ls.lambda = lambda;
  ls.r = r;
  const int cells = sf.cells();
  const std::size_t pts = sf.point.size();
  ls.e_cells.assign(static_cast<std::size_t>(cells), 0);
  for (int i = 0; i < cells; ++i) {
    const double va = sf.value[static_cast<std::size_t>(i)];
    const double vb = sf.value[(static_cast<std::size_t>(i) + 1) % pts];
    if (std::min(va, vb) > lambda) {
      ls.e_cells[static_cast<std::size_t>(i)] = 1;
      ls.e_measure += sf.cell_right(i) - sf.cell_left(i);
    }
  }
  // Grid m matching the existing points: reuse them directly through an
  // indicator on the same shell.
  GridFunction ind;
  ind.partition = sf.partition;
  ind.torus = sf.torus;
  ind.point = sf.point;
  ind.value.assign(pts, 0.0);
  ind.mass.assign(static_cast<std::size_t>(cells), 0.0);
  ind.prefix.assign(static_cast<std::size_t>(cells) + 1, 0.0);
  for (int i = 0; i < cells; ++i) {
    if (!ls.e_cells[static_cast<std::size_t>(i)]) continue;
    ind.mass[static_cast<std::size_t>(i)] = sf.cell_right(i) - sf.cell_left(i);
    ind.value[static_cast<std::size_t>(i)] = 1.0;
    ind.value[(static_cast<std::size_t>(i) + 1) % pts] = 1.0;
  }
  fill_prefix(ind);
  const GridFunction mhat = hardy_littlewood(ind);
  ls.b_cells.assign(static_cast<std::size_t>(cells), 0);
  ls.inclusion = true;
  for (int i = 0; i < cells; ++i) {
    const double va = mhat.value[static_cast<std::size_t>(i)];
    const double vb = mhat.value[(static_cast<std::size_t>(i) + 1) % pts];
    if (std::min(va, vb) > r) {
      ls.b_cells[static_cast<std::size_t>(i)] = 1;
      ls.b_measure += sf.cell_right(i) - sf.cell_left(i);
    } else if (ls.e_cells[static_cast<std::size_t>(i)]) {
      ls.inclusion = false;
    }
  }
  return ls;
}

namespace {

DominationReport ratio_over_grid(const GridFunction& num,
                                 const GridFunction& den) {
  DominationReport rep;
  double scale = 0.0;
  for (double v : num.value) scale = std::max(scale, std::abs(v));
  const double guard = 1e-12 * scale;
  for (std::size_t i = 0; i < num.value.size(); ++i) {
    if (den.value[i] > guard) {
      rep.ratio = std::max(rep.ratio, std::abs(num.value[i]) / den.value[i]);
      ++rep.points_used;
    } else {
      ++rep.points_skipped;
    }
  }
  return rep;
}

}  // namespace

DominationReport domination_partial_sum(const Expansion& e, int m) {
  const GridFunction mf = maximal_partial_sum(e, m);
  const GridFunction f = synthesize(e, m);
  const GridFunction hl = hardy_littlewood(f);
  return ratio_over_grid(mf, hl);
}

DominationReport domination_projection(const GramSystem& gram,
                                       const std::function<double(double)>& h,
                                       int m) {
  const Spline ph = gram.project(h);
  const auto p = gram.partition_ptr();
  const GridFunction phg = sample_function(
      p, m, [&ph](double x) { return eval(ph, x); });
  const GridFunction hg = sample_function(p, m, h);
  const GridFunction hl = hardy_littlewood(hg);
  return ratio_over_grid(phg, hl);
}

namespace {

double eval_poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

// Roots of the polynomial inside [a, b] by dense sampling plus bisection.
std::vector<double> poly_roots(const std::vector<double>& c, double a,
                               double b) {
  std::vector<double> roots;
  const int samples = 4096;
  double xp = a;
  double vp = eval_poly(c, a);
  for (int i = 1; i <= samples; ++i) {
    const double x = a + (b - a) * i / samples;
    const double v = eval_poly(c, x);
    if (vp == 0.0) roots.push_back(xp);
    if ((vp < 0.0 && v > 0.0) || (vp > 0.0 && v < 0.0)) {
      double lo = xp, hi = x, flo = vp;
      for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval_poly(c, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((flo < 0.0) == (fm < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    xp = x;
    vp = v;
  }
  if (vp == 0.0) roots.push_back(b);
  return roots;
}

}  // namespace

RemezResult remez_check(const std::vector<double>& poly, double a, double b,
                        int k) {
  if (k < 1 || k > max_order) throw std::invalid_argument("order out of range");
  if (poly.size() > static_cast<std::size_t>(k))
    throw std::invalid_argument("polynomial exceeds the stated order");
  if (!(b > a)) throw std::invalid_argument("empty interval");
  RemezResult res;
  // Supremum over V: endpoints plus critical points.
  std::vector<double> cand{a, b};
  if (poly.size() > 2) {
    std::vector<double> dc(poly.size() - 1);
    for (std::size_t i = 1; i < poly.size(); ++i)
      dc[i - 1] = poly[i] * static_cast<double>(i);
    for (double r : poly_roots(dc, a, b)) cand.push_back(r);
  }
  for (double x : cand) res.sup = std::max(res.sup, std::abs(eval_poly(poly, x)));
  if (res.sup == 0.0) {
    res.measure = b - a;
    res.pass = true;
    return res;
  }
  res.threshold = std::pow(8.0, 1 - k) * res.sup;
  // Split V at the level crossings of both signed thresholds.
  std::vector<double> cuts{a, b};
  for (double s : {res.threshold, -res.threshold}) {
    std::vector<double> shifted = poly;
    if (shifted.empty()) shifted.push_back(0.0);
    shifted[0] -= s;
    for (double r : poly_roots(shifted, a, b)) cuts.push_back(r);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (std::abs(eval_poly(poly, mid)) >= res.threshold)
      res.measure += cuts[i + 1] - cuts[i];
  }
  res.pass = res.measure >= 0.5 * (b - a) - 1e-12;
  return res;
}

namespace {

// Piecewise integration of a callable over an arc (or its complement),
// cells clipped against every period image that can meet them.
double integrate_regions(const std::function<double(double)>& f,
                         const GridFunction& shell,
                         const std::vector<Arc>& regions) {
  const QuadRule& rule = gauss_rule(4);
  double acc = 0.0;
  for (int i = 0; i < shell.cells(); ++i) {
    const double a = shell.cell_left(i);
    const double b = shell.cell_right(i);
    for (const Arc& reg : regions) {
      const double lo = shell.torus ? wrap_unit(reg.left) : reg.left;
      const double hi = lo + reg.length;
      for (int shift = -1; shift <= 1; ++shift) {
        if (!shell.torus && shift != 0) continue;
        const double ca = std::max(a + shift, lo);
        const double cb = std::min(b + shift, hi);
        if (cb <= ca) continue;
        const double mid = 0.5 * (ca + cb);
        const double hal = 0.5 * (cb - ca);
        for (std::size_t q = 0; q < rule.node.size(); ++q)
          acc += hal * rule.weight[q] * f(mid + hal * rule.node[q]);
      }
    }
  }
  return acc;
}

std::vector<Arc> arc_complement(const Arc& v, bool torus) {
  if (torus) {
    if (v.length >= 1.0) return {};
    return {Arc{wrap_unit(v.left + v.length), 1.0 - v.length}};
  }
  std::vector<Arc> out;
  if (v.left > 0.0) out.push_back(Arc{0.0, v.left});
  const double r = arc_right(v);
  if (r < 1.0) out.push_back(Arc{r, 1.0 - r});
  return out;
}

// Does the open interior of the arc of function n's interval lie inside the
// marked cells?
bool arc_inside_cells(const GridFunction& shell, const std::vector<char>& cells,
                      const Arc& arc) {
  for (int i = 0; i < shell.cells(); ++i) {
    if (cells[static_cast<std::size_t>(i)]) continue;
    const double mid = 0.5 * (shell.cell_left(i) + shell.cell_right(i));
    if (arc_contains(arc, mid, shell.torus)) return false;
  }
  return true;
}

const CharInterval* function_interval(const OrthoSystem& sys, int n) {
  const int block = static_cast<int>(sys.initial_block.size());
  if (n < block) return nullptr;
  return &sys.functions[static_cast<std::size_t>(n - block)].J;
}

}  // namespace

TailRatio tail_mass_ratio(const Expansion& e, const Arc& v, int n_min, int m) {
  const OrthoSystem& sys = *e.system;
  const bool torus = sys.finest_level()->is_periodic();
  TailRatio out;
  std::vector<char> in_gamma(static_cast<std::size_t>(sys.size()), 0);
  for (int n = 0; n < sys.size(); ++n) {
    if (n + 1 < n_min) continue;
    const CharInterval* J = function_interval(sys, n);
    if (J == nullptr || J->whole_domain) continue;
    if (arc_covers(v, J->J, torus)) {
      in_gamma[static_cast<std::size_t>(n)] = 1;
      ++out.terms;
    }
  }
  if (out.terms == 0) return out;
  const SystemEvaluator ev(sys);
  std::vector<double> vals;
  auto l1 = [&](double x) {
    ev.eval_all(x, vals);
    double acc = 0.0;
    for (std::size_t n = 0; n < vals.size(); ++n)
      if (in_gamma[n]) acc += std::abs(e.coeffs[n] * vals[n]);
    return acc;
  };
  auto l2 = [&](double x) {
    ev.eval_all(x, vals);
    double acc = 0.0;
    for (std::size_t n = 0; n < vals.size(); ++n)
      if (in_gamma[n]) {
        const double t = e.coeffs[n] * vals[n];
        acc += t * t;
      }
    return std::sqrt(acc);
  };
  const GridFunction shell = grid_shell(sys.finest_level(), m);
  out.lhs = integrate_regions(l1, shell, arc_complement(v, torus));
  out.rhs = integrate_regions(l2, shell, {v});
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

LevelRatio level_mass_ratio(const Expansion& e, double lambda, double r,
                            int n_min, int m) {
  const OrthoSystem& sys = *e.system;
  LevelRatio out;
  const GridFunction sf = square_function(e, m);
  const LevelSets ls = level_sets(sf, lambda, r);
  out.e_measure = ls.e_measure;
  std::vector<char> in_lambda(static_cast<std::size_t>(sys.size()), 0);
  for (int n = 0; n < sys.size(); ++n) {
    if (n + 1 < n_min) continue;
    const CharInterval* J = function_interval(sys, n);
    if (J == nullptr || J->whole_domain) continue;
    if (!arc_inside_cells(sf, ls.b_cells, J->J)) {
      in_lambda[static_cast<std::size_t>(n)] = 1;
      ++out.terms;
    }
  }
  if (out.terms == 0) return out;
  const SystemEvaluator ev(sys);
  std::vector<double> vals;
  auto sg2 = [&](double x) {
    ev.eval_all(x, vals);
    double acc = 0.0;
    for (std::size_t n = 0; n < vals.size(); ++n)
      if (in_lambda[n]) {
        const double t = e.coeffs[n] * vals[n];
        acc += t * t;
      }
    return acc;
  };
  const QuadRule& rule = gauss_rule(4);
  for (int i = 0; i < sf.cells(); ++i) {
    const double mid = 0.5 * (sf.cell_left(i) + sf.cell_right(i));
    const double hal = 0.5 * (sf.cell_right(i) - sf.cell_left(i));
    double cell = 0.0;
    for (std::size_t q = 0; q < rule.node.size(); ++q)
      cell += hal * rule.weight[q] * sg2(mid + hal * rule.node[q]);
    if (ls.e_cells[static_cast<std::size_t>(i)])
      out.lhs += cell;
    else
      out.rhs += cell;
  }
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

SupportReport support_sweep(const OrthoSystem& sys, const Spline& f,
                            const Arc& v, double p,
                            const std::vector<double>& radii, int n_min) {
  if (!(p > 1.0) || !(p < 1e300))
    throw std::invalid_argument("support sweep needs finite p > 1");
  SupportReport rep;
  rep.rhs = std::pow(lp_norm(f, p), p);
  for (double R : radii) rep.sweep.push_back(SupportSweepEntry{R, 0.0, 0.0});

  const bool torus = sys.finest_level()->is_periodic();
  // Concentric arc of triple length, clipped to the domain.
  Arc tri{0.0, 1.0};
  if (torus) {
    tri = v.length >= 1.0 / 3.0
              ? Arc{0.0, 1.0}
              : Arc{wrap_unit(v.left - v.length), 3.0 * v.length};
  } else {
    const double lo = std::max(0.0, v.left - v.length);
    const double hi = std::min(1.0, arc_right(v) + v.length);
    tri = Arc{lo, hi - lo};
  }
  const std::vector<Arc> outside = arc_complement(tri, torus);
  const GramSystem& gram = *sys.finest_gram;
  for (int n = 0; n < sys.size(); ++n) {
    if (n + 1 < n_min) continue;
    const double a = gram_dot(gram, f.coeffs, sys.finest[static_cast<std::size_t>(n)]);
    if (std::abs(a) < 1e-300) continue;
    const CharInterval* J = function_interval(sys, n);
    long dist = 0;
    if (J != nullptr && !J->whole_domain && torus) {
      const OrthoFunction& fn =
          sys.functions[static_cast<std::size_t>(n - static_cast<int>(sys.initial_block.size()))];
      dist = hat_distance_interval(*fn.partition, v, *J);
    }
    double tail = 0.0;
    if (!outside.empty()) {
      const Spline fn = finest_spline(sys, n);
      for (const Arc& reg : outside)
        tail += std::pow(lp_norm(fn, p, reg), p);
    }
    if (tail == 0.0) continue;
    ++rep.terms;
    const double weight = std::pow(std::abs(a), p) * tail;
    for (SupportSweepEntry& s : rep.sweep)
      s.lhs += std::pow(s.R, p * static_cast<double>(dist)) * weight;
  }
  for (SupportSweepEntry& s : rep.sweep)
    s.ratio = rep.rhs > 0.0 ? s.lhs / rep.rhs : 0.0;
  return rep;
}

double vanishing_moment_residual(const OrthoSystem& sys, const Arc& v) {
  const bool torus = sys.finest_level()->is_periodic();
  // Legendre polynomial of degree k mapped onto v: orthogonal to every
  // polynomial of lower degree there.
  const int k = sys.sequence.order;
  std::vector<std::vector<double>> leg(static_cast<std::size_t>(k) + 1);
  leg[0] = {1.0};
  if (k >= 1) leg[1] = {0.0, 1.0};
  for (int d = 1; d < k; ++d) {
    std::vector<double> next(static_cast<std::size_t>(d) + 2, 0.0);
    for (std::size_t i = 0; i < leg[static_cast<std::size_t>(d)].size(); ++i)
      next[i + 1] += (2.0 * d + 1.0) * leg[static_cast<std::size_t>(d)][i];
    for (std::size_t i = 0; i < leg[static_cast<std::size_t>(d) - 1].size(); ++i)
      next[i] -= d * leg[static_cast<std::size_t>(d) - 1][i];
    for (double& c : next) c /= (d + 1.0);
    leg[static_cast<std::size_t>(d) + 1] = std::move(next);
  }
  const std::vector<double>& pk = leg[static_cast<std::size_t>(k)];
  auto bump = [&](double x) {
    // Affine map of the possibly unwrapped coordinate onto [-1, 1].
    double t = x - v.left;
    if (torus) t = t - std::floor(t + kGuard);
    return eval_poly(pk, 2.0 * t / v.length - 1.0);
  };

  auto has_knot_inside = [&](const Partition& p) {
    if (p.is_periodic()) {
      for (int j = 0; j < p.count(); ++j) {
        const double d = wrap_unit(p.knot(j) - v.left);
        if (d > kGuard && d < v.length - kGuard) return true;
      }
      return false;
    }
    for (double t : p.storage())
      if (t > v.left + kGuard && t < arc_right(v) - kGuard) return true;
    return false;
  };

  const GridFunction shell = grid_shell(sys.finest_level(), 1);
  double worst = 0.0;
  const SystemEvaluator ev(sys);
  for (int n = 0; n < sys.size(); ++n) {
    const int block = static_cast<int>(sys.initial_block.size());
    const Partition& own =
        n < block ? *sys.levels.front()
                  : *sys.functions[static_cast<std::size_t>(n - block)].partition;
    if (has_knot_inside(own)) continue;
    auto integrand = [&](double x) { return bump(x) * ev.eval_one(n, x); };
    const double r = integrate_regions(integrand, shell, {v});
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace ospline
