#include "ospline/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "ospline/quadrature.hpp"

namespace ospline {

namespace {

void require_primal(const Spline& f) {
  if (f.repr != Spline::Repr::primal)
    throw std::invalid_argument("operation needs the primal representation; "
                                "convert dual splines through the gram module");
}

void require_same_partition(const Spline& f, const Spline& g) {
  if (f.partition == g.partition) return;
  const Partition& a = *f.partition;
  const Partition& b = *g.partition;
  if (a.kind() != b.kind() || a.order() != b.order() ||
      a.storage() != b.storage())
    throw std::invalid_argument("splines live on different partitions");
}

// Span index mu with knot(mu) <= x < knot(mu+1) as an extended index, plus
// the evaluation abscissa (x shifted by a period for wrapped arcs).
struct SpanPoint {
  long mu;
  double x;
};

SpanPoint find_span(const Partition& p, double x) {
  if (!p.is_periodic()) {
    if (x < 0.0 || x > 1.0 + 1e-12)
      throw std::invalid_argument("evaluation point outside [0,1]");
    const int n = p.count();
    if (x >= 1.0) return {n - 1, 1.0};  // left limit at the right end
    const auto& tau = p.storage();
    // Last storage slot with value <= x; ties resolve to the last copy, which
    // makes evaluation right-continuous.
    const auto it = std::upper_bound(tau.begin(), tau.end(), x);
    const long s = static_cast<long>(it - tau.begin()) - 1;
    return {s - p.order(), x};
  }
  const int n = p.count();
  if (n < p.order())
    throw std::invalid_argument("periodic basis needs at least k points");
  double xc = x - std::floor(x);
  if (xc >= 1.0) xc = 0.0;
  const auto& sigma = p.storage();
  if (xc < sigma.front()) {
    // Wrapped arc [sigma_{n-1}, sigma_0 + 1).
    return {n - 1, xc + 1.0};
  }
  const auto it = std::upper_bound(sigma.begin(), sigma.end(), xc);
  return {static_cast<long>(it - sigma.begin()) - 1, xc};
}

}  // namespace

LocalBasis eval_basis_local(const Partition& p, double x) {
  const int k = p.order();
  const SpanPoint sp = find_span(p, x);
  LocalBasis out;
  out.first = sp.mu - k + 1;
  out.count = k;
  // Triangular all-nonzero scheme; N[r] ends as the value of basis
  // function first + r.
  std::array<double, max_order + 1> left{}, right{};
  out.value[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    left[static_cast<std::size_t>(j)] = sp.x - p.knot(sp.mu + 1 - j);
    right[static_cast<std::size_t>(j)] = p.knot(sp.mu + j) - sp.x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[static_cast<std::size_t>(r + 1)] +
                         left[static_cast<std::size_t>(j - r)];
      const double temp = out.value[static_cast<std::size_t>(r)] / den;
      out.value[static_cast<std::size_t>(r)] =
          saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    out.value[static_cast<std::size_t>(j)] = saved;
  }
  return out;
}

double eval_basis(const Partition& p, long i, double x) {
  const LocalBasis lb = eval_basis_local(p, x);
  if (p.is_periodic()) {
    const int n = p.count();
    const long want = periodic_mod(i, n);
    for (int r = 0; r < lb.count; ++r)
      if (periodic_mod(lb.first + r, n) == want)
        return lb.value[static_cast<std::size_t>(r)];
    return 0.0;
  }
  const long r = i - lb.first;
  if (r < 0 || r >= lb.count) return 0.0;
  return lb.value[static_cast<std::size_t>(r)];
}

Spline make_primal(std::shared_ptr<const Partition> p, std::vector<double> coeffs) {
  if (static_cast<int>(coeffs.size()) != p->dimension())
    throw std::invalid_argument("coefficient count does not match dimension");
  return Spline{std::move(p), Spline::Repr::primal, std::move(coeffs)};
}

Spline make_dual(std::shared_ptr<const Partition> p, std::vector<double> coeffs) {
  if (static_cast<int>(coeffs.size()) != p->dimension())
    throw std::invalid_argument("coefficient count does not match dimension");
  return Spline{std::move(p), Spline::Repr::dual, std::move(coeffs)};
}

double eval(const Spline& f, double x) {
  require_primal(f);
  const Partition& p = *f.partition;
  const LocalBasis lb = eval_basis_local(p, x);
  double acc = 0.0;
  if (p.is_periodic()) {
    const int n = p.count();
    for (int r = 0; r < lb.count; ++r)
      acc += lb.value[static_cast<std::size_t>(r)] *
             f.coeffs[static_cast<std::size_t>(periodic_mod(lb.first + r, n))];
    return acc;
  }
  for (int r = 0; r < lb.count; ++r) {
    const long i = lb.first + r;
    acc += lb.value[static_cast<std::size_t>(r)] * f.at(i);
  }
  return acc;
}

BoehmTable boehm_coarsen(const Partition& fine, long i0) {
  const int k = fine.order();
  const int n = fine.count();
  BoehmTable t;
  t.i0 = i0;
  if (!fine.is_periodic()) {
    if (i0 < 0 || i0 >= n) throw std::invalid_argument("removed index out of range");
    if (n < 1) throw std::invalid_argument("nothing to remove");
    t.coarse_first = -k;
    t.coarse_dim = n - 1 + k;
    t.rows.resize(static_cast<std::size_t>(t.coarse_dim));
    t.counts.resize(static_cast<std::size_t>(t.coarse_dim));
    for (long c = -k; c <= n - 2; ++c) {
      const std::size_t row = static_cast<std::size_t>(c + k);
      if (c <= i0 - k - 1) {
        t.rows[row][0] = {c, 1.0};
        t.counts[row] = 1;
      } else if (c >= i0) {
        t.rows[row][0] = {c + 1, 1.0};
        t.counts[row] = 1;
      } else {
        const double w0 = (fine.knot(i0) - fine.knot(c)) /
                          (fine.knot(c + k) - fine.knot(c));
        const double w1 = (fine.knot(c + k + 1) - fine.knot(i0)) /
                          (fine.knot(c + k + 1) - fine.knot(c + 1));
        t.rows[row][0] = {c, w0};
        t.rows[row][1] = {c + 1, w1};
        t.counts[row] = 2;
      }
    }
    return t;
  }
  if (n < k + 1)
    throw std::invalid_argument("periodic coarsening needs at least k+1 points");
  if (i0 < 0 || i0 >= n) throw std::invalid_argument("removed index out of range");
  const int nc = n - 1;
  t.coarse_first = 0;
  t.coarse_dim = nc;
  t.rows.resize(static_cast<std::size_t>(nc));
  t.counts.resize(static_cast<std::size_t>(nc));
  for (long c = 0; c < nc; ++c) {
    const std::size_t row = static_cast<std::size_t>(c);
    // Representative of c in the window {i0-k, ..., i0-1} modulo nc, if any.
    const long delta = periodic_mod(c - (i0 - k), nc);
    if (delta < k) {
      const long cp = i0 - k + delta;
      const double w0 = (fine.knot(i0) - fine.knot(cp)) /
                        (fine.knot(cp + k) - fine.knot(cp));
      const double w1 = (fine.knot(cp + k + 1) - fine.knot(i0)) /
                        (fine.knot(cp + k + 1) - fine.knot(cp + 1));
      t.rows[row][0] = {periodic_mod(cp, n), w0};
      t.rows[row][1] = {periodic_mod(cp + 1, n), w1};
      t.counts[row] = 2;
    } else {
      t.rows[row][0] = {c + (c >= i0 ? 1 : 0), 1.0};
      t.counts[row] = 1;
    }
  }
  return t;
}

std::vector<double> refine_coeffs(const BoehmTable& table, const Partition& fine,
                                  const std::vector<double>& coarse) {
  if (static_cast<int>(coarse.size()) != table.coarse_dim)
    throw std::invalid_argument("coarse coefficient count mismatch");
  std::vector<double> out(static_cast<std::size_t>(fine.dimension()), 0.0);
  const long fine_first = fine.first_index();
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const double a = coarse[row];
    if (a == 0.0) continue;
    for (int t = 0; t < table.counts[row]; ++t) {
      const CoarsenTerm& term = table.rows[row][static_cast<std::size_t>(t)];
      out[static_cast<std::size_t>(term.index - fine_first)] += a * term.weight;
    }
  }
  return out;
}

std::vector<double> breakpoints(const Partition& p) {
  std::vector<double> b;
  if (!p.is_periodic()) {
    b.push_back(0.0);
    for (int i = 0; i < p.count(); ++i) {
      const double v = p.knot(i);
      if (v != b.back()) b.push_back(v);
    }
    if (b.back() != 1.0) b.push_back(1.0);
    return b;
  }
  for (int i = 0; i < p.count(); ++i) {
    const double v = p.knot(i);
    if (b.empty() || v != b.back()) b.push_back(v);
  }
  return b;
}

namespace {

// Integral of fn over one sweep of the domain, k-point Gauss per piece;
// exact for piecewise polynomials of degree <= 2k-1 on the partition grid.
double integrate_pieces(const Partition& p, int nodes,
                        const std::function<double(double)>& fn) {
  const std::vector<double> b = breakpoints(p);
  double acc = 0.0;
  if (!p.is_periodic()) {
    for (std::size_t j = 0; j + 1 < b.size(); ++j)
      acc += gauss_integrate(fn, b[j], b[j + 1], nodes);
    return acc;
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double lo = b[j];
    const double hi = (j + 1 < b.size()) ? b[j + 1] : b[0] + 1.0;
    acc += gauss_integrate(fn, lo, hi, nodes);
  }
  return acc;
}

}  // namespace

double inner_product(const Spline& f, const Spline& g) {
  require_primal(f);
  require_primal(g);
  require_same_partition(f, g);
  const Partition& p = *f.partition;
  const int k = p.order();
  auto fn = [&](double x) { return eval(f, x) * eval(g, x); };
  return integrate_pieces(p, k, fn);
}

namespace {

double sup_norm_piece(const Spline& f, double lo, double hi) {
  // Dense sampling plus golden-section refinement around the best sample.
  constexpr int samples = 256;
  double best = 0.0;
  double best_x = lo;
  for (int i = 0; i <= samples; ++i) {
    const double x = lo + (hi - lo) * i / samples;
    const double v = std::abs(eval(f, x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const double h = (hi - lo) / samples;
  double a = std::max(lo, best_x - h);
  double b = std::min(hi, best_x + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = std::abs(eval(f, c));
  double fd = std::abs(eval(f, d));
  for (int it = 0; it < 60 && (b - a) > 1e-14; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = std::abs(eval(f, c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = std::abs(eval(f, d));
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace

double lp_norm(const Spline& f, double p_exp, std::optional<Arc> sub) {
  require_primal(f);
  const Partition& p = *f.partition;
  const bool torus = p.is_periodic();
  if (!(p_exp >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");

  // Pieces: partition grid intervals clipped to the requested sub-arc, in
  // unrolled coordinates (torus pieces may pass 1; eval wraps).
  std::vector<std::pair<double, double>> pieces;
  const std::vector<double> b = breakpoints(p);
  auto push_clipped = [&pieces](double lo, double hi, double a, double c) {
    const double l = std::max(lo, a);
    const double h = std::min(hi, c);
    if (h > l) pieces.emplace_back(l, h);
  };
  if (!torus) {
    double a = 0.0, c = 1.0;
    if (sub) {
      a = std::max(0.0, sub->left);
      c = std::min(1.0, arc_right(*sub));
    }
    for (std::size_t j = 0; j + 1 < b.size(); ++j) push_clipped(b[j], b[j + 1], a, c);
  } else {
    double a = 0.0, c = 1.0;
    if (sub) {
      a = sub->left - std::floor(sub->left);
      c = a + std::min(sub->length, 1.0);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double lo = b[j];
      const double hi = (j + 1 < b.size()) ? b[j + 1] : b[0] + 1.0;
      // Grid arcs live in [sigma_0, sigma_0+1], the sub-arc in [0, 2); clip
      // against every period image that can meet them.  The images are
      // disjoint because the sub-arc is at most one period long.
      push_clipped(lo, hi, a, c);
      push_clipped(lo + 1.0, hi + 1.0, a, c);
      push_clipped(lo, hi, a + 1.0, c + 1.0);
    }
  }

  if (std::isinf(p_exp)) {
    double best = 0.0;
    for (const auto& [lo, hi] : pieces) best = std::max(best, sup_norm_piece(f, lo, hi));
    return best;
  }

  double total = 0.0;
  const double rounded = std::round(p_exp);
  const bool is_even_int =
      std::abs(p_exp - rounded) < 1e-12 && std::fmod(rounded, 2.0) == 0.0;
  if (is_even_int) {
    const int deg = static_cast<int>(rounded) * (p.order() - 1);
    const int nodes = deg / 2 + 1;
    auto fn = [&](double x) { return std::pow(eval(f, x), rounded); };
    for (const auto& [lo, hi] : pieces) total += gauss_integrate(fn, lo, hi, nodes);
  } else {
    auto fn = [&](double x) { return std::pow(std::abs(eval(f, x)), p_exp); };
    for (const auto& [lo, hi] : pieces)
      total += adaptive_integrate(fn, lo, hi, 1e-10, 20).value;
  }
  return std::pow(std::max(total, 0.0), 1.0 / p_exp);
}

}  // namespace ospline
