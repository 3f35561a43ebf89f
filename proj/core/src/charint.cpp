#include "ospline/charint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ospline/gram.hpp"

namespace ospline {

namespace {

double wrap_unit(double x) { return x - std::floor(x); }

// Closed arc from a to b walking in positive direction; torus wraps, the
// interval stays put.
Arc forward_arc(double a, double b, bool torus) {
  if (!torus) return Arc{std::min(a, b), std::abs(b - a)};
  const double len = wrap_unit(b) - wrap_unit(a);
  return Arc{wrap_unit(a), len < 0.0 ? len + 1.0 : len};
}

}  // namespace

CharInterval characteristic_interval(const Partition& p, long i0,
                                     const std::vector<double>& alpha) {
  const int k = p.order();
  const int n = p.count();
  if (alpha.size() != static_cast<std::size_t>(k) + 1)
    throw std::invalid_argument(
        "characteristic_interval expects the k+1 window coefficients");
  if (p.is_periodic() && n < 2 * k)
    throw std::invalid_argument(
        "periodic characteristic intervals need count() >= 2k");
  if (!p.is_periodic() && (i0 < 0 || i0 >= n))
    throw std::invalid_argument("inserted index outside the interior range");

  // Step 1: candidates with support within twice the minimal one.
  double min_support = p.support(i0 - k);
  for (int r = 1; r <= k; ++r)
    min_support = std::min(min_support, p.support(i0 - k + r));
  CharInterval out;
  for (int r = 0; r <= k; ++r) {
    const long j = i0 - k + r;
    if (p.support(j) <= 2.0 * min_support) out.lambda0.push_back(j);
  }

  // Step 2: among those, the largest dual coefficient; ties keep every
  // attaining index and j0 takes the smallest.
  double best = -1.0;
  for (long j : out.lambda0)
    best = std::max(best, std::abs(alpha[static_cast<std::size_t>(j - (i0 - k))]));
  for (long j : out.lambda0)
    if (std::abs(alpha[static_cast<std::size_t>(j - (i0 - k))]) == best)
      out.lambda1.push_back(j);
  long j0 = out.lambda1.front();

  // Step 3: the longest grid interval of J0, leftmost on ties.  Canonical
  // residues keep stored knot values bit-exact on the torus.
  if (p.is_periodic()) {
    j0 = periodic_mod(j0, n);
    for (long& j : out.lambda0) j = periodic_mod(j, n);
    for (long& j : out.lambda1) j = periodic_mod(j, n);
  }
  out.j0 = j0;
  out.J0 = Arc{p.knot(j0), p.support(j0)};
  long piece = j0;
  double piece_len = p.knot(j0 + 1) - p.knot(j0);
  for (int l = 1; l < k; ++l) {
    const double len = p.knot(j0 + l + 1) - p.knot(j0 + l);
    if (len > piece_len) {
      piece = j0 + l;
      piece_len = len;
    }
  }
  if (!(piece_len > 0.0))
    throw std::logic_error("admissible partitions have a positive grid piece");
  out.piece = p.is_periodic() ? periodic_mod(piece, n) : piece;
  out.J = Arc{p.knot(out.piece), p.knot(out.piece + 1) - p.knot(out.piece)};
  return out;
}

CharInterval whole_domain_interval(const Partition& p) {
  CharInterval out;
  out.J = Arc{0.0, 1.0};
  out.J0 = out.J;
  out.j0 = p.first_index();
  out.piece = p.first_index();
  out.whole_domain = true;
  return out;
}

long grid_count(const Partition& p, const Arc& a) {
  long count = 0;
  if (p.is_periodic()) {
    for (int j = 0; j < p.count(); ++j)
      if (arc_contains(a, p.knot(j), true)) ++count;
  } else {
    const double lo = a.left;
    const double hi = arc_right(a);
    for (double t : p.storage())
      if (t >= lo && t <= hi) ++count;
  }
  return count;
}

long distance_count(const Partition& p, double z, const CharInterval& ci) {
  const bool torus = p.is_periodic();
  if (ci.whole_domain || arc_contains(ci.J, z, torus)) return 0;
  if (!torus) {
    const double lo = ci.J.left;
    const double hi = arc_right(ci.J);
    return grid_count(p, z < lo ? Arc{z, lo - z} : Arc{hi, z - hi});
  }
  // J's right endpoint re-read from storage: left + length rounds for the
  // wrap piece and would push the shared knot out of the closed range.
  const double j_right = p.knot(periodic_mod(ci.piece + 1, p.count()));
  const Arc to_left = forward_arc(z, ci.J.left, true);
  const Arc from_right = forward_arc(j_right, z, true);
  return std::min(grid_count(p, to_left), grid_count(p, from_right));
}

namespace {

// Grid points between the closed range [from_left, from_right] and ci.J,
// walked only along directions that stay inside C.  Both boundary points
// count.  Endpoints arrive as exact knot values (or a bare point), and J's
// right end is re-read from storage, so shared endpoints compare exactly
// instead of drifting an ulp through left + length.
long between_count(const Partition& p, double from_left, double from_right,
                   const Arc& C, const CharInterval& ci) {
  const double j_right = p.knot(periodic_mod(ci.piece + 1, p.count()));
  const Arc right_gap = forward_arc(from_right, ci.J.left, true);
  const Arc left_gap = forward_arc(j_right, from_left, true);
  long best = -1;
  if (arc_covers(C, right_gap, true)) best = grid_count(p, right_gap);
  if (arc_covers(C, left_gap, true)) {
    const long c = grid_count(p, left_gap);
    if (best < 0 || c < best) best = c;
  }
  if (best < 0)
    throw std::logic_error("enclosure does not connect the interval to J");
  return best;
}

}  // namespace

EnclosureInfo minimal_enclosure(const Partition& p, const CharInterval& ci,
                                long ell) {
  if (!p.is_periodic())
    throw std::invalid_argument("minimal enclosures are periodic constructs");
  const int n = p.count();
  if (n < 2 * p.order())
    throw std::invalid_argument("minimal enclosures need count() >= 2k");
  ell = periodic_mod(ell, n);
  const Arc I{p.knot(ell), p.knot(ell + 1) - p.knot(ell)};

  // Two inclusion-minimal hulls: continue past J to cover I, or past I to
  // cover J.  The shorter wins; length 1 saturates to the whole circle.
  const double off_ji = wrap_unit(I.left - ci.J.left);
  const double off_ij = wrap_unit(ci.J.left - I.left);
  double len1 = std::max(ci.J.length, off_ji + I.length);
  double len2 = std::max(I.length, off_ij + ci.J.length);
  Arc C;
  if (len1 >= 1.0 && len2 >= 1.0) {
    C = Arc{0.0, 1.0};
  } else if (len1 < len2 || (len1 == len2 && wrap_unit(ci.J.left) <= wrap_unit(I.left))) {
    C = Arc{wrap_unit(ci.J.left), len1};
  } else {
    C = Arc{wrap_unit(I.left), len2};
  }

  EnclosureInfo out;
  out.C = C;
  out.K = grid_count(p, C);
  out.d_hat = (ci.whole_domain || arc_covers(ci.J, I, true))
                  ? 0
                  : between_count(p, I.left,
                                  p.knot(periodic_mod(ell + 1, n)), C, ci);
  return out;
}

long hat_distance(const Partition& p, double x, const CharInterval& ci) {
  if (!p.is_periodic())
    throw std::invalid_argument("hat distances are periodic constructs");
  if (ci.whole_domain || arc_contains(ci.J, x, true)) return 0;
  const int n = p.count();
  // Locate the grid interval [knot(ell), knot(ell+1)] holding x.
  const std::vector<double>& s = p.storage();
  const double xs = wrap_unit(x);
  long ell;
  if (xs < s.front()) {
    ell = n - 1;  // wrap piece
  } else {
    ell = std::upper_bound(s.begin(), s.end(), xs) - s.begin() - 1;
  }
  const EnclosureInfo enc = minimal_enclosure(p, ci, ell);
  return between_count(p, xs, xs, enc.C, ci);
}

long hat_distance_interval(const Partition& p, const Arc& v,
                           const CharInterval& ci) {
  if (ci.whole_domain) return 0;
  // Candidates: the endpoints of v and an interior point of every grid
  // interval meeting v.  The count only changes across grid points.
  long best = std::min(hat_distance(p, v.left, ci),
                       hat_distance(p, arc_right(v), ci));
  const int n = p.count();
  for (int j = 0; j < n && best > 0; ++j) {
    const double a = p.knot(j);
    const double b = p.knot(j + 1);
    if (a == b) continue;
    // Clip the piece (or a period image) against v and probe its middle.
    for (int shift = -1; shift <= 1; ++shift) {
      const double lo = std::max(a + shift, v.left);
      const double hi = std::min(b + shift, arc_right(v));
      if (lo >= hi) continue;
      best = std::min(best, hat_distance(p, 0.5 * (lo + hi), ci));
    }
  }
  return best;
}

long count_large_nested(const std::vector<CharInterval>& list, const Arc& v,
                        double beta, bool torus) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  long count = 0;
  for (const CharInterval& ci : list)
    if (ci.J.length >= beta * v.length && arc_covers(v, ci.J, torus)) ++count;
  return count;
}

GeometricFit nested_decay_ratio(const std::vector<CharInterval>& chain,
                                bool torus) {
  for (std::size_t i = 1; i < chain.size(); ++i)
    if (!arc_covers(chain[i - 1].J, chain[i].J, torus))
      throw std::invalid_argument("interval chain is not nested decreasing");
  GeometricFit out;
  out.points = static_cast<long>(chain.size());
  if (chain.size() <= 1) return out;
  std::vector<double> xs, ys;
  const double base = chain.front().J.length;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(std::log(chain[i].J.length / base));
  }
  const LineFit fit = fit_line(xs, ys);
  out.C = std::exp(fit.intercept);
  out.kappa = std::exp(fit.slope);
  out.rms = fit.rms;
  return out;
}

}  // namespace ospline
