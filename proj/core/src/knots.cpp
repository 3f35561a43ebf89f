#include "ospline/knots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ospline {

namespace {

void check_order(int k) {
  if (k < 1 || k > max_order)
    throw std::invalid_argument("spline order must be in [1, " +
                                std::to_string(max_order) + "], got " +
                                std::to_string(k));
}

void check_point(Domain domain, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("knot value not finite");
  if (domain == Domain::interval) {
    if (!(x > 0.0 && x < 1.0))
      throw std::invalid_argument("interval knots must lie strictly inside (0,1)");
  } else {
    if (!(x >= 0.0 && x < 1.0))
      throw std::invalid_argument("torus knots must lie in [0,1)");
  }
}

}  // namespace

void validate(const KnotSequence& seq) {
  check_order(seq.order);
  for (double x : seq.points) check_point(seq.domain, x);
  std::vector<double> sorted(seq.points);
  std::sort(sorted.begin(), sorted.end());
  int run = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    run = (sorted[i] == sorted[i - 1]) ? run + 1 : 1;
    if (run > seq.order)
      throw std::invalid_argument("knot multiplicity exceeds order");
  }
}

int multiplicity(const KnotSequence& seq, double x) {
  int m = 0;
  for (double v : seq.points) m += (v == x);
  return m;
}

InsertResult insert_point(const KnotSequence& seq, double x) {
  check_order(seq.order);
  check_point(seq.domain, x);
  if (multiplicity(seq, x) >= seq.order)
    throw std::invalid_argument("inserting point would exceed multiplicity k");
  InsertResult r{seq, 0};
  r.sequence.points.push_back(x);
  std::vector<double> sorted(r.sequence.points);
  std::sort(sorted.begin(), sorted.end());
  // New knot sits after existing copies of the same value.
  r.position = static_cast<int>(
      std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin() - 1);
  return r;
}

void Partition::check_admissible() const {
  const long lo = first_index();
  const long hi = is_periodic() ? n_ - 1 : n_ - 1;
  for (long i = lo; i <= hi; ++i) {
    if (!(knot(i) < knot(i + k_)))
      throw std::invalid_argument("partition violates multiplicity <= k");
  }
}

Partition Partition::clamped(const KnotSequence& seq) {
  if (seq.domain != Domain::interval)
    throw std::invalid_argument("clamped partition requires an interval sequence");
  validate(seq);
  std::vector<double> interior(seq.points);
  std::sort(interior.begin(), interior.end());
  return clamped_from_sorted(std::move(interior), seq.order);
}

Partition Partition::clamped_from_sorted(std::vector<double> interior, int order) {
  check_order(order);
  if (!std::is_sorted(interior.begin(), interior.end()))
    throw std::invalid_argument("interior knots must be sorted");
  for (double x : interior)
    if (!(x > 0.0 && x < 1.0))
      throw std::invalid_argument("interior knots must lie strictly inside (0,1)");
  Partition p;
  p.kind_ = PartitionKind::clamped;
  p.k_ = order;
  p.n_ = static_cast<int>(interior.size());
  p.tau_.assign(order, 0.0);
  p.tau_.insert(p.tau_.end(), interior.begin(), interior.end());
  p.tau_.insert(p.tau_.end(), order, 1.0);
  p.check_admissible();
  return p;
}

Partition Partition::periodic(const KnotSequence& seq) {
  if (seq.domain != Domain::torus)
    throw std::invalid_argument("periodic partition requires a torus sequence");
  validate(seq);
  std::vector<double> pts(seq.points);
  std::sort(pts.begin(), pts.end());
  return periodic_from_sorted(std::move(pts), seq.order);
}

Partition Partition::periodic_from_sorted(std::vector<double> points, int order) {
  check_order(order);
  if (points.empty())
    throw std::invalid_argument("periodic partition needs at least one point");
  if (!std::is_sorted(points.begin(), points.end()))
    throw std::invalid_argument("periodic knots must be sorted");
  for (double x : points)
    if (!(x >= 0.0 && x < 1.0))
      throw std::invalid_argument("torus knots must lie in [0,1)");
  Partition p;
  p.kind_ = PartitionKind::periodic;
  p.k_ = order;
  p.n_ = static_cast<int>(points.size());
  p.tau_ = std::move(points);
  if (p.n_ >= p.k_) p.check_admissible();
  return p;
}

double Partition::knot(long i) const {
  if (!is_periodic()) {
    const long s = i + k_;
    if (s < 0 || s >= static_cast<long>(tau_.size()))
      throw std::out_of_range("clamped knot index out of range");
    return tau_[static_cast<std::size_t>(s)];
  }
  long r = i % n_;
  long d = i / n_;
  if (r < 0) {
    r += n_;
    d -= 1;
  }
  return tau_[static_cast<std::size_t>(r)] + static_cast<double>(d);
}

int Partition::interior_multiplicity(double x) const {
  const std::size_t lo = is_periodic() ? 0 : static_cast<std::size_t>(k_);
  const std::size_t hi = is_periodic() ? tau_.size()
                                       : tau_.size() - static_cast<std::size_t>(k_);
  int m = 0;
  for (std::size_t s = lo; s < hi; ++s) m += (tau_[s] == x);
  return m;
}

namespace {

double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y = 0.0;
  return y;
}

}  // namespace

// Torus arithmetic goes through rounded wrap differences, so closed-endpoint
// tests on the circle carry a one-ulp guard.  Interval logic stays exact.
bool arc_contains(const Arc& a, double x, bool torus) {
  if (!torus) return x >= a.left && x <= arc_right(a);
  if (a.length >= 1.0) return true;
  const double d = wrap_unit(x - a.left);
  return d <= a.length + 1e-14 || d >= 1.0 - 1e-14;
}

double arc_distance(const Arc& a, double x, bool torus) {
  if (!torus) {
    if (x < a.left) return a.left - x;
    if (x > arc_right(a)) return x - arc_right(a);
    return 0.0;
  }
  if (arc_contains(a, x, true)) return 0.0;
  const double after = wrap_unit(x - a.left) - a.length;  // past the right end
  const double before = wrap_unit(a.left - x);            // before the left end
  return std::max(0.0, std::min(after, before));
}

bool arc_covers(const Arc& outer, const Arc& inner, bool torus) {
  if (!torus)
    return inner.left >= outer.left && arc_right(inner) <= arc_right(outer);
  if (outer.length >= 1.0) return true;
  if (inner.length > outer.length + 1e-14) return false;
  const double off = wrap_unit(inner.left - outer.left);
  if (off >= 1.0 - 1e-14) return inner.length <= outer.length + 1e-14;
  return off + inner.length <= outer.length + 1e-14;
}

long periodic_mod(long i, int n) {
  long r = i % n;
  return r < 0 ? r + n : r;
}

int periodic_distance(int n, long i, long j) {
  if (n <= 0) throw std::invalid_argument("modulus must be positive");
  long d = periodic_mod(i - j, n);
  return static_cast<int>(std::min(d, static_cast<long>(n) - d));
}

int periodic_distance(PeriodicIndex a, PeriodicIndex b) {
  if (a.modulus != b.modulus)
    throw std::invalid_argument("periodic indices have different moduli");
  return periodic_distance(a.modulus, a.value, b.value);
}

double rotate_point(double x, double rotation) {
  double y = x - rotation;
  y -= std::floor(y);
  // Guard against y == 1.0 after rounding.
  if (y >= 1.0) y = 0.0;
  return y;
}

MaximalSplitting maximal_splitting(const Partition& p) {
  if (!p.is_periodic())
    throw std::invalid_argument("maximal_splitting requires a periodic partition");
  const int n = p.count();
  // Gap j spans [knot(j-1), knot(j)]; j = 0 wraps around through 1.
  int best = 0;
  double best_len = -1.0;
  double best_left = 2.0;
  for (int j = 0; j < n; ++j) {
    const double len = p.knot(j) - p.knot(j - 1);
    const double left_value = p.storage()[static_cast<std::size_t>(
        periodic_mod(j - 1, n))];
    if (len > best_len || (len == best_len && left_value < best_left)) {
      best = j;
      best_len = len;
      best_left = left_value;
    }
  }
  if (!(best_len > 0.0))
    throw std::runtime_error("periodic partition has no positive gap");
  // Cut in the middle of the winning gap; knots best, best+1, ... follow the
  // cut in cyclic order.
  const double cut = p.knot(best - 1) + 0.5 * best_len;
  // knot(best) > cut and knot(best+n-1) < cut+1, so these land in (0,1).
  std::vector<double> interior(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    interior[static_cast<std::size_t>(i)] = p.knot(best + i) - cut;
  return MaximalSplitting{
      Partition::clamped_from_sorted(std::move(interior), p.order()),
      cut - std::floor(cut), best};
}

}  // namespace ospline
