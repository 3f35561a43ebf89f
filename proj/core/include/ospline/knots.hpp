#pragma once

#include <memory>
#include <vector>

namespace ospline {

/// Domain a knot sequence lives on: the unit interval [0,1] or the circle
/// R/Z represented by [0,1).
enum class Domain { interval, torus };

/// Hard ceiling on the spline order k. Everything downstream sizes small
/// stack buffers with it.
inline constexpr int max_order = 10;

/// A point sequence in insertion order together with the spline order k.
/// Admissibility: every value occurs at most k times (bit-exact equality),
/// interval points lie in (0,1), torus points in [0,1).
struct KnotSequence {
  Domain domain = Domain::interval;
  int order = 2;
  std::vector<double> points;
};

void validate(const KnotSequence& seq);

/// Number of times x already occurs in seq (bit-exact comparison).
int multiplicity(const KnotSequence& seq, double x);

struct InsertResult;

/// Appends x to the sequence and reports the position i0 the new knot takes
/// in the sorted partition (after any existing copies of the same value).
InsertResult insert_point(const KnotSequence& seq, double x);

enum class PartitionKind { clamped, periodic };

/// Sorted knot partition of a fixed order k.
///
/// Clamped partitions on [0,1] carry k-fold boundary knots and use indices
/// -k..n+k-1 where n is the number of interior knots; index i maps to
/// storage slot i+k.  Periodic partitions store n points of [0,1) and
/// extend over all integers via knot(i+n) = knot(i) + 1.
class Partition {
 public:
  static Partition clamped(const KnotSequence& seq);
  static Partition periodic(const KnotSequence& seq);
  static Partition clamped_from_sorted(std::vector<double> interior, int order);
  static Partition periodic_from_sorted(std::vector<double> points, int order);

  PartitionKind kind() const { return kind_; }
  bool is_periodic() const { return kind_ == PartitionKind::periodic; }
  int order() const { return k_; }

  /// Number of movable knots: interior knots (clamped) or all points
  /// (periodic).
  int count() const { return n_; }

  /// Dimension of the spline space: n+k clamped, n periodic.
  int dimension() const { return is_periodic() ? n_ : n_ + k_; }

  /// First valid basis index: -k clamped, 0 periodic.
  long first_index() const { return is_periodic() ? 0 : -k_; }

  /// Knot value at index i.  Clamped: i in [-k, n+k-1].  Periodic: any i,
  /// extended by whole periods.
  double knot(long i) const;

  /// Support length of the i-th B-spline: knot(i+k) - knot(i).
  double support(long i) const { return knot(i + k_) - knot(i); }

  /// Raw sorted storage (clamped: 0/1 padding included).
  const std::vector<double>& storage() const { return tau_; }

  /// Multiplicity of value x among the movable knots.
  int interior_multiplicity(double x) const;

 private:
  Partition() = default;
  void check_admissible() const;

  PartitionKind kind_ = PartitionKind::clamped;
  int k_ = 0;
  int n_ = 0;
  std::vector<double> tau_;
};

struct InsertResult {
  KnotSequence sequence;
  int position;  ///< i0: sorted index of the new knot among movable knots
};

/// Closed interval [left, left+length].  On the torus the right end may pass
/// 1 and wraps; points are compared mod 1.
struct Arc {
  double left = 0.0;
  double length = 0.0;
};

inline double arc_right(const Arc& a) { return a.left + a.length; }

/// Membership test; `torus` selects wrap-around semantics.
bool arc_contains(const Arc& a, double x, bool torus);

/// Distance from x to the arc (0 if inside).
double arc_distance(const Arc& a, double x, bool torus);

/// Whether inner lies inside outer.
bool arc_covers(const Arc& outer, const Arc& inner, bool torus);

/// Index on Z/nZ.
struct PeriodicIndex {
  int modulus;
  long value;
};

/// Canonical representative in [0, n).
long periodic_mod(long i, int n);

/// Cyclic distance min(|i-j|, n-|i-j|) between residues.
int periodic_distance(int n, long i, long j);
int periodic_distance(PeriodicIndex a, PeriodicIndex b);

/// Result of cutting a periodic partition through the middle of a largest
/// gap.  Point values are rotated by `rotation` (new = old - rotation mod 1)
/// so that the first rotated knot sits at half the largest gap; `clamped` is
/// the resulting partition of [0,1] with k-fold boundary knots.  Periodic
/// index i corresponds to clamped interior index (i - shift) mod n.
struct MaximalSplitting {
  Partition clamped;
  double rotation = 0.0;
  int shift = 0;
};

MaximalSplitting maximal_splitting(const Partition& periodic);

/// Rotated coordinate of a point under a splitting: (x - rotation) mod 1.
double rotate_point(double x, double rotation);

}  // namespace ospline
