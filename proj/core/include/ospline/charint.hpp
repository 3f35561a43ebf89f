#pragma once

#include <vector>

#include "ospline/knots.hpp"

namespace ospline {

/// Characteristic interval of an orthonormal spline function.
///
/// Among the k+1 B-splines whose support contains the inserted knot, the
/// candidates with approximately minimal support (within a factor 2) form
/// lambda0; the ones carrying the largest dual coefficient form lambda1.
/// J0 is the support of the chosen candidate j0, and J is the longest of
/// the k grid intervals composing J0.
struct CharInterval {
  Arc J;
  Arc J0;
  long j0 = 0;
  long piece = 0;  ///< grid index: J = [knot(piece), knot(piece+1)]
  std::vector<long> lambda0;
  std::vector<long> lambda1;
  bool whole_domain = false;  ///< early functions act on the whole domain
};

/// Builds the characteristic interval for the knot at sorted position i0.
/// `alpha` holds the k+1 dual coefficients of the window, alpha[r]
/// belonging to index i0-k+r.  Ties: smallest index in lambda1, leftmost
/// grid interval.  Periodic partitions need count() >= 2k.
CharInterval characteristic_interval(const Partition& p, long i0,
                                     const std::vector<double>& alpha);

/// Marker interval covering the whole domain, used for the functions of the
/// initial block and the pre-asymptotic periodic steps.
CharInterval whole_domain_interval(const Partition& p);

/// Number of partition entries (with multiplicity) in the closed range
/// between z and the nearer endpoint of J; zero when z lies in J.  On the
/// torus the count is taken along the cheaper of the two directions.
long distance_count(const Partition& p, double z, const CharInterval& ci);

/// Entries of the partition (with multiplicity) in the closed arc.
long grid_count(const Partition& p, const Arc& a);

/// Minimal arc enclosing a characteristic interval and one grid interval.
struct EnclosureInfo {
  Arc C;
  long K = 0;      ///< grid points in the closed arc C, with multiplicity
  long d_hat = 0;  ///< grid points between the interval and J inside C
};

/// Shortest torus arc containing both ci.J and the grid interval
/// [knot(ell), knot(ell+1)]; equal lengths resolve to the smaller left
/// endpoint.  d_hat is measured from the interior of that grid interval.
EnclosureInfo minimal_enclosure(const Partition& p, const CharInterval& ci,
                                long ell);

/// Periodic distance count of x from ci.J: grid points between x and J
/// inside the minimal enclosure of x's grid interval, counting x and the
/// endpoints of J whenever they are grid points.  Zero inside J.
long hat_distance(const Partition& p, double x, const CharInterval& ci);

/// min over x in the closed arc v of hat_distance(p, x, ci); the count is
/// constant on open grid intervals, so finitely many candidates suffice.
long hat_distance_interval(const Partition& p, const Arc& v,
                           const CharInterval& ci);

/// card{ i : J_i lies inside v and |J_i| >= beta * |v| }.
long count_large_nested(const std::vector<CharInterval>& list, const Arc& v,
                        double beta, bool torus);

/// Geometric fit |J_i| ~ C * kappa^i * |J_0| over a chain of characteristic
/// intervals that decreases under inclusion.
struct GeometricFit {
  double C = 1.0;
  double kappa = 1.0;
  double rms = 0.0;
  long points = 0;  ///< chains of length <= 1 report kappa = 1 untouched
};

GeometricFit nested_decay_ratio(const std::vector<CharInterval>& chain,
                                bool torus);

}  // namespace ospline
