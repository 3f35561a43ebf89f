#pragma once

#include <memory>
#include <vector>

#include "ospline/bspline.hpp"
#include "ospline/charint.hpp"
#include "ospline/gram.hpp"
#include "ospline/knots.hpp"

namespace ospline {

/// The orthogonal spline function g attached to one knot insertion: g spans
/// the orthogonal complement of the coarse space (the same partition with
/// the knot at sorted position i0 removed) inside the fine space.  f = g /
/// norm2 is the unit-norm version.  alpha holds the dual coefficients of g,
/// w the primal ones, both in storage order.
struct OrthoFunction {
  int index_n = 0;  ///< 1-based position of f in the whole system
  long i0 = 0;      ///< sorted position of the inserted knot
  std::shared_ptr<const Partition> partition;
  std::vector<double> alpha;
  std::vector<double> w;
  double norm2 = 1.0;
  CharInterval J;
};

/// Dual coefficients on the insertion window i0-k..i0, alternating in sign,
/// computed from the closed-form products; entries off the window vanish.
/// Periodic partitions need count() >= 2k so the window stays injective.
std::vector<double> alpha_closed_form(const Partition& p, long i0);

/// Same vector through the two-term recursion, anchored at the positive
/// closed-form value for index i0-k.
std::vector<double> alpha_recursion(const Partition& p, long i0);

/// Window slice of f.alpha: entry r belongs to index i0-k+r.
std::vector<double> alpha_window(const OrthoFunction& f);

/// Builds g for the knot at sorted position i0 of a clamped partition:
/// alpha from the closed form, w = G^{-1} alpha, norm2 = sqrt(sum w alpha).
OrthoFunction build_g(const GramSystem& gram, long i0);
OrthoFunction build_g(std::shared_ptr<const Partition> p, long i0);

/// Periodic variant; count() >= 2k.
OrthoFunction build_g_periodic(const GramSystem& gram, long i0);
OrthoFunction build_g_periodic(std::shared_ptr<const Partition> p, long i0);

/// g as a primal spline; f = g / norm2.
Spline primal_g(const OrthoFunction& f);
Spline primal_f(const OrthoFunction& f);

/// Orthonormal spline system over a knot sequence.  levels[m] is the
/// partition after m insertions beyond the initial space, tables[m] the
/// coarse-to-fine expansion from levels[m] to levels[m+1].  The system
/// functions are the initial block (symmetrically orthonormalized B-spline
/// basis of levels[0]) followed by one OrthoFunction per insertion;
/// finest[i] carries function i in primal coordinates on levels.back().
struct OrthoSystem {
  KnotSequence sequence;
  std::vector<std::shared_ptr<const Partition>> levels;
  std::vector<BoehmTable> tables;
  std::vector<Spline> initial_block;
  std::vector<OrthoFunction> functions;
  std::vector<std::vector<double>> finest;
  std::shared_ptr<const GramSystem> finest_gram;

  int size() const {
    return static_cast<int>(initial_block.size() + functions.size());
  }
  const std::shared_ptr<const Partition>& finest_level() const {
    return levels.back();
  }
};

/// Builds the full system.  Interval sequences start from the polynomial
/// space (no interior knots); torus sequences start from the space over the
/// first k points and need at least k points.  Periodic insertion steps
/// with fewer than 2k knots fall back to a dense null-space construction;
/// their characteristic interval is the whole domain.
OrthoSystem build_system(const KnotSequence& seq);

/// Independent check construction: same initial block, then modified
/// Gram-Schmidt with a second reorthogonalization sweep applied to the new
/// B-spline of each insertion, everything expressed on the finest level.
/// Aborts if two sweeps leave a projection above 1e-8.  Only sensible for
/// small systems (dimension <= 200).
OrthoSystem gram_schmidt_oracle(const KnotSequence& seq);

/// Coefficients on levels[level] pushed forward to the finest level.
std::vector<double> push_to_finest(const OrthoSystem& sys, std::size_t level,
                                   std::vector<double> coeffs);

/// System function i as a spline on the finest partition.
Spline finest_spline(const OrthoSystem& sys, int i);

/// max_ij |<f_i, f_j> - delta_ij| over the whole system.
double max_orthonormality_defect(const OrthoSystem& sys);

/// Side-by-side construction on a periodic partition and its maximal
/// splitting.  g and ghat agree up to the factor c away from the boundary
/// blocks B = {-k..-1, n-k..n-1}: alpha_j = c * alphahat_j off B, and the
/// difference u = g - c*ghat keeps dual support inside B.
struct ComparisonReport {
  double c = 0.0;
  double c_spread = 0.0;  ///< relative variation of the ratio over the window off B
  double ratio_J = 0.0;   ///< |J| / |Jhat|
  double g_norm2 = 0.0;
  std::vector<long> boundary;  ///< B as clamped indices
  std::vector<double> beta;    ///< beta_j for j in boundary
  double max_beta = 0.0;
  double max_offB_residual = 0.0;  ///< max |beta_j| off B (absolute)
};

ComparisonReport compare_periodic_nonperiodic(
    std::shared_ptr<const Partition> periodic, long i0);

}  // namespace ospline
