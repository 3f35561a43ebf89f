#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "ospline/knots.hpp"

namespace ospline {

/// B-splines here are L-infinity normalized: they sum to one wherever the
/// basis is complete.  N_i lives on [knot(i), knot(i+k)].  Evaluation is
/// right-continuous at interior knots; the clamped basis takes its left
/// limit at x = 1.  Periodic bases require count() >= k.

/// The k basis values that can be nonzero at a point.
struct LocalBasis {
  long first = 0;  ///< index of the first listed B-spline (extended index)
  int count = 0;
  std::array<double, max_order> value{};
};

LocalBasis eval_basis_local(const Partition& p, double x);

/// Single basis function value N_i(x).
double eval_basis(const Partition& p, long i, double x);

/// Spline in either the B-spline (primal) or biorthogonal (dual) expansion.
/// Coefficients are stored by basis index shifted by first_index().
struct Spline {
  enum class Repr { primal, dual };
  std::shared_ptr<const Partition> partition;
  Repr repr = Repr::primal;
  std::vector<double> coeffs;

  double& at(long i) { return coeffs[static_cast<std::size_t>(i - partition->first_index())]; }
  double at(long i) const { return coeffs[static_cast<std::size_t>(i - partition->first_index())]; }
};

Spline make_primal(std::shared_ptr<const Partition> p, std::vector<double> coeffs);
Spline make_dual(std::shared_ptr<const Partition> p, std::vector<double> coeffs);

/// Point evaluation; primal representation only.
double eval(const Spline& f, double x);

/// One coarse B-spline written in the fine basis after removing the knot at
/// sorted position i0: one or two terms.
struct CoarsenTerm {
  long index;  ///< fine basis index (canonical)
  double weight;
};

struct BoehmTable {
  long i0 = 0;
  std::vector<std::array<CoarsenTerm, 2>> rows;  ///< row c: coarse index c - first
  std::vector<int> counts;                       ///< 1 or 2 valid terms per row
  long coarse_first = 0;
  int coarse_dim = 0;
};

/// Expansion of every coarse B-spline (partition with knot i0 removed) in
/// the fine basis.  Periodic tables need count() >= k+1.
BoehmTable boehm_coarsen(const Partition& fine, long i0);

/// Coefficient push-forward along a knot insertion: given a spline on the
/// coarse partition, its coefficients on the fine partition.
std::vector<double> refine_coeffs(const BoehmTable& table, const Partition& fine,
                                  const std::vector<double>& coarse);

/// L2 inner product of two primal splines on the same partition; exact
/// Gauss quadrature per knot interval.
double inner_product(const Spline& f, const Spline& g);

/// Lp norm over the domain or a sub-arc.  Even integer p uses exact Gauss
/// rules, p = infinity dense sampling with local refinement, other p
/// adaptive quadrature.
double lp_norm(const Spline& f, double p, std::optional<Arc> sub = {});

/// Convenience: the grid breakpoints of the partition as one sweep of the
/// domain.  Clamped: 0 = b_0 < ... < b_m = 1 (distinct values).  Periodic:
/// b_0 < ... < b_{m-1} < b_0 + 1, left ends of the nonempty arcs.
std::vector<double> breakpoints(const Partition& p);

}  // namespace ospline
