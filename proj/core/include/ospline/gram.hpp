#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "ospline/bspline.hpp"
#include "ospline/knots.hpp"

namespace ospline {

/// Least-squares fit of log(|a_ij| * D_ij) against the index distance:
/// |a_ij| ~ C * q^dist / D_ij.
struct DecayFit {
  double C = 0.0;
  double q = 0.0;
  double residual = 0.0;  ///< rms of the log-linear fit
  long points = 0;
};

/// Gram matrix of the B-spline basis and its factorization.
///
/// Clamped partitions give a banded SPD matrix of half-bandwidth k-1 and a
/// banded Cholesky factorization.  Periodic partitions add wrap-around
/// corners, eliminated by a bordered block factorization (dense fallback
/// when n < 4k).  Immutable after construction; the inverse-column cache is
/// internally synchronized.
class GramSystem {
 public:
  explicit GramSystem(std::shared_ptr<const Partition> p);

  const Partition& partition() const { return *p_; }
  const std::shared_ptr<const Partition>& partition_ptr() const { return p_; }
  int dimension() const { return dim_; }

  /// Gram entry by basis index (paper convention).
  double entry(long i, long j) const;

  /// Entry of the inverse by basis index; columns are solved on demand and
  /// cached.
  double inverse_entry(long i, long j) const;

  /// Solves G x = b; b in storage order (index - first_index()).
  std::vector<double> solve(const std::vector<double>& b) const;

  /// Converts a dual-representation spline to the primal one.
  Spline dual_to_primal(const Spline& dual) const;

  /// L2-orthogonal projection of h onto the spline space.  `converged`
  /// reports whether the load quadrature met its tolerance everywhere.
  Spline project(const std::function<double(double)>& h,
                 bool* converged = nullptr) const;

  /// sup_x integral |K(x,y)| dy for the projection kernel
  /// K(x,y) = sum_ij (G^{-1})_ij N_i(x) N_j(y); the supremum is taken over a
  /// sample grid, so the value is a lower bound of the true norm.
  double projection_infinity_norm(int samples_per_interval = 256) const;

  /// Decay fit of the inverse entries: D_ij is the convex-hull length of the
  /// two supports (clamped) or max of the support lengths (periodic),
  /// distance is |i-j| (clamped) or the cyclic distance (periodic).
  /// Entries below 1e-14 * max|a_ij| are excluded; with no off-diagonal data
  /// the fit degenerates to q = 0.
  DecayFit fit_decay() const;

  /// Dense row-major dump, mostly for text export and oracles.
  std::vector<double> dense() const;

 private:
  int storage_of(long i) const;
  void build();
  void factor();
  const std::vector<double>& inverse_column(int j) const;

  std::shared_ptr<const Partition> p_;
  int dim_ = 0;
  int band_ = 0;  ///< half-bandwidth k-1
  // band_entry(r, d) = A[r, r+d] (periodic: column mod n), d = 0..band_.
  std::vector<double> a_;
  // Clamped: banded Cholesky L (lower).  Periodic: banded Cholesky of the
  // interior block plus dense border pieces.
  std::vector<double> l_;
  int interior_ = 0;                    ///< periodic: rows handled by the band
  std::vector<double> a12_;             ///< interior x border couplings
  std::vector<double> x12_;             ///< A11^{-1} A12
  std::vector<double> schur_;           ///< factored border Schur complement
  bool dense_mode_ = false;
  std::vector<double> dense_fact_;      ///< dense Cholesky fallback
  mutable std::mutex cache_mu_;
  mutable std::vector<std::vector<double>> inv_cols_;
  mutable std::vector<char> inv_ready_;
};

/// Builds the factorized Gram system for a partition.
GramSystem build_gram(std::shared_ptr<const Partition> p);

/// Inner product that accepts dual representations by converting them first.
double inner_product_any(const GramSystem& gram, const Spline& f, const Spline& g);

/// y = G x for storage-order coefficients, using the band structure.
std::vector<double> gram_times(const GramSystem& gram, const std::vector<double>& x);

/// <a, b> in the spline space: a^T G b for storage-order coefficients.
double gram_dot(const GramSystem& gram, const std::vector<double>& a,
                const std::vector<double>& b);

/// Integral of |s| over the domain, exact per grid interval up to root
/// isolation at 1e-12.
double integral_abs(const Spline& s);

/// Least-squares line fit y ~ intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms = 0.0;
  long points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ospline
