#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ospline/bspline.hpp"
#include "ospline/gram.hpp"
#include "ospline/knots.hpp"
#include "ospline/ortho.hpp"

namespace ospline {

/// Function sampled on the partition grid, every knot interval subdivided
/// into m equal cells.  `point` holds the sorted sample points (cell
/// endpoints; on the torus the last cell wraps to point[0]+1), `value` the
/// samples, `mass[i]` the integral of |f| over cell i and `prefix` its
/// running sum.  Suprema and averages over cell-endpoint intervals are
/// computed from these; they are lower bounds of the continuous quantities.
struct GridFunction {
  std::shared_ptr<const Partition> partition;
  bool torus = false;
  std::vector<double> point;
  std::vector<double> value;
  std::vector<double> mass;
  std::vector<double> prefix;

  int cells() const { return static_cast<int>(mass.size()); }
  double cell_left(int i) const { return point[static_cast<std::size_t>(i)]; }
  double cell_right(int i) const {
    return i + 1 < static_cast<int>(point.size())
               ? point[static_cast<std::size_t>(i) + 1]
               : point.front() + 1.0;
  }
  double total_mass() const { return prefix.back(); }
};

/// Cell endpoints of the m-fold subdivided partition grid.
std::vector<double> make_grid(const Partition& p, int m = 8);

/// Samples f on the grid; cell masses of |f| by fixed 4-node Gauss per cell.
GridFunction sample_function(std::shared_ptr<const Partition> p, int m,
                             const std::function<double(double)>& f);

/// Indicator of a union of grid cells; masses are exact.
GridFunction indicator_function(std::shared_ptr<const Partition> p, int m,
                                const std::vector<char>& cell_set);

/// Integral of |f| over a sub-arc, from the prefix sums (cell resolution:
/// the arc is clipped to whole cells; exact when the arc ends on grid
/// points).
double grid_integral(const GridFunction& g, std::optional<Arc> sub = {});

/// Trapezoid L2 norm of the sampled values.
double grid_l2(const GridFunction& g);

/// Finitely supported coefficient vector over a built system.  Non-owning.
struct Expansion {
  const OrthoSystem* system = nullptr;
  std::vector<double> coeffs;
};

Expansion make_expansion(const OrthoSystem& sys, std::vector<double> coeffs);

/// Evaluates every system function at one point in O(size * k).
class SystemEvaluator {
 public:
  explicit SystemEvaluator(const OrthoSystem& sys) : sys_(&sys) {}
  void eval_all(double x, std::vector<double>& out) const;
  double eval_one(int n, double x) const;
  const OrthoSystem& system() const { return *sys_; }

 private:
  const OrthoSystem* sys_;
};

/// The expansion synthesized pointwise: f = sum a_n f_n.
GridFunction synthesize(const Expansion& e, int m = 8);

/// Square function Sf = (sum_n (a_n f_n)^2)^{1/2}; invariant under sign
/// flips of the coefficients by construction.
GridFunction square_function(const Expansion& e, int m = 8);

/// Mf = max over prefixes m of |sum_{n<=m} a_n f_n|, per grid point.
GridFunction maximal_partial_sum(const Expansion& e, int m = 8);

/// Hardy-Littlewood maximal function over cell-endpoint intervals: at each
/// grid point the best average of |g| over intervals with endpoints on the
/// grid containing it.  One-sided scans suffice because an interval average
/// never exceeds the better of its two halves.  O(G^2).
GridFunction hardy_littlewood(const GridFunction& g);

/// Level sets of a square function at cell resolution: a cell belongs to
/// E when Sf > lambda at both endpoints, B collects the cells where the
/// maximal function of the E indicator stays above r at both endpoints.
struct LevelSets {
  double lambda = 0.0;
  double r = 0.0;
  std::vector<char> e_cells;
  std::vector<char> b_cells;
  double e_measure = 0.0;
  double b_measure = 0.0;
  bool inclusion = false;  ///< every E cell is a B cell
};

LevelSets level_sets(const GridFunction& sf, double lambda, double r);

/// Pointwise ratio sup of a numerator grid function against a maximal
/// function, skipping points where the denominator is below
/// 1e-12 * max(numerator).
struct DominationReport {
  double ratio = 0.0;
  long points_used = 0;
  long points_skipped = 0;
};

/// sup_t Mf(t) / (HL f)(t): partial-sum maximal function against the
/// Hardy-Littlewood one.
DominationReport domination_partial_sum(const Expansion& e, int m = 8);

/// sup_t |Ph(t)| / (HL h)(t) for the orthogonal projection P onto the
/// spline space of the gram system.
DominationReport domination_projection(const GramSystem& gram,
                                       const std::function<double(double)>& h,
                                       int m = 8);

/// Measure of {x in [a,b] : |p(x)| >= 8^{1-k} * sup |p|} by root isolation
/// of the shifted polynomial; pass means measure >= (b-a)/2 - 1e-12.
struct RemezResult {
  double sup = 0.0;
  double threshold = 0.0;
  double measure = 0.0;
  bool pass = false;
};

/// Monomial coefficients, ascending order, at most k entries.
RemezResult remez_check(const std::vector<double>& poly, double a, double b,
                        int k);

/// Tail mass against the interior square function: integral over the
/// complement of V of sum_{j in Gamma} |a_j f_j| versus the integral over V
/// of the Gamma-restricted square function, Gamma = {n >= n_min : J_n
/// inside V}.
struct TailRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  long terms = 0;
};

TailRatio tail_mass_ratio(const Expansion& e, const Arc& v, int n_min,
                          int m = 8);

/// Level-set mass transfer: with E and B from level_sets of the square
/// function, restrict to Lambda = {n >= n_min : J_n not inside B} and
/// compare the Lambda square function mass on E against its complement.
struct LevelRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double e_measure = 0.0;
  long terms = 0;
};

LevelRatio level_mass_ratio(const Expansion& e, double lambda, double r,
                            int n_min, int m = 8);

/// Weighted coefficient sum for expansions supported inside v: for each R,
/// lhs(R) = sum_{n >= n_min} R^{p.dist_n(v)} |a_n|^p ||f_n||^p over the
/// complement of the tripled arc; rhs = ||f||_p^p.
struct SupportSweepEntry {
  double R = 0.0;
  double lhs = 0.0;
  double ratio = 0.0;
};

struct SupportReport {
  double rhs = 0.0;
  long terms = 0;
  std::vector<SupportSweepEntry> sweep;
};

SupportReport support_sweep(const OrthoSystem& sys, const Spline& f,
                            const Arc& v, double p,
                            const std::vector<double>& radii, int n_min);

/// Residual of the vanishing-moment identity: the degree-k Legendre bump on
/// v pairs to zero with every system function whose own partition keeps no
/// knot inside the open arc v.  Returns the largest observed |<g_v, f_n>|.
double vanishing_moment_residual(const OrthoSystem& sys, const Arc& v);

}  // namespace ospline
