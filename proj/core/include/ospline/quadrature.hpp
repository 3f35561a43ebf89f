#pragma once

#include <functional>
#include <vector>

namespace ospline {

/// Gauss-Legendre rule on [-1, 1]: m nodes integrate polynomials up to
/// degree 2m-1 exactly.
struct QuadRule {
  std::vector<double> node;
  std::vector<double> weight;
};

/// Cached rule with m nodes.  Thread-safe; rules are immutable once built.
const QuadRule& gauss_rule(int m);

/// Integral of f over [a, b] with an m-node Gauss rule.
double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int m);

struct AdaptiveResult {
  double value = 0.0;
  bool converged = true;
  int max_depth = 0;
};

/// Adaptive integral of f over [a, b]: an interval is accepted when the
/// 8-node and 16-node Gauss results differ by less than rel_tol relatively,
/// otherwise it is halved, up to max_depth levels.
AdaptiveResult adaptive_integrate(const std::function<double(double)>& f,
                                  double a, double b, double rel_tol = 1e-10,
                                  int max_depth = 20);

}  // namespace ospline
