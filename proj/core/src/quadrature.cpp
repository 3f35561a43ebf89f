#include "ospline/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ospline {

namespace {

// Newton iteration on Legendre polynomials; standard construction.
QuadRule build_rule(int m) {
  QuadRule r;
  r.node.resize(static_cast<std::size_t>(m));
  r.weight.resize(static_cast<std::size_t>(m));
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double p2 = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      const double dp = m * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        p0 = 1.0;
        p1 = 0.0;
        for (int j = 0; j < m; ++j) {
          p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
        }
        break;
      }
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < m; ++j) {
      p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
    }
    const double dp = m * (x * p0 - p1) / (x * x - 1.0);
    r.node[static_cast<std::size_t>(i)] = -x;
    r.node[static_cast<std::size_t>(m - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weight[static_cast<std::size_t>(i)] = w;
    r.weight[static_cast<std::size_t>(m - 1 - i)] = w;
  }
  if (m % 2 == 1) r.node[static_cast<std::size_t>(m / 2)] = 0.0;
  return r;
}

}  // namespace

const QuadRule& gauss_rule(int m) {
  if (m < 1 || m > 128) throw std::invalid_argument("gauss rule order out of range");
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_rule(m)).first;
  return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int m) {
  const QuadRule& r = gauss_rule(m);
  const double mid = 0.5 * (a + b);
  const double hal = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.node.size(); ++i)
    acc += r.weight[i] * f(mid + hal * r.node[i]);
  return acc * hal;
}

namespace {

void adaptive_rec(const std::function<double(double)>& f, double a, double b,
                  double rel_tol, int depth, int max_depth, AdaptiveResult& out) {
  const double v8 = gauss_integrate(f, a, b, 8);
  const double v16 = gauss_integrate(f, a, b, 16);
  if (depth > out.max_depth) out.max_depth = depth;
  const double scale = std::max(std::abs(v16), 1e-300);
  if (std::abs(v16 - v8) <= rel_tol * scale || depth >= max_depth) {
    if (std::abs(v16 - v8) > rel_tol * scale) out.converged = false;
    out.value += v16;
    return;
  }
  const double mid = 0.5 * (a + b);
  adaptive_rec(f, a, mid, rel_tol, depth + 1, max_depth, out);
  adaptive_rec(f, mid, b, rel_tol, depth + 1, max_depth, out);
}

}  // namespace

AdaptiveResult adaptive_integrate(const std::function<double(double)>& f,
                                  double a, double b, double rel_tol,
                                  int max_depth) {
  AdaptiveResult out;
  if (a == b) return out;
  adaptive_rec(f, a, b, rel_tol, 0, max_depth, out);
  return out;
}

}  // namespace ospline
