#include "ospline/gram.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ospline/quadrature.hpp"

namespace ospline {

namespace {

constexpr double kEntryFloor = 1e-14;  // relative cutoff for decay fits

std::vector<std::pair<double, double>> grid_pieces(const Partition& p) {
  std::vector<std::pair<double, double>> out;
  const std::vector<double> b = breakpoints(p);
  if (!p.is_periodic()) {
    for (std::size_t j = 0; j + 1 < b.size(); ++j) out.emplace_back(b[j], b[j + 1]);
  } else {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double hi = (j + 1 < b.size()) ? b[j + 1] : b[0] + 1.0;
      out.emplace_back(b[j], hi);
    }
  }
  return out;
}

}  // namespace

int GramSystem::storage_of(long i) const {
  if (p_->is_periodic()) return static_cast<int>(periodic_mod(i, dim_));
  const long s = i - p_->first_index();
  if (s < 0 || s >= dim_) throw std::out_of_range("basis index out of range");
  return static_cast<int>(s);
}

GramSystem::GramSystem(std::shared_ptr<const Partition> p) : p_(std::move(p)) {
  const int k = p_->order();
  if (p_->is_periodic() && p_->count() < k)
    throw std::invalid_argument("periodic gram needs at least k points");
  dim_ = p_->dimension();
  // On small circles every pair of basis functions interacts; the band then
  // covers all cyclic offsets up to dim/2 and lookups canonicalize the
  // direction.
  band_ = p_->is_periodic() ? std::min(k - 1, dim_ / 2) : k - 1;
  build();
  factor();
  inv_cols_.resize(static_cast<std::size_t>(dim_));
  inv_ready_.assign(static_cast<std::size_t>(dim_), 0);
}

void GramSystem::build() {
  const int k = p_->order();
  const bool torus = p_->is_periodic();
  a_.assign(static_cast<std::size_t>(dim_) * (band_ + 1), 0.0);
  const QuadRule& rule = gauss_rule(k);
  auto add = [&](int r, int c, double v) {
    // Store each unordered pair once in the upper band relative to r; cyclic
    // offsets take the shorter direction, ties the smaller row.
    int d;
    if (torus) {
      d = static_cast<int>(periodic_mod(c - r, dim_));
      if (2 * d > dim_) {
        std::swap(r, c);
        d = dim_ - d;
      } else if (2 * d == dim_ && c < r) {
        std::swap(r, c);
      }
      if (d > band_) throw std::logic_error("pair outside gram band");
    } else {
      if (c < r) std::swap(r, c);
      d = c - r;
      if (d > band_) throw std::logic_error("pair outside gram band");
    }
    a_[static_cast<std::size_t>(r) * (band_ + 1) + d] += v;
  };
  for (const auto& [lo, hi] : grid_pieces(*p_)) {
    const double mid = 0.5 * (lo + hi);
    const double hal = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < rule.node.size(); ++q) {
      const double x = mid + hal * rule.node[q];
      const double wq = rule.weight[q] * hal;
      const LocalBasis lb = eval_basis_local(*p_, x);
      for (int r = 0; r < lb.count; ++r) {
        const int ir = storage_of(lb.first + r);
        for (int s = r; s < lb.count; ++s) {
          const int is = storage_of(lb.first + s);
          const double v = wq * lb.value[static_cast<std::size_t>(r)] *
                           lb.value[static_cast<std::size_t>(s)];
          if (v == 0.0) continue;
          add(ir, is, v);
        }
      }
    }
  }
}

double GramSystem::entry(long i, long j) const {
  int r = storage_of(i);
  int c = storage_of(j);
  int d;
  if (p_->is_periodic()) {
    d = static_cast<int>(periodic_mod(c - r, dim_));
    if (2 * d > dim_) {
      std::swap(r, c);
      d = dim_ - d;
    } else if (2 * d == dim_ && c < r) {
      std::swap(r, c);
    }
  } else {
    if (c < r) std::swap(r, c);
    d = c - r;
  }
  if (d > band_) return 0.0;
  return a_[static_cast<std::size_t>(r) * (band_ + 1) + d];
}

void GramSystem::factor() {
  const int w = band_;
  const int k = p_->order();
  const bool torus = p_->is_periodic();
  dense_mode_ = torus && dim_ < 4 * k;
  if (dense_mode_) {
    Eigen::MatrixXd A(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        A(i, j) = entry(i + p_->first_index(), j + p_->first_index());
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("gram matrix is not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    dense_fact_.assign(L.data(), L.data() + dim_ * dim_);
    interior_ = 0;
    return;
  }

  interior_ = torus ? dim_ - w : dim_;
  // Banded Cholesky of the leading interior block: L[i][i-d], d = 0..w.
  l_.assign(static_cast<std::size_t>(interior_) * (w + 1), 0.0);
  auto aband = [&](int i, int j) -> double {  // i >= j, within interior
    const int d = i - j;
    if (d > w) return 0.0;
    return a_[static_cast<std::size_t>(j) * (w + 1) + d];
  };
  auto lref = [&](int i, int j) -> double& {
    return l_[static_cast<std::size_t>(i) * (w + 1) + (i - j)];
  };
  for (int j = 0; j < interior_; ++j) {
    double diag = aband(j, j);
    for (int m = std::max(0, j - w); m < j; ++m) diag -= lref(j, m) * lref(j, m);
    if (!(diag > 0.0))
      throw std::runtime_error("gram matrix is not positive definite");
    lref(j, j) = std::sqrt(diag);
    for (int i = j + 1; i <= std::min(j + w, interior_ - 1); ++i) {
      double v = aband(i, j);
      for (int m = std::max(0, i - w); m < j; ++m) v -= lref(i, m) * lref(j, m);
      lref(i, j) = v / lref(j, j);
    }
  }
  if (!torus || w == 0) return;

  // Border block: the trailing w rows couple through the band and the
  // wrap-around corner.  a12_(i, c) = A[i, interior_+c].
  a12_.assign(static_cast<std::size_t>(interior_) * w, 0.0);
  for (int c = 0; c < w; ++c) {
    const int col = interior_ + c;
    for (int i = 0; i < interior_; ++i) {
      const int fwd = static_cast<int>(periodic_mod(col - i, dim_));
      const int bwd = static_cast<int>(periodic_mod(i - col, dim_));
      double v = 0.0;
      if (fwd <= w)
        v = a_[static_cast<std::size_t>(i) * (w + 1) + fwd];
      else if (bwd <= w)
        v = a_[static_cast<std::size_t>(col) * (w + 1) + bwd];
      a12_[static_cast<std::size_t>(i) * w + c] = v;
    }
  }
  // x12_ = A11^{-1} A12 column by column through the banded factors.
  x12_.assign(a12_.begin(), a12_.end());
  auto solve_inplace = [&](double* v) {
    for (int i = 0; i < interior_; ++i) {
      double s = v[i];
      for (int m = std::max(0, i - w); m < i; ++m) s -= lref(i, m) * v[m];
      v[i] = s / lref(i, i);
    }
    for (int i = interior_ - 1; i >= 0; --i) {
      double s = v[i];
      for (int m = i + 1; m <= std::min(i + w, interior_ - 1); ++m)
        s -= lref(m, i) * v[m];
      v[i] = s / lref(i, i);
    }
  };
  std::vector<double> col(static_cast<std::size_t>(interior_));
  for (int c = 0; c < w; ++c) {
    for (int i = 0; i < interior_; ++i) col[static_cast<std::size_t>(i)] =
        x12_[static_cast<std::size_t>(i) * w + c];
    solve_inplace(col.data());
    for (int i = 0; i < interior_; ++i)
      x12_[static_cast<std::size_t>(i) * w + c] = col[static_cast<std::size_t>(i)];
  }
  // Schur complement S = A22 - A21 X, factored densely.
  Eigen::MatrixXd S(w, w);
  for (int r = 0; r < w; ++r)
    for (int c = 0; c < w; ++c) {
      const long ir = interior_ + r;
      const long ic = interior_ + c;
      double v = entry(ir + p_->first_index(), ic + p_->first_index());
      for (int i = 0; i < interior_; ++i)
        v -= a12_[static_cast<std::size_t>(i) * w + r] *
             x12_[static_cast<std::size_t>(i) * w + c];
      S(r, c) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gram border block is not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  schur_.assign(L.data(), L.data() + w * w);
}

std::vector<double> GramSystem::solve(const std::vector<double>& b) const {
  if (static_cast<int>(b.size()) != dim_)
    throw std::invalid_argument("rhs size does not match dimension");
  const int w = band_;
  if (dense_mode_) {
    // Forward/backward with the dense Cholesky factor (column-major L).
    std::vector<double> x(b);
    auto L = [&](int i, int j) {
      return dense_fact_[static_cast<std::size_t>(j) * dim_ + i];
    };
    for (int i = 0; i < dim_; ++i) {
      double s = x[static_cast<std::size_t>(i)];
      for (int j = 0; j < i; ++j) s -= L(i, j) * x[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(i)] = s / L(i, i);
    }
    for (int i = dim_ - 1; i >= 0; --i) {
      double s = x[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < dim_; ++j) s -= L(j, i) * x[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(i)] = s / L(i, i);
    }
    return x;
  }
  auto lref = [&](int i, int j) -> double {
    return l_[static_cast<std::size_t>(i) * (w + 1) + (i - j)];
  };
  auto band_solve = [&](std::vector<double>& v) {
    for (int i = 0; i < interior_; ++i) {
      double s = v[static_cast<std::size_t>(i)];
      for (int m = std::max(0, i - w); m < i; ++m)
        s -= lref(i, m) * v[static_cast<std::size_t>(m)];
      v[static_cast<std::size_t>(i)] = s / lref(i, i);
    }
    for (int i = interior_ - 1; i >= 0; --i) {
      double s = v[static_cast<std::size_t>(i)];
      for (int m = i + 1; m <= std::min(i + w, interior_ - 1); ++m)
        s -= lref(m, i) * v[static_cast<std::size_t>(m)];
      v[static_cast<std::size_t>(i)] = s / lref(i, i);
    }
  };
  if (!p_->is_periodic() || w == 0 || interior_ == dim_) {
    std::vector<double> x(b);
    band_solve(x);
    return x;
  }
  // Bordered solve: x1' = A11^{-1} b1, x2 = S^{-1}(b2 - A21 x1'),
  // x1 = x1' - X x2.
  std::vector<double> x1(b.begin(), b.begin() + interior_);
  band_solve(x1);
  std::vector<double> rhs2(static_cast<std::size_t>(w));
  for (int r = 0; r < w; ++r) {
    double s = b[static_cast<std::size_t>(interior_ + r)];
    for (int i = 0; i < interior_; ++i)
      s -= a12_[static_cast<std::size_t>(i) * w + r] * x1[static_cast<std::size_t>(i)];
    rhs2[static_cast<std::size_t>(r)] = s;
  }
  auto Ls = [&](int i, int j) {
    return schur_[static_cast<std::size_t>(j) * w + i];
  };
  for (int i = 0; i < w; ++i) {
    double s = rhs2[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) s -= Ls(i, j) * rhs2[static_cast<std::size_t>(j)];
    rhs2[static_cast<std::size_t>(i)] = s / Ls(i, i);
  }
  for (int i = w - 1; i >= 0; --i) {
    double s = rhs2[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < w; ++j) s -= Ls(j, i) * rhs2[static_cast<std::size_t>(j)];
    rhs2[static_cast<std::size_t>(i)] = s / Ls(i, i);
  }
  std::vector<double> x(static_cast<std::size_t>(dim_));
  for (int i = 0; i < interior_; ++i) {
    double s = x1[static_cast<std::size_t>(i)];
    for (int c = 0; c < w; ++c)
      s -= x12_[static_cast<std::size_t>(i) * w + c] * rhs2[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(i)] = s;
  }
  for (int c = 0; c < w; ++c) x[static_cast<std::size_t>(interior_ + c)] =
      rhs2[static_cast<std::size_t>(c)];
  return x;
}

const std::vector<double>& GramSystem::inverse_column(int j) const {
  std::lock_guard<std::mutex> lock(cache_mu_);
  if (!inv_ready_[static_cast<std::size_t>(j)]) {
    std::vector<double> e(static_cast<std::size_t>(dim_), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    inv_cols_[static_cast<std::size_t>(j)] = solve(e);
    inv_ready_[static_cast<std::size_t>(j)] = 1;
  }
  return inv_cols_[static_cast<std::size_t>(j)];
}

double GramSystem::inverse_entry(long i, long j) const {
  const int r = storage_of(i);
  const int c = storage_of(j);
  return inverse_column(c)[static_cast<std::size_t>(r)];
}

Spline GramSystem::dual_to_primal(const Spline& dual) const {
  if (dual.repr != Spline::Repr::dual)
    throw std::invalid_argument("dual_to_primal expects a dual spline");
  if (dual.partition->storage() != p_->storage() ||
      dual.partition->order() != p_->order() ||
      dual.partition->kind() != p_->kind())
    throw std::invalid_argument("spline partition does not match gram system");
  return make_primal(p_, solve(dual.coeffs));
}

Spline GramSystem::project(const std::function<double(double)>& h,
                           bool* converged) const {
  bool ok = true;
  std::vector<double> rhs(static_cast<std::size_t>(dim_), 0.0);
  for (const auto& [lo, hi] : grid_pieces(*p_)) {
    // One adaptive pass per basis function overlapping the piece.
    const LocalBasis probe = eval_basis_local(*p_, 0.5 * (lo + hi));
    for (int r = 0; r < probe.count; ++r) {
      const long idx = probe.first + r;
      auto fn = [&](double x) { return h(x) * eval_basis(*p_, idx, x); };
      const AdaptiveResult res = adaptive_integrate(fn, lo, hi, 1e-10, 20);
      ok = ok && res.converged;
      rhs[static_cast<std::size_t>(storage_of(idx))] += res.value;
    }
  }
  if (converged) *converged = ok;
  return make_primal(p_, solve(rhs));
}

namespace {

// Integral of |s| over [lo, hi]: isolate the sign changes of the local
// polynomial by sampling, bisect each bracket to 1e-12, then integrate each
// signed subpiece exactly.
double abs_integral_piece(const Spline& s, double lo, double hi) {
  const int k = s.partition->order();
  const int probes = 4 * k + 4;
  std::vector<double> cuts{lo};
  double px = lo;
  double pv = eval(s, lo);
  for (int i = 1; i <= probes; ++i) {
    const double x = lo + (hi - lo) * i / probes;
    const double v = eval(s, x);
    if (v == 0.0) {
      // Probe landed on a root; cut there so neighbours integrate signed.
      if (x < hi) cuts.push_back(x);
      px = x;
      pv = v;
      continue;
    }
    if ((pv < 0.0 && v > 0.0) || (pv > 0.0 && v < 0.0)) {
      double a = px, b = x, fa = pv;
      while (b - a > 1e-12) {
        const double m = 0.5 * (a + b);
        const double fm = eval(s, m);
        if ((fa < 0.0 && fm <= 0.0) || (fa > 0.0 && fm >= 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      cuts.push_back(0.5 * (a + b));
    }
    px = x;
    pv = v;
  }
  cuts.push_back(hi);
  double acc = 0.0;
  auto fn = [&](double x) { return eval(s, x); };
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
    acc += std::abs(gauss_integrate(fn, cuts[j], cuts[j + 1], k));
  return acc;
}

}  // namespace

double integral_abs(const Spline& s) {
  if (s.repr != Spline::Repr::primal)
    throw std::invalid_argument("integral_abs expects a primal spline");
  double acc = 0.0;
  for (const auto& [lo, hi] : grid_pieces(*s.partition))
    acc += abs_integral_piece(s, lo, hi);
  return acc;
}

double GramSystem::projection_infinity_norm(int samples_per_interval) const {
  for (int j = 0; j < dim_; ++j) inverse_column(j);
  const auto pieces = grid_pieces(*p_);
  double best = 0.0;
  std::vector<double> d(static_cast<std::size_t>(dim_));
  for (const auto& [lo, hi] : pieces) {
    for (int s = 0; s < samples_per_interval; ++s) {
      const double x = lo + (hi - lo) * (s + 0.5) / samples_per_interval;
      const LocalBasis lb = eval_basis_local(*p_, x);
      std::fill(d.begin(), d.end(), 0.0);
      for (int r = 0; r < lb.count; ++r) {
        const int ir = storage_of(lb.first + r);
        const double nv = lb.value[static_cast<std::size_t>(r)];
        if (nv == 0.0) continue;
        const std::vector<double>& col = inverse_column(ir);
        for (int j = 0; j < dim_; ++j)
          d[static_cast<std::size_t>(j)] += nv * col[static_cast<std::size_t>(j)];
      }
      // Integrate |sum_j d_j N_j(y)| dy.  Pieces where the kernel is below
      // 1e-15 of its peak coefficient are skipped; the reported value is a
      // lower bound of the operator norm either way.
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      const double floor = 1e-15 * dmax;
      const Spline row = make_primal(p_, d);
      double acc = 0.0;
      for (const auto& [plo, phi] : pieces) {
        const LocalBasis mid = eval_basis_local(*p_, 0.5 * (plo + phi));
        double local = 0.0;
        for (int r = 0; r < mid.count; ++r)
          local = std::max(local, std::abs(d[static_cast<std::size_t>(
                                       storage_of(mid.first + r))]));
        if (local <= floor) continue;
        acc += abs_integral_piece(row, plo, phi);
      }
      best = std::max(best, acc);
    }
  }
  return best;
}

DecayFit GramSystem::fit_decay() const {
  const bool torus = p_->is_periodic();
  for (int j = 0; j < dim_; ++j) inverse_column(j);
  double amax = 0.0;
  for (int j = 0; j < dim_; ++j)
    for (int i = 0; i <= j; ++i)
      amax = std::max(amax, std::abs(inverse_column(j)[static_cast<std::size_t>(i)]));
  std::vector<double> xs, ys;
  const long first = p_->first_index();
  for (int cj = 0; cj < dim_; ++cj) {
    const std::vector<double>& col = inverse_column(cj);
    for (int ci = 0; ci <= cj; ++ci) {
      const double a = col[static_cast<std::size_t>(ci)];
      if (std::abs(a) <= kEntryFloor * amax) continue;
      const long i = ci + first;
      const long j = cj + first;
      double dist, den;
      if (torus) {
        dist = periodic_distance(dim_, i, j);
        den = std::max(p_->support(i), p_->support(j));
      } else {
        dist = static_cast<double>(j - i);
        const double lo = std::min(p_->knot(i), p_->knot(j));
        const double hi = std::max(p_->knot(i + p_->order()), p_->knot(j + p_->order()));
        den = hi - lo;
      }
      xs.push_back(dist);
      ys.push_back(std::log(std::abs(a) * den));
    }
  }
  DecayFit out;
  out.points = static_cast<long>(xs.size());
  bool twodist = false;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] != xs[0]) twodist = true;
  if (!twodist) {
    // Diagonal-only data (k = 1): decay is degenerate.
    out.q = 0.0;
    double c = 0.0;
    for (double y : ys) c = std::max(c, std::exp(y));
    out.C = c;
    out.residual = 0.0;
    return out;
  }
  const LineFit lf = fit_line(xs, ys);
  out.C = std::exp(lf.intercept);
  out.q = std::exp(lf.slope);
  out.residual = lf.rms;
  return out;
}

std::vector<double> GramSystem::dense() const {
  std::vector<double> out(static_cast<std::size_t>(dim_) * dim_, 0.0);
  const long first = p_->first_index();
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      out[static_cast<std::size_t>(i) * dim_ + j] = entry(i + first, j + first);
  return out;
}

GramSystem build_gram(std::shared_ptr<const Partition> p) {
  return GramSystem(std::move(p));
}

double inner_product_any(const GramSystem& gram, const Spline& f, const Spline& g) {
  const Spline fp = f.repr == Spline::Repr::dual ? gram.dual_to_primal(f) : f;
  const Spline gp = g.repr == Spline::Repr::dual ? gram.dual_to_primal(g) : g;
  return inner_product(fp, gp);
}

std::vector<double> gram_times(const GramSystem& gram, const std::vector<double>& x) {
  const Partition& p = gram.partition();
  const int dim = gram.dimension();
  if (x.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("gram_times dimension mismatch");
  const long first = p.first_index();
  const int k = p.order();
  std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
  for (int r = 0; r < dim; ++r) {
    const long i = first + r;
    double acc = 0.0;
    if (p.is_periodic() && dim < 2 * k - 1) {
      // Window offsets alias on tiny circles; walk the columns directly.
      for (int c = 0; c < dim; ++c)
        acc += gram.entry(i, c) * x[static_cast<std::size_t>(c)];
    } else {
      for (int d = -(k - 1); d <= k - 1; ++d) {
        long j = i + d;
        if (p.is_periodic())
          j = periodic_mod(j, dim);
        else if (j < first || j >= first + dim)
          continue;
        acc += gram.entry(i, j) * x[static_cast<std::size_t>(j - first)];
      }
    }
    y[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

double gram_dot(const GramSystem& gram, const std::vector<double>& a,
                const std::vector<double>& b) {
  const std::vector<double> gb = gram_times(gram, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * gb[i];
  return acc;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line size mismatch");
  LineFit out;
  out.points = static_cast<long>(x.size());
  if (x.empty()) return out;
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) {
    out.intercept = sy / n;
    out.slope = 0.0;
  } else {
    out.slope = (n * sxy - sx * sy) / det;
    out.intercept = (sy - out.slope * sx) / n;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (out.intercept + out.slope * x[i]);
    rss += e * e;
  }
  out.rms = std::sqrt(rss / n);
  return out;
}

}  // namespace ospline
