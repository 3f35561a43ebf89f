#include "ospline/ortho.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

#include "ospline/quadrature.hpp"

namespace ospline {

namespace {

void check_window(const Partition& p, long i0) {
  const int k = p.order();
  const int n = p.count();
  if (p.is_periodic()) {
    if (n < 2 * k)
      throw std::invalid_argument(
          "periodic insertion window needs count() >= 2k");
    if (i0 < 0 || i0 >= n)
      throw std::invalid_argument("insertion index outside the partition");
  } else {
    if (i0 < 0 || i0 >= n)
      throw std::invalid_argument("insertion index outside the interior range");
  }
}

}  // namespace

std::vector<double> alpha_closed_form(const Partition& p, long i0) {
  check_window(p, i0);
  const int k = p.order();
  std::vector<double> alpha(static_cast<std::size_t>(k) + 1);
  const double t0 = p.knot(i0);
  for (int r = 0; r <= k; ++r) {
    const long j = i0 - k + r;
    double v = (r % 2 == 0) ? 1.0 : -1.0;
    for (long l = i0 - k + 1; l < j; ++l)
      v *= (t0 - p.knot(l)) / (p.knot(l + k) - p.knot(l));
    for (long l = j + 1; l < i0; ++l)
      v *= (p.knot(l + k) - t0) / (p.knot(l + k) - p.knot(l));
    alpha[static_cast<std::size_t>(r)] = v;
  }
  return alpha;
}

std::vector<double> alpha_recursion(const Partition& p, long i0) {
  check_window(p, i0);
  const int k = p.order();
  std::vector<double> alpha(static_cast<std::size_t>(k) + 1);
  double start = 1.0;
  for (long l = i0 - k + 1; l < i0; ++l)
    start *= (p.knot(l + k) - p.knot(i0)) / (p.knot(l + k) - p.knot(l));
  alpha[0] = start;
  for (int r = 0; r < k; ++r) {
    const long i = i0 - k + r;
    const double a = (p.knot(i + k + 1) - p.knot(i0)) / (p.knot(i + k + 1) - p.knot(i + 1));
    const double b = (p.knot(i0) - p.knot(i)) / (p.knot(i + k) - p.knot(i));
    if (a == 0.0)
      throw std::logic_error("insertion convention puts knot(i0+1) above knot(i0)");
    alpha[static_cast<std::size_t>(r) + 1] = -alpha[static_cast<std::size_t>(r)] * b / a;
  }
  return alpha;
}

std::vector<double> alpha_window(const OrthoFunction& f) {
  const Partition& p = *f.partition;
  const int k = p.order();
  std::vector<double> out(static_cast<std::size_t>(k) + 1);
  for (int r = 0; r <= k; ++r) {
    long j = f.i0 - k + r;
    if (p.is_periodic()) j = periodic_mod(j, p.count());
    out[static_cast<std::size_t>(r)] = f.alpha[static_cast<std::size_t>(j - p.first_index())];
  }
  return out;
}

namespace {

OrthoFunction build_from_window(const GramSystem& gram, long i0) {
  const std::shared_ptr<const Partition>& p = gram.partition_ptr();
  const int k = p->order();
  const int dim = gram.dimension();
  OrthoFunction f;
  f.index_n = dim;
  f.i0 = i0;
  f.partition = p;
  const std::vector<double> win = alpha_closed_form(*p, i0);
  f.alpha.assign(static_cast<std::size_t>(dim), 0.0);
  for (int r = 0; r <= k; ++r) {
    long j = i0 - k + r;
    if (p->is_periodic()) j = periodic_mod(j, p->count());
    f.alpha[static_cast<std::size_t>(j - p->first_index())] = win[static_cast<std::size_t>(r)];
  }
  f.w = gram.solve(f.alpha);
  double nrm2 = 0.0;
  for (int r = 0; r < dim; ++r)
    nrm2 += f.w[static_cast<std::size_t>(r)] * f.alpha[static_cast<std::size_t>(r)];
  if (!(nrm2 > 0.0)) throw std::logic_error("orthogonal direction has zero norm");
  f.norm2 = std::sqrt(nrm2);
  f.J = characteristic_interval(*p, i0, win);
  return f;
}

}  // namespace

OrthoFunction build_g(const GramSystem& gram, long i0) {
  if (gram.partition().is_periodic())
    throw std::invalid_argument("build_g expects a clamped partition");
  return build_from_window(gram, i0);
}

OrthoFunction build_g(std::shared_ptr<const Partition> p, long i0) {
  return build_g(GramSystem(std::move(p)), i0);
}

OrthoFunction build_g_periodic(const GramSystem& gram, long i0) {
  if (!gram.partition().is_periodic())
    throw std::invalid_argument("build_g_periodic expects a periodic partition");
  return build_from_window(gram, i0);
}

OrthoFunction build_g_periodic(std::shared_ptr<const Partition> p, long i0) {
  return build_g_periodic(GramSystem(std::move(p)), i0);
}

Spline primal_g(const OrthoFunction& f) { return make_primal(f.partition, f.w); }

Spline primal_f(const OrthoFunction& f) {
  std::vector<double> c = f.w;
  for (double& v : c) v /= f.norm2;
  return make_primal(f.partition, c);
}

namespace {

// Symmetric orthonormalization G^{-1/2} of the B-spline basis: invariant
// under eigenvector sign flips, hence fully deterministic.
std::vector<Spline> loewdin_block(const GramSystem& gram) {
  const int dim = gram.dimension();
  const std::vector<double> dense = gram.dense();
  Eigen::MatrixXd G(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      G(r, c) = dense[static_cast<std::size_t>(r) * dim + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of the gram matrix failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("gram matrix is not positive definite");
  const Eigen::MatrixXd S = es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
  std::vector<Spline> block;
  block.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    std::vector<double> coeffs(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) coeffs[static_cast<std::size_t>(r)] = S(r, i);
    block.push_back(make_primal(gram.partition_ptr(), std::move(coeffs)));
  }
  return block;
}

// Unit direction of the one-dimensional orthogonal complement of the coarse
// space, found as the null vector of the coarse-fine cross Gram matrix.
// Covers the periodic steps k+1..2k-1 where the insertion window wraps onto
// itself and the closed form does not apply.
OrthoFunction null_space_step(const GramSystem& gram, const BoehmTable& table,
                              long i0) {
  const std::shared_ptr<const Partition>& p = gram.partition_ptr();
  const int dim = gram.dimension();
  const int cdim = table.coarse_dim;
  Eigen::MatrixXd M(cdim, dim);
  for (int r = 0; r < cdim; ++r) {
    std::vector<double> row(static_cast<std::size_t>(dim), 0.0);
    for (int t = 0; t < table.counts[static_cast<std::size_t>(r)]; ++t) {
      const CoarsenTerm& term = table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
      row[static_cast<std::size_t>(term.index - p->first_index())] += term.weight;
    }
    const std::vector<double> g_row = gram_times(gram, row);
    for (int c = 0; c < dim; ++c) M(r, c) = g_row[static_cast<std::size_t>(c)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  Eigen::VectorXd v = svd.matrixV().col(dim - 1);

  OrthoFunction f;
  f.index_n = dim;
  f.i0 = i0;
  f.partition = p;
  f.w.assign(static_cast<std::size_t>(dim), 0.0);
  for (int r = 0; r < dim; ++r) f.w[static_cast<std::size_t>(r)] = v(r);
  f.alpha = gram_times(gram, f.w);
  // Anchor the sign on the window start, falling back to the largest dual
  // coefficient when that entry degenerates.
  const int k = p->order();
  std::size_t anchor = static_cast<std::size_t>(periodic_mod(i0 - k, dim));
  double amax = 0.0;
  for (double a : f.alpha) amax = std::max(amax, std::abs(a));
  if (std::abs(f.alpha[anchor]) <= 1e-12 * amax) {
    for (std::size_t r = 0; r < f.alpha.size(); ++r)
      if (std::abs(f.alpha[r]) == amax) {
        anchor = r;
        break;
      }
  }
  if (f.alpha[anchor] < 0.0) {
    for (double& x : f.w) x = -x;
    for (double& x : f.alpha) x = -x;
  }
  double nrm2 = 0.0;
  for (int r = 0; r < dim; ++r)
    nrm2 += f.w[static_cast<std::size_t>(r)] * f.alpha[static_cast<std::size_t>(r)];
  if (!(nrm2 > 0.0)) throw std::logic_error("orthogonal direction has zero norm");
  f.norm2 = std::sqrt(nrm2);
  f.J = whole_domain_interval(*p);
  return f;
}

std::shared_ptr<const Partition> make_level(const KnotSequence& seq) {
  return std::make_shared<const Partition>(seq.domain == Domain::torus
                                               ? Partition::periodic(seq)
                                               : Partition::clamped(seq));
}

}  // namespace

std::vector<double> push_to_finest(const OrthoSystem& sys, std::size_t level,
                                   std::vector<double> coeffs) {
  for (std::size_t m = level; m < sys.tables.size(); ++m)
    coeffs = refine_coeffs(sys.tables[m], *sys.levels[m + 1], coeffs);
  return coeffs;
}

Spline finest_spline(const OrthoSystem& sys, int i) {
  return make_primal(sys.finest_level(), sys.finest[static_cast<std::size_t>(i)]);
}

OrthoSystem build_system(const KnotSequence& seq) {
  validate(seq);
  const int k = seq.order;
  const bool torus = seq.domain == Domain::torus;
  const std::size_t start = torus ? static_cast<std::size_t>(k) : 0;
  if (seq.points.size() < start)
    throw std::invalid_argument("torus sequences need at least k points");

  OrthoSystem sys;
  sys.sequence = seq;
  KnotSequence prefix{seq.domain, k, {seq.points.begin(), seq.points.begin() + static_cast<std::ptrdiff_t>(start)}};
  sys.levels.push_back(make_level(prefix));
  {
    GramSystem g0(sys.levels.front());
    sys.initial_block = loewdin_block(g0);
  }

  for (std::size_t m = start; m < seq.points.size(); ++m) {
    const InsertResult ins = insert_point(prefix, seq.points[m]);
    prefix = ins.sequence;
    sys.levels.push_back(make_level(prefix));
    const std::shared_ptr<const Partition>& fine = sys.levels.back();
    sys.tables.push_back(boehm_coarsen(*fine, ins.position));
    GramSystem gram(fine);
    OrthoFunction f = (torus && fine->count() < 2 * k)
                          ? null_space_step(gram, sys.tables.back(), ins.position)
                          : build_from_window(gram, ins.position);
    f.index_n = static_cast<int>(sys.initial_block.size() + sys.functions.size()) + 1;
    sys.functions.push_back(std::move(f));
  }

  sys.finest_gram = std::make_shared<const GramSystem>(sys.levels.back());
  for (const Spline& s : sys.initial_block)
    sys.finest.push_back(push_to_finest(sys, 0, s.coeffs));
  for (std::size_t m = 0; m < sys.functions.size(); ++m) {
    std::vector<double> c = sys.functions[m].w;
    for (double& v : c) v /= sys.functions[m].norm2;
    sys.finest.push_back(push_to_finest(sys, m + 1, std::move(c)));
  }
  return sys;
}

OrthoSystem gram_schmidt_oracle(const KnotSequence& seq) {
  validate(seq);
  const int k = seq.order;
  const bool torus = seq.domain == Domain::torus;
  const std::size_t start = torus ? static_cast<std::size_t>(k) : 0;
  if (seq.points.size() < start)
    throw std::invalid_argument("torus sequences need at least k points");

  OrthoSystem sys;
  sys.sequence = seq;
  KnotSequence prefix{seq.domain, k, {seq.points.begin(), seq.points.begin() + static_cast<std::ptrdiff_t>(start)}};
  sys.levels.push_back(make_level(prefix));
  std::vector<long> positions;
  for (std::size_t m = start; m < seq.points.size(); ++m) {
    const InsertResult ins = insert_point(prefix, seq.points[m]);
    prefix = ins.sequence;
    sys.levels.push_back(make_level(prefix));
    sys.tables.push_back(boehm_coarsen(*sys.levels.back(), ins.position));
    positions.push_back(ins.position);
  }
  const std::shared_ptr<const Partition>& fine = sys.levels.back();
  if (fine->dimension() > 200)
    throw std::invalid_argument("the oracle construction is capped at dimension 200");
  sys.finest_gram = std::make_shared<const GramSystem>(fine);
  const GramSystem& gram = *sys.finest_gram;

  {
    GramSystem g0(sys.levels.front());
    sys.initial_block = loewdin_block(g0);
  }
  for (const Spline& s : sys.initial_block)
    sys.finest.push_back(push_to_finest(sys, 0, s.coeffs));

  for (std::size_t m = 0; m < sys.tables.size(); ++m) {
    const std::shared_ptr<const Partition>& level = sys.levels[m + 1];
    std::vector<double> v(static_cast<std::size_t>(level->dimension()), 0.0);
    v[static_cast<std::size_t>(positions[m] - level->first_index())] = 1.0;
    v = push_to_finest(sys, m + 1, std::move(v));
    for (int sweep = 0; sweep < 2; ++sweep)
      for (const std::vector<double>& u : sys.finest) {
        const double c = gram_dot(gram, v, u);
        for (std::size_t r = 0; r < v.size(); ++r) v[r] -= c * u[r];
      }
    const double nrm = std::sqrt(gram_dot(gram, v, v));
    double defect = 0.0;
    for (const std::vector<double>& u : sys.finest)
      defect = std::max(defect, std::abs(gram_dot(gram, v, u)));
    if (!(nrm > 0.0) || defect > 1e-8 * nrm)
      throw std::runtime_error("orthogonality loss beyond 1e-8 in the oracle");
    for (double& x : v) x /= nrm;
    sys.finest.push_back(std::move(v));
  }
  return sys;
}

double max_orthonormality_defect(const OrthoSystem& sys) {
  const GramSystem& gram = *sys.finest_gram;
  const int n = sys.size();
  double worst = 0.0;
  std::vector<std::vector<double>> gf;
  gf.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    gf.push_back(gram_times(gram, sys.finest[static_cast<std::size_t>(i)]));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double dot = 0.0;
      const std::vector<double>& a = sys.finest[static_cast<std::size_t>(i)];
      const std::vector<double>& b = gf[static_cast<std::size_t>(j)];
      for (std::size_t r = 0; r < a.size(); ++r) dot += a[r] * b[r];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

ComparisonReport compare_periodic_nonperiodic(
    std::shared_ptr<const Partition> periodic, long i0) {
  if (!periodic || !periodic->is_periodic())
    throw std::invalid_argument("comparison starts from a periodic partition");
  const int k = periodic->order();
  const int n = periodic->count();
  if (n < 2 * k + 2)
    throw std::invalid_argument("comparison needs count() >= 2k+2");

  const MaximalSplitting split = maximal_splitting(*periodic);
  const auto clamped = std::make_shared<const Partition>(split.clamped);
  const long i0c = periodic_mod(i0 - split.shift, n);

  const GramSystem gram_hat(periodic);
  const GramSystem gram_cl(clamped);
  const OrthoFunction ghat = build_g_periodic(gram_hat, i0);
  const OrthoFunction g = build_g(gram_cl, i0c);

  ComparisonReport rep;
  rep.g_norm2 = g.norm2;
  rep.ratio_J = g.J.J.length / ghat.J.J.length;

  // c from the dual coefficients on the window, away from the boundary
  // blocks.  Off the window both sides vanish identically.
  const std::vector<double> win = alpha_window(g);
  const std::vector<double> win_hat = alpha_window(ghat);
  double best = 0.0;
  double c = 0.0;
  for (int r = 0; r <= k; ++r) {
    const long j = i0c - k + r;
    if (j < 0 || j >= n - k) continue;
    if (std::abs(win_hat[static_cast<std::size_t>(r)]) > best) {
      best = std::abs(win_hat[static_cast<std::size_t>(r)]);
      c = win[static_cast<std::size_t>(r)] / win_hat[static_cast<std::size_t>(r)];
    }
  }
  if (!(best > 0.0)) throw std::logic_error("insertion window misses the interior");
  rep.c = c;
  for (int r = 0; r <= k; ++r) {
    const long j = i0c - k + r;
    if (j < 0 || j >= n - k) continue;
    if (win_hat[static_cast<std::size_t>(r)] == 0.0) continue;
    const double ratio = win[static_cast<std::size_t>(r)] / win_hat[static_cast<std::size_t>(r)];
    rep.c_spread = std::max(rep.c_spread, std::abs(ratio - c) / std::abs(c));
  }

  // beta_j = <g - c*ghat, N_j> over the clamped basis; the periodic function
  // is evaluated through the rotation of the splitting.  Products of two
  // splines are polynomials of degree 2k-2 per grid piece, so k Gauss nodes
  // are exact.
  const Spline ghat_primal = primal_g(ghat);
  const QuadRule& rule = gauss_rule(k);
  std::vector<double> m_hat(static_cast<std::size_t>(n + k), 0.0);
  const std::vector<double> bp = breakpoints(*clamped);
  for (std::size_t piece = 0; piece + 1 < bp.size(); ++piece) {
    const double mid = 0.5 * (bp[piece] + bp[piece + 1]);
    const double hal = 0.5 * (bp[piece + 1] - bp[piece]);
    for (std::size_t q = 0; q < rule.node.size(); ++q) {
      const double x = mid + hal * rule.node[q];
      const double wq = hal * rule.weight[q];
      const double gh = eval(ghat_primal, x + split.rotation);
      const LocalBasis lb = eval_basis_local(*clamped, x);
      for (int t = 0; t < lb.count; ++t)
        m_hat[static_cast<std::size_t>(lb.first + t + k)] += wq * gh * lb.value[static_cast<std::size_t>(t)];
    }
  }
  for (long j = -k; j < n; ++j) {
    const double beta = g.alpha[static_cast<std::size_t>(j + k)] - c * m_hat[static_cast<std::size_t>(j + k)];
    const bool in_b = j < 0 || j >= n - k;
    if (in_b) {
      rep.boundary.push_back(j);
      rep.beta.push_back(beta);
      rep.max_beta = std::max(rep.max_beta, std::abs(beta));
    } else {
      rep.max_offB_residual = std::max(rep.max_offB_residual, std::abs(beta));
    }
  }
  return rep;
}

}  // namespace ospline
