#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ospline/bspline.hpp"
#include "ospline/generators.hpp"
#include "ospline/knots.hpp"

using namespace ospline;

namespace {

std::shared_ptr<const Partition> share(Partition p) {
  return std::make_shared<const Partition>(std::move(p));
}

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("order one basis is an indicator") {
  Partition whole = Partition::clamped_from_sorted({}, 1);
  CHECK(whole.dimension() == 1);
  CHECK(eval_basis(whole, -1, 0.0) == 1.0);
  CHECK(eval_basis(whole, -1, 0.5) == 1.0);
  CHECK(eval_basis(whole, -1, 1.0) == 1.0);

  Partition split = Partition::clamped_from_sorted({0.5}, 1);
  CHECK(eval_basis(split, 0, 0.5) == 1.0);  // right continuous at the knot
  CHECK(eval_basis(split, -1, 0.5) == 0.0);
  CHECK(eval_basis(split, -1, 0.25) == 1.0);
  CHECK(eval_basis(split, 0, 1.0) == 1.0);  // left limit at the domain end
}

TEST_CASE("order two hat values") {
  Partition p = Partition::clamped_from_sorted({0.5}, 2);
  CHECK(eval_basis(p, -2, 0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_basis(p, -1, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  Spline hat = make_primal(share(p), {0.0, 1.0, 0.0});
  CHECK(lp_norm(hat, inf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partition of unity across orders and domains") {
  for (int k = 1; k <= 6; ++k) {
    for (bool torus : {false, true}) {
      Partition p = random_partition(11 + k, k, 17 * k + torus, torus, true);
      const long lo = p.first_index();
      const long hi = lo + p.dimension();
      for (int s = 0; s <= 200; ++s) {
        const double x = torus ? s / 201.0 : s / 200.0;
        double sum = 0.0;
        for (long i = lo; i < hi; ++i) sum += eval_basis(p, i, x);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("evaluation matches the divided-difference reference") {
  Rng rng(31);
  for (int k : {2, 3, 4, 5}) {
    for (bool torus : {false, true}) {
      Partition p = random_partition(10 + k, k, 23 * k + torus, torus, true);
      const long lo = p.first_index();
      for (int trial = 0; trial < 60; ++trial) {
        const double x = rng.uniform();
        const long i = lo + rng.index(p.dimension());
        CHECK(eval_basis(p, i, x) ==
              doctest::Approx(oracle::basis_ref(p, i, x)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("local evaluation agrees with single-index evaluation") {
  Rng rng(77);
  for (bool torus : {false, true}) {
    Partition p = random_partition(12, 3, 5 + torus, torus);
    for (int trial = 0; trial < 40; ++trial) {
      const double x = rng.uniform();
      LocalBasis lb = eval_basis_local(p, x);
      CHECK(lb.count <= p.order());
      double sum = 0.0;
      for (int r = 0; r < lb.count; ++r) {
        CHECK(lb.value[static_cast<std::size_t>(r)] ==
              doctest::Approx(eval_basis(p, lb.first + r, x)).epsilon(1e-14));
        sum += lb.value[static_cast<std::size_t>(r)];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("spline evaluation is the coefficient combination") {
  Rng rng(13);
  for (bool torus : {false, true}) {
    auto p = share(random_partition(9, 4, 3 + torus, torus));
    std::vector<double> c(static_cast<std::size_t>(p->dimension()));
    for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
    Spline f = make_primal(p, c);
    for (int trial = 0; trial < 30; ++trial) {
      const double x = rng.uniform();
      double sum = 0.0;
      for (long i = p->first_index(); i < p->first_index() + p->dimension(); ++i)
        sum += f.at(i) * eval_basis(*p, i, x);
      CHECK(eval(f, x) == doctest::Approx(sum).epsilon(1e-13));
    }
  }
}

TEST_CASE("boehm table structure for a middle knot") {
  // Removing 0.5 from {0.25, 0.5, 0.75}: indices below i0-k copy in place,
  // indices at or above i0 shift by one.
  Partition fine = Partition::clamped_from_sorted({0.25, 0.5, 0.75}, 2);
  BoehmTable t = boehm_coarsen(fine, 1);
  CHECK(t.coarse_first == -2);
  CHECK(t.coarse_dim == 4);
  const int k = 2;
  for (int r = 0; r < t.coarse_dim; ++r) {
    const long i = t.coarse_first + r;
    if (i < t.i0 - k) {
      CHECK(t.counts[static_cast<std::size_t>(r)] == 1);
      CHECK(t.rows[static_cast<std::size_t>(r)][0].index == i);
      CHECK(t.rows[static_cast<std::size_t>(r)][0].weight == 1.0);
    } else if (i >= t.i0) {
      CHECK(t.counts[static_cast<std::size_t>(r)] == 1);
      CHECK(t.rows[static_cast<std::size_t>(r)][0].index == i + 1);
      CHECK(t.rows[static_cast<std::size_t>(r)][0].weight == 1.0);
    } else {
      CHECK(t.counts[static_cast<std::size_t>(r)] == 2);
    }
  }

  // Order one: both indicator pieces of the removed knot get weight one.
  Partition f1 = Partition::clamped_from_sorted({0.5}, 1);
  BoehmTable t1 = boehm_coarsen(f1, 0);
  CHECK(t1.coarse_dim == 1);
  CHECK(t1.counts[0] == 2);
  CHECK(t1.rows[0][0].weight == 1.0);
  CHECK(t1.rows[0][1].weight == 1.0);
}

TEST_CASE("boehm refinement reproduces the coarse spline pointwise") {
  Rng rng(41);
  for (int k : {1, 2, 3, 5}) {
    for (bool torus : {false, true}) {
      KnotSequence seq = generate_sequence(Family::uniform_random, 8 + k,
                                           100 + k + torus, k,
                                           torus ? Domain::torus : Domain::interval);
      double x = 0.0;
      do {
        x = 0.05 + 0.9 * rng.uniform();
      } while (multiplicity(seq, x) >= k);
      InsertResult ins = insert_point(seq, x);
      auto coarse = share(torus ? Partition::periodic(seq)
                                : Partition::clamped(seq));
      auto fine = share(torus ? Partition::periodic(ins.sequence)
                              : Partition::clamped(ins.sequence));
      BoehmTable table = boehm_coarsen(*fine, ins.position);
      std::vector<double> cc(static_cast<std::size_t>(coarse->dimension()));
      for (double& v : cc) v = 2.0 * rng.uniform() - 1.0;
      Spline cs = make_primal(coarse, cc);
      Spline fs = make_primal(fine, refine_coeffs(table, *fine, cc));
      for (int s = 0; s <= 101; ++s) {
        const double y = s / 101.5;
        CHECK(eval(fs, y) == doctest::Approx(eval(cs, y)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("inner products of low order bases") {
  auto p1 = share(Partition::clamped_from_sorted({0.3, 0.55}, 1));
  for (long i = -1; i <= 1; ++i)
    for (long j = -1; j <= 1; ++j) {
      std::vector<double> ei(3, 0.0), ej(3, 0.0);
      ei[static_cast<std::size_t>(i + 1)] = 1.0;
      ej[static_cast<std::size_t>(j + 1)] = 1.0;
      const double v =
          inner_product(make_primal(p1, ei), make_primal(p1, ej));
      const double expect = i == j ? p1->support(i) : 0.0;
      CHECK(v == doctest::Approx(expect).epsilon(1e-14));
    }

  auto p2 = share(Partition::clamped_from_sorted({0.5}, 2));
  Spline hat = make_primal(p2, {0.0, 1.0, 0.0});
  CHECK(inner_product(hat, hat) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));

  Spline mix = make_primal(p2, {0.4, -0.7, 0.2});
  CHECK(inner_product(mix, mix) > 0.0);
}

TEST_CASE("lp norms across exponents") {
  auto whole = share(Partition::clamped_from_sorted({}, 1));
  Spline one = make_primal(whole, {1.0});
  CHECK(lp_norm(one, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lp_norm(one, 1.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lp_norm(one, inf) == doctest::Approx(1.0).epsilon(1e-12));

  auto split = share(Partition::clamped_from_sorted({0.5}, 1));
  Spline right = make_primal(split, {0.0, 1.0});
  CHECK(lp_norm(right, 1.0, Arc{0.0, 0.25}) == doctest::Approx(0.0));
  CHECK(lp_norm(right, 1.0, Arc{0.4, 0.2}) ==
        doctest::Approx(0.1).epsilon(1e-10));

  Rng rng(59);
  auto p = share(random_partition(10, 3, 8, false));
  std::vector<double> c(static_cast<std::size_t>(p->dimension()));
  for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
  Spline f = make_primal(p, c);
  const double n2 = lp_norm(f, 2.0);
  CHECK(n2 == doctest::Approx(std::sqrt(inner_product(f, f))).epsilon(1e-11));
  // Lebesgue measure of [0,1] is a probability, so p-norms are monotone.
  CHECK(lp_norm(f, 1.0) <= n2 + 1e-9);
  CHECK(n2 <= lp_norm(f, 3.0) + 1e-9);
  CHECK(lp_norm(f, 3.0) <= lp_norm(f, 4.0) + 1e-9);
  CHECK(lp_norm(f, 4.0) <= lp_norm(f, inf) + 1e-9);
}

TEST_CASE("coefficient norm equivalence stays in a loose window") {
  Rng rng(67);
  for (int k : {2, 3}) {
    auto p = share(random_partition(24, k, 7 * k, false));
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(p->dimension()));
      for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
      Spline f = make_primal(p, c);
      for (double pe : {1.5, 2.0, 4.0}) {
        double coeff = 0.0;
        for (long i = p->first_index();
             i < p->first_index() + p->dimension(); ++i)
          coeff += std::pow(std::abs(f.at(i)), pe) * p->support(i);
        coeff = std::pow(coeff, 1.0 / pe);
        const double ratio = lp_norm(f, pe) / coeff;
        CHECK(ratio > 1e-3);
        CHECK(ratio < 1e3);
      }
    }
  }
}

TEST_CASE("largest-interval coefficient bound") {
  Rng rng(71);
  auto p = share(random_partition(18, 3, 19, false, true));
  std::vector<double> c(static_cast<std::size_t>(p->dimension()));
  for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
  Spline f = make_primal(p, c);
  const int k = p->order();
  for (double pe : {1.5, 2.0}) {
    for (long i = p->first_index(); i < p->first_index() + p->dimension();
         ++i) {
      Arc best{p->knot(i), 0.0};
      for (long j = i; j < i + k; ++j)
        if (p->knot(j + 1) - p->knot(j) > best.length)
          best = Arc{p->knot(j), p->knot(j + 1) - p->knot(j)};
      const double local = lp_norm(f, pe, best);
      CHECK(std::abs(f.at(i)) <=
            1e3 * std::pow(best.length, -1.0 / pe) * local + 1e-12);
    }
  }
}

TEST_CASE("breakpoints deduplicate knots") {
  Partition a = Partition::clamped_from_sorted({0.25, 0.25, 0.5}, 2);
  CHECK(breakpoints(a) == std::vector<double>{0.0, 0.25, 0.5, 1.0});
  Partition b = Partition::periodic_from_sorted({0.0, 0.25, 0.5, 0.75}, 2);
  CHECK(breakpoints(b) == std::vector<double>{0.0, 0.25, 0.5, 0.75});
  Partition c = Partition::periodic_from_sorted({0.1, 0.1, 0.6}, 2);
  CHECK(breakpoints(c) == std::vector<double>{0.1, 0.6});
}
