#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "ospline/analysis.hpp"
#include "ospline/bspline.hpp"
#include "ospline/generators.hpp"
#include "ospline/gram.hpp"
#include "ospline/knots.hpp"
#include "ospline/ortho.hpp"

namespace {

ospline::KnotSequence make_seq(int n, int k, bool torus) {
  return ospline::generate_sequence(
      ospline::Family::dyadic, n, 1, k,
      torus ? ospline::Domain::torus : ospline::Domain::interval);
}

std::shared_ptr<const ospline::Partition> make_part(int n, int k, bool torus) {
  const ospline::KnotSequence seq = make_seq(n, k, torus);
  return std::make_shared<const ospline::Partition>(
      torus ? ospline::Partition::periodic(seq)
            : ospline::Partition::clamped(seq));
}

void bm_eval_basis(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto part = make_part(n, 4, false);
  double x = 0.0;
  for (auto _ : state) {
    x += 0.37;
    if (x >= 1.0) x -= 1.0;
    ospline::LocalBasis lb = ospline::eval_basis_local(*part, x);
    benchmark::DoNotOptimize(lb.value[0]);
  }
}
BENCHMARK(bm_eval_basis)->Arg(64)->Arg(512);

void bm_gram_build(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto part = make_part(n, 4, true);
  for (auto _ : state) {
    const ospline::GramSystem gram = ospline::build_gram(part);
    benchmark::DoNotOptimize(gram.entry(0, 0));
  }
}
BENCHMARK(bm_gram_build)->Arg(64)->Arg(256);

void bm_gram_solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto part = make_part(n, 4, true);
  const ospline::GramSystem gram = ospline::build_gram(part);
  std::vector<double> rhs(static_cast<std::size_t>(part->dimension()), 1.0);
  for (auto _ : state) {
    const std::vector<double> x = gram.solve(rhs);
    benchmark::DoNotOptimize(x[0]);
  }
}
BENCHMARK(bm_gram_solve)->Arg(64)->Arg(256);

void bm_build_system(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ospline::KnotSequence seq = make_seq(n, 3, true);
  for (auto _ : state) {
    const ospline::OrthoSystem sys = ospline::build_system(seq);
    benchmark::DoNotOptimize(sys.size());
  }
}
BENCHMARK(bm_build_system)->Arg(16)->Arg(64);

void bm_hardy_littlewood(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto part = make_part(n, 3, true);
  const ospline::GridFunction g = ospline::sample_function(
      part, 8, [](double x) { return x * (1.0 - x); });
  for (auto _ : state) {
    const ospline::GridFunction m = ospline::hardy_littlewood(g);
    benchmark::DoNotOptimize(m.value[0]);
  }
}
BENCHMARK(bm_hardy_littlewood)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
