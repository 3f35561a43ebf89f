#include "ospline/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ospline {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double rademacher_sign(std::uint64_t seed, std::uint64_t trial,
                       std::uint64_t term) {
  const std::uint64_t h =
      splitmix64(seed ^ splitmix64(trial ^ splitmix64(term)));
  return (h >> 63) ? -1.0 : 1.0;
}

Family parse_family(const std::string& name) {
  if (name == "dyadic") return Family::dyadic;
  if (name == "uniform-random") return Family::uniform_random;
  if (name == "clustered") return Family::clustered;
  if (name == "repeated-knot") return Family::repeated_knot;
  if (name == "custom-file") return Family::custom_file;
  throw std::invalid_argument("unknown sequence family: " + name);
}

std::string family_name(Family f) {
  switch (f) {
    case Family::dyadic: return "dyadic";
    case Family::uniform_random: return "uniform-random";
    case Family::clustered: return "clustered";
    case Family::repeated_knot: return "repeated-knot";
    case Family::custom_file: return "custom-file";
  }
  return "unknown";
}

namespace {

bool in_domain(double x, Domain d) {
  return d == Domain::torus ? (x >= 0.0 && x < 1.0) : (x > 0.0 && x < 1.0);
}

std::vector<double> dyadic_points(int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long denom = 2; static_cast<int>(out.size()) < n; denom *= 2)
    for (long num = 1; num < denom && static_cast<int>(out.size()) < n;
         num += 2)
      out.push_back(static_cast<double>(num) / static_cast<double>(denom));
  return out;
}

}  // namespace

KnotSequence generate_sequence(Family family, int n, std::uint64_t seed,
                               int k, Domain domain) {
  if (n < 1) throw std::invalid_argument("sequence length must be positive");
  if (k < 1 || k > max_order)
    throw std::invalid_argument("order out of range");
  KnotSequence seq;
  seq.domain = domain;
  seq.order = k;
  Rng rng(splitmix64(seed));
  std::map<double, int> used;
  auto admit = [&](double x, int extra = 1) {
    if (!in_domain(x, domain)) return false;
    return used[x] + extra <= k;
  };
  switch (family) {
    case Family::dyadic:
      seq.points = dyadic_points(n);
      break;
    case Family::uniform_random:
      while (static_cast<int>(seq.points.size()) < n) {
        const double u = rng.uniform();
        if (!admit(u)) continue;
        ++used[u];
        seq.points.push_back(u);
      }
      break;
    case Family::clustered: {
      const double center = 0.1 + 0.8 * rng.uniform();
      // Gap floor keeps consecutive offsets separated by more than
      // representable noise even for the longest runs.
      const double floor_r = std::pow(1e-4, 2.0 / n);
      const double ratio = std::min(0.995, std::max(floor_r, 0.6 + 0.35 * rng.uniform()));
      const double amp = domain == Domain::torus
                             ? 0.45
                             : 0.9 * std::min(center, 1.0 - center);
      double scale = amp;
      int side = 1;
      while (static_cast<int>(seq.points.size()) < n) {
        double x = center + side * scale;
        if (domain == Domain::torus) x -= std::floor(x);
        if (side < 0) scale *= ratio;
        side = -side;
        if (!admit(x)) continue;
        ++used[x];
        seq.points.push_back(x);
      }
      break;
    }
    case Family::repeated_knot:
      while (static_cast<int>(seq.points.size()) < n) {
        const double u = rng.uniform();
        int mult = 1 + static_cast<int>(rng.index(k));
        mult = std::min(mult, n - static_cast<int>(seq.points.size()));
        if (!admit(u, mult)) continue;
        used[u] += mult;
        for (int t = 0; t < mult; ++t) seq.points.push_back(u);
      }
      break;
    case Family::custom_file:
      throw std::invalid_argument(
          "custom-file sequences are read from disk, not generated");
  }
  validate(seq);
  return seq;
}

Partition random_partition(int n, int k, std::uint64_t seed, bool torus,
                           bool allow_repeats) {
  if (n < 1) throw std::invalid_argument("partition size must be positive");
  Rng rng(splitmix64(seed ^ 0x517cc1b727220a95ull));
  std::vector<double> pts(static_cast<std::size_t>(n));
  if (torus) {
    for (int j = 0; j < n; ++j)
      pts[static_cast<std::size_t>(j)] = (j + 0.8 * rng.uniform()) / n;
  } else {
    for (int j = 0; j < n; ++j)
      pts[static_cast<std::size_t>(j)] = (j + 1 + 0.8 * rng.uniform()) / (n + 1);
  }
  if (allow_repeats && k > 1 && n > 2) {
    const int dups = n / 5;
    for (int t = 0; t < dups; ++t) {
      const long j = 1 + rng.index(n - 1);
      // Never extend a run beyond multiplicity k.
      int run = 1;
      for (long i = j - 1; i > 0 && pts[static_cast<std::size_t>(i)] ==
                                        pts[static_cast<std::size_t>(i - 1)];
           --i)
        ++run;
      if (run < k)
        pts[static_cast<std::size_t>(j)] = pts[static_cast<std::size_t>(j - 1)];
    }
    std::sort(pts.begin(), pts.end());
  }
  return torus ? Partition::periodic_from_sorted(std::move(pts), k)
               : Partition::clamped_from_sorted(std::move(pts), k);
}

}  // namespace ospline
