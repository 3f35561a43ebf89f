#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ospline/knots.hpp"

namespace ospline {

/// Deterministic random stream; identical seeds give identical draws on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  long index(long n) {
    return static_cast<long>(gen_() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 gen_;
};

/// Stateless mixer; used for counter-based draws that must not depend on
/// evaluation order.
std::uint64_t splitmix64(std::uint64_t x);

/// Sign in {-1, +1} for one (seed, trial, term) triple.
double rademacher_sign(std::uint64_t seed, std::uint64_t trial,
                       std::uint64_t term);

enum class Family {
  dyadic,
  uniform_random,
  clustered,
  repeated_knot,
  custom_file,
};

/// Parses the CLI spelling (dyadic, uniform-random, clustered,
/// repeated-knot, custom-file); throws on anything else.
Family parse_family(const std::string& name);
std::string family_name(Family f);

/// Generates an admissible knot sequence of n points in insertion order.
///
/// dyadic: midpoint refinement 1/2, 1/4, 3/4, 1/8, 3/8, ...;
/// uniform-random: i.i.d. uniform draws, rejecting multiplicity overflow;
/// clustered: geometric accumulation at a random center, ratio floored so
/// gaps stay representable; repeated-knot: random values inserted with
/// random multiplicity up to k.  custom-file sequences are read through the
/// io module and cannot be generated here.
KnotSequence generate_sequence(Family family, int n, std::uint64_t seed,
                               int k, Domain domain);

/// Admissible random partition: jittered lattice, optionally with repeated
/// values (runs capped at multiplicity k).
Partition random_partition(int n, int k, std::uint64_t seed, bool torus,
                           bool allow_repeats = false);

}  // namespace ospline
