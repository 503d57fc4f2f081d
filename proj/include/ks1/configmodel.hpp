#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ks1/multigraph.hpp"
#include "ks1/rng.hpp"
#include "ks1/types.hpp"

namespace ks1 {

using DegreeSequence = std::vector<std::uint32_t>;

/// A sampled configuration: one vertex pair per configuration-point pair.
struct PairingSample {
  std::vector<VertexPair> pairs;
  std::size_t retries = 0;  // rejected draws before this one
};

/// Retry budget ran out before a loop-free configuration was drawn.
class RetriesExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepts iff every degree is 3 or 4 and the degree sum is even.
inline void validate(std::span<const std::uint32_t> d) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 3 || d[i] > 4)
      throw InputError("degree " + std::to_string(d[i]) + " at vertex " + std::to_string(i) + " is outside {3,4}");
    sum += d[i];
  }
  if (sum % 2 != 0) throw InputError("degree sum " + std::to_string(sum) + " is odd");
}

/// Degree sequence with floor(p*n) fours and the rest threes. When the resulting sum
/// is odd the number of fours is moved by one; `adjusted` reports whether that happened.
struct MixedDegrees {
  DegreeSequence degrees;
  std::size_t fours = 0;
  bool adjusted = false;
};

inline MixedDegrees mixed_degree_sequence(std::size_t n, double deg4_frac) {
  if (!(deg4_frac >= 0.0 && deg4_frac <= 1.0)) throw InputError("deg4 fraction must lie in [0,1]");
  if (n == 0) throw InputError("n must be positive");
  MixedDegrees out;
  out.fours = static_cast<std::size_t>(std::floor(deg4_frac * static_cast<double>(n)));
  if ((3 * n + out.fours) % 2 != 0) {
    out.fours = out.fours < n ? out.fours + 1 : out.fours - 1;
    out.adjusted = true;
  }
  out.degrees.assign(n, 3);
  std::fill_n(out.degrees.begin(), out.fours, 4u);
  return out;
}

/// Configuration points: vertex i appears d(i) times, in vertex order.
inline std::vector<std::uint32_t> configuration_points(std::span<const std::uint32_t> d) {
  std::vector<std::uint32_t> points;
  points.reserve(std::accumulate(d.begin(), d.end(), std::size_t{0}));
  for (std::uint32_t v = 0; v < d.size(); ++v) points.insert(points.end(), d[v], v);
  return points;
}

/// Uniform perfect pairing of `count` items (count even): shuffle and pair neighbours.
/// Returns partner indices pairwise, i.e. out[2j], out[2j+1] are paired.
inline std::vector<std::uint32_t> sample_pairing(std::size_t count, Rng& rng) {
  std::vector<std::uint32_t> perm(count);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

struct SampleOptions {
  std::size_t max_retries = 1000;
  /// Also reject configurations with parallel edges. No distributional claims are made for this mode.
  bool strict_simple = false;
};

/// Uniform loop-free configuration for degree sequence d, by whole-configuration rejection.
inline PairingSample sample_no_loops(std::span<const std::uint32_t> d, Rng& rng, SampleOptions opts = {}) {
  validate(d);
  const auto points = configuration_points(d);
  PairingSample out;
  for (std::size_t attempt = 0;; ++attempt) {
    auto perm = sample_pairing(points.size(), rng);
    out.pairs.clear();
    bool ok = true;
    for (std::size_t j = 0; j + 1 < perm.size(); j += 2) {
      const std::uint32_t a = points[perm[j]], b = points[perm[j + 1]];
      if (a == b) {
        ok = false;
        break;
      }
      out.pairs.emplace_back(a, b);
    }
    if (ok && opts.strict_simple) {
      auto sorted = out.pairs;
      for (auto& p : sorted)
        if (p.first > p.second) std::swap(p.first, p.second);
      std::sort(sorted.begin(), sorted.end());
      ok = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    }
    if (ok) {
      out.retries = attempt;
      return out;
    }
    if (attempt >= opts.max_retries)
      throw RetriesExhausted("no loop-free configuration after " + std::to_string(attempt + 1) + " draws");
  }
}

/// Number of perfect pairings of 2r items, (2r-1)!! = (2r)!/(2^r r!).
/// Throws std::overflow_error when the value does not fit in 64 bits (r > 17).
inline std::uint64_t count_pairings(std::uint64_t r) {
  std::uint64_t value = 1;
  for (std::uint64_t k = 3; k <= 2 * r; k += 2) {
    if (value > std::numeric_limits<std::uint64_t>::max() / k)
      throw std::overflow_error("count_pairings(" + std::to_string(r) + ") exceeds 64 bits");
    value *= k;
  }
  return value;
}

}  // namespace ks1
