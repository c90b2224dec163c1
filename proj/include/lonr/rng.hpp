#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lonr {

// All randomness in the library flows through an explicit engine so that runs
// are reproducible from a seed. Raw bits are converted to doubles by hand
// because the std distributions differ between standard libraries.
using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) with 53-bit resolution.
inline double next_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in {0, ..., n - 1}.
inline int next_index(Rng& rng, int n) {
  int i = static_cast<int>(next_double(rng) * n);
  return i < n ? i : n - 1;
}

/// Categorical draw from a probability vector. Never returns an index whose
/// probability is exactly zero; floating-point tail mass falls on the last
/// positive entry.
inline int sample_index(Rng& rng, std::span<const double> probs) {
  const double u = next_double(rng);
  double cumulative = 0.0;
  int last_positive = -1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] > 0.0) {
      cumulative += probs[i];
      last_positive = i;
      if (u < cumulative) return i;
    }
  }
  return last_positive;
}

}  // namespace lonr
