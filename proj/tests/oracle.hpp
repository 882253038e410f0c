#pragma once

// Independent reference computations for the tests. Nothing here calls
// into the library.

#include <cstdint>
#include <numeric>

namespace oracle {

// Counts the tensors of one model one at a time.
struct Tensors {
  std::uint64_t nonembed = 0;
  std::uint64_t embed = 0;
};

inline Tensors enumerate_tensors(std::uint64_t A, std::uint64_t H, std::uint64_t L,
                                 std::uint64_t ff_mult, std::uint64_t tokens,
                                 std::uint64_t positions, std::uint64_t segments, bool bias,
                                 bool ln, bool tied) {
  Tensors t;
  const std::uint64_t hd = H / A;
  const std::uint64_t ff = ff_mult * H;
  for (std::uint64_t l = 0; l < L; ++l) {
    for (std::uint64_t a = 0; a < A; ++a) {
      for (int m = 0; m < 3; ++m) {
        t.nonembed += H * hd;
        if (bias) t.nonembed += hd;
      }
    }
    t.nonembed += H * H + (bias ? H : 0);
    t.nonembed += H * ff + (bias ? ff : 0);
    t.nonembed += ff * H + (bias ? H : 0);
    if (ln) t.nonembed += 2 * (H + H);
  }
  if (ln) t.nonembed += H + H;
  t.embed = tokens * H + positions * H + segments * H;
  if (!tied) t.embed += tokens * H;
  return t;
}

// Query/key pairs an attention mask admits over a sequence of n tokens.
inline std::uint64_t attended_pairs(std::uint64_t n, bool causal) {
  std::uint64_t pairs = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < n; ++j) {
      if (!causal || j <= i) ++pairs;
    }
  }
  return pairs;
}

// Divisor of h closest to h/64 by brute force over real distances.
inline std::int64_t nearest_divisor(std::int64_t h) {
  std::int64_t best = 1;
  double best_dist = 1e300;
  for (std::int64_t d = 1; d <= h; ++d) {
    if (h % d) continue;
    const double dist = d > h / 64.0 ? d - h / 64.0 : h / 64.0 - d;
    if (dist <= best_dist + 1e-12) {
      best = d;
      best_dist = dist;
    }
  }
  return best;
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  std::uint64_t q = 0;
  while (q * b < a) ++q;
  return q;
}

}  // namespace oracle
