#pragma once

#include <cstdint>
#include <span>

namespace tscale::kernels {

// Every kernel has a serial reference and an OpenMP version. Both walk each
// output row in the same order, so results are bit-identical.
enum class Exec { serial, parallel };

// c[m x n] = a[m x k] * b[k x n], row-major. Returns multiply-accumulates.
std::uint64_t matmul_serial(std::span<const double> a, std::span<const double> b,
                            std::span<double> c, std::int64_t m, std::int64_t k, std::int64_t n);
std::uint64_t matmul_parallel(std::span<const double> a, std::span<const double> b,
                              std::span<double> c, std::int64_t m, std::int64_t k, std::int64_t n);

// c[m x n] = a[m x k] * b[n x k]^T. Used for tied output projections.
void matmul_bt_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                      std::int64_t m, std::int64_t k, std::int64_t n);
void matmul_bt_parallel(std::span<const double> a, std::span<const double> b, std::span<double> c,
                        std::int64_t m, std::int64_t k, std::int64_t n);

struct AttentionMacs {
  std::uint64_t weights = 0;       // q . k dot products
  std::uint64_t weighted_sum = 0;  // sum_j p_ij v_j
};

// Single-head scaled dot-product attention over q, k, v [seq x d]. With
// `causal`, position i attends to j <= i only and masked pairs are skipped.
AttentionMacs attention_serial(std::span<const double> q, std::span<const double> k,
                               std::span<const double> v, std::span<double> out, std::int64_t seq,
                               std::int64_t d, bool causal);
AttentionMacs attention_parallel(std::span<const double> q, std::span<const double> k,
                                 std::span<const double> v, std::span<double> out,
                                 std::int64_t seq, std::int64_t d, bool causal);

inline std::uint64_t matmul(Exec e, std::span<const double> a, std::span<const double> b,
                            std::span<double> c, std::int64_t m, std::int64_t k, std::int64_t n) {
  return e == Exec::serial ? matmul_serial(a, b, c, m, k, n) : matmul_parallel(a, b, c, m, k, n);
}

inline void matmul_bt(Exec e, std::span<const double> a, std::span<const double> b,
                      std::span<double> c, std::int64_t m, std::int64_t k, std::int64_t n) {
  if (e == Exec::serial) {
    matmul_bt_serial(a, b, c, m, k, n);
  } else {
    matmul_bt_parallel(a, b, c, m, k, n);
  }
}

inline AttentionMacs attention(Exec e, std::span<const double> q, std::span<const double> k,
                               std::span<const double> v, std::span<double> out, std::int64_t seq,
                               std::int64_t d, bool causal) {
  return e == Exec::serial ? attention_serial(q, k, v, out, seq, d, causal)
                           : attention_parallel(q, k, v, out, seq, d, causal);
}

}  // namespace tscale::kernels
