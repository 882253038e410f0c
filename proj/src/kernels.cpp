#include "tscale/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tscale::kernels {

namespace {

// One output row of a * b; i-k-j order keeps b accesses contiguous.
inline void matmul_row(const double* a_row, const double* b, double* c_row, std::int64_t k,
                       std::int64_t n) {
  std::fill(c_row, c_row + n, 0.0);
  for (std::int64_t p = 0; p < k; ++p) {
    const double av = a_row[p];
    const double* b_row = b + p * n;
    for (std::int64_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
  }
}

inline void matmul_bt_row(const double* a_row, const double* b, double* c_row, std::int64_t k,
                          std::int64_t n) {
  for (std::int64_t j = 0; j < n; ++j) {
    const double* b_row = b + j * k;
    double acc = 0.0;
    for (std::int64_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
    c_row[j] = acc;
  }
}

// Attention output for query row i. `scores` needs room for seq entries.
// Returns the number of attended keys.
inline std::uint64_t attention_row(const double* q, const double* k, const double* v, double* out,
                                   std::int64_t i, std::int64_t seq, std::int64_t d, bool causal,
                                   double* scores) {
  const std::int64_t last = causal ? i + 1 : seq;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double* qi = q + i * d;
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = 0; j < last; ++j) {
    const double* kj = k + j * d;
    double dot = 0.0;
    for (std::int64_t p = 0; p < d; ++p) dot += qi[p] * kj[p];
    scores[j] = dot * scale;
    max_score = std::max(max_score, scores[j]);
  }
  double denom = 0.0;
  for (std::int64_t j = 0; j < last; ++j) {
    scores[j] = std::exp(scores[j] - max_score);
    denom += scores[j];
  }
  double* oi = out + i * d;
  std::fill(oi, oi + d, 0.0);
  for (std::int64_t j = 0; j < last; ++j) {
    const double w = scores[j] / denom;
    const double* vj = v + j * d;
    for (std::int64_t p = 0; p < d; ++p) oi[p] += w * vj[p];
  }
  return static_cast<std::uint64_t>(last);
}

}  // namespace

std::uint64_t matmul_serial(std::span<const double> a, std::span<const double> b,
                            std::span<double> c, std::int64_t m, std::int64_t k, std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) matmul_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
  return static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n);
}

std::uint64_t matmul_parallel(std::span<const double> a, std::span<const double> b,
                              std::span<double> c, std::int64_t m, std::int64_t k, std::int64_t n) {
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) matmul_row(ap + i * k, bp, cp + i * n, k, n);
  return static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n);
}

void matmul_bt_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                      std::int64_t m, std::int64_t k, std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    matmul_bt_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
  }
}

void matmul_bt_parallel(std::span<const double> a, std::span<const double> b, std::span<double> c,
                        std::int64_t m, std::int64_t k, std::int64_t n) {
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) matmul_bt_row(ap + i * k, bp, cp + i * n, k, n);
}

AttentionMacs attention_serial(std::span<const double> q, std::span<const double> k,
                               std::span<const double> v, std::span<double> out, std::int64_t seq,
                               std::int64_t d, bool causal) {
  std::vector<double> scores(static_cast<std::size_t>(seq));
  std::uint64_t pairs = 0;
  for (std::int64_t i = 0; i < seq; ++i) {
    pairs += attention_row(q.data(), k.data(), v.data(), out.data(), i, seq, d, causal,
                           scores.data());
  }
  const auto macs = pairs * static_cast<std::uint64_t>(d);
  return {macs, macs};
}

AttentionMacs attention_parallel(std::span<const double> q, std::span<const double> k,
                                 std::span<const double> v, std::span<double> out,
                                 std::int64_t seq, std::int64_t d, bool causal) {
  std::uint64_t pairs = 0;
  const double* qp = q.data();
  const double* kp = k.data();
  const double* vp = v.data();
  double* op = out.data();
#pragma omp parallel reduction(+ : pairs)
  {
    std::vector<double> scores(static_cast<std::size_t>(seq));
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < seq; ++i) {
      pairs += attention_row(qp, kp, vp, op, i, seq, d, causal, scores.data());
    }
  }
  const auto macs = pairs * static_cast<std::uint64_t>(d);
  return {macs, macs};
}

}  // namespace tscale::kernels
