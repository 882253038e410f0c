#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tscale/checked.hpp"
#include "tscale/kernels.hpp"
#include "tscale/shape.hpp"

namespace tscale::microformer {

// Row-major dense matrix.
struct Matrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::int64_t r, std::int64_t c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}

  double& at(std::int64_t r, std::int64_t c) { return data[static_cast<std::size_t>(r * cols + c)]; }
  double at(std::int64_t r, std::int64_t c) const {
    return data[static_cast<std::size_t>(r * cols + c)];
  }
  std::span<const double> row(std::int64_t r) const {
    return std::span<const double>(data).subspan(static_cast<std::size_t>(r * cols),
                                                 static_cast<std::size_t>(cols));
  }
  std::size_t size() const { return data.size(); }
};

struct LayerNormWeights {
  std::vector<double> gamma;
  std::vector<double> beta;
};

// Queries, keys and values of one head: H x H/A each. Biases are empty
// when the model is built without them.
struct HeadWeights {
  Matrix wq, wk, wv;
  std::vector<double> bq, bk, bv;
};

struct LayerWeights {
  std::vector<HeadWeights> heads;
  Matrix wo;  // H x H
  std::vector<double> bo;
  Matrix w1;  // H x ff_dim
  std::vector<double> b1;
  Matrix w2;  // ff_dim x H
  std::vector<double> b2;
  std::optional<LayerNormWeights> ln1, ln2;
};

struct ModelInstance {
  ShapeConfig shape;
  ArchVariant arch;
  VocabSpec vocab;
  ParamOptions options;
  std::uint64_t seed = 0;

  Matrix token_embedding;     // tokens x H
  Matrix position_embedding;  // positions x H
  Matrix segment_embedding;   // segments x H
  std::optional<Matrix> output_embedding;  // untied de-embedding only
  // Embedding LN for bidirectional models, final LN for causal ones.
  std::optional<LayerNormWeights> extra_ln;
  std::vector<LayerWeights> layers;
};

// Entries are standard normal scaled by 1/sqrt(H); layer-norm scales start
// at 1 and shifts at 0. Identical inputs give bit-identical weights.
ModelInstance materialize(const ShapeConfig& shape, ArchVariant arch, const VocabSpec& vocab,
                          const ParamOptions& options, std::uint64_t seed);

// Tensor elements per component, keyed like ParamCount::breakdown.
ParamCount tensor_element_count(const ModelInstance& model);

// FNV-1a over the bit patterns of every weight.
std::uint64_t weight_checksum(const ModelInstance& model);

enum class FlopCategory { input_proj, attention_weights, attention_weighted_sum, output_proj, ffn };

inline constexpr std::array<FlopCategory, 5> all_categories{
    FlopCategory::input_proj, FlopCategory::attention_weights, FlopCategory::attention_weighted_sum,
    FlopCategory::output_proj, FlopCategory::ffn};

std::string_view to_string(FlopCategory c);

// Only matmul and attention multiply-accumulates are tallied, at 2 FLOPs
// each; softmax, layer norm, GELU, biases and (de-)embedding are not.
struct FlopCounter {
  std::array<Count, 5> flops{};

  static constexpr std::string_view excluded =
      "softmax, layer norm, GELU, bias adds, embedding lookup and vocabulary logits";

  Count operator[](FlopCategory c) const { return flops[static_cast<std::size_t>(c)]; }
  void add_macs(FlopCategory c, std::uint64_t macs);
  Count total() const;
  Count context_free() const;  // input_proj + output_proj + ffn
  Count attention() const;     // attention_weights + attention_weighted_sum
};

struct ForwardResult {
  Matrix logits;  // seq_len x token vocabulary
  FlopCounter counter;
};

// Post-LN blocks for bidirectional models, pre-LN for causal ones. Throws
// ValidationError on an empty or overlong sequence or an out-of-range id.
ForwardResult forward(const ModelInstance& model, std::span<const std::int64_t> token_ids,
                      kernels::Exec exec = kernels::Exec::parallel);

struct FlopMeasurement {
  std::int64_t seq_len = 0;
  FlopCounter totals;
  std::array<double, 5> measured_per_token{};
  // Analytic per-token values: projections from the shape, attention from
  // the average-N/2 approximation for causal masks.
  std::array<double, 5> analytic_per_token{};

  double context_free_per_token() const;
  double attention_per_token() const;
};

FlopMeasurement measured_flops_per_token(const ModelInstance& model, std::int64_t seq_len,
                                         std::uint64_t input_seed = 0,
                                         kernels::Exec exec = kernels::Exec::parallel);

}  // namespace tscale::microformer
