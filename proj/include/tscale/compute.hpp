#pragma once

#include <string>

#include "tscale/checked.hpp"
#include "tscale/shape.hpp"

namespace tscale {

// Per-token FLOPs, counting one multiply-accumulate as 2 FLOPs. Biases,
// layer norm, softmax, activations and (de-)embedding are not counted.
struct ComputeEstimate {
  Count flops_context_free = 0;  // 24 L H^2 = 2 N_model
  Count flops_context_dep = 0;   // 2 L N_ctx H (causal) or 4 L N_ctx H
  Count c_forward = 0;
  Count c_train = 0;  // 6 N_model
  double context_share = 0.0;
};

ComputeEstimate forward_flops_per_token(const ShapeConfig& shape, ArchVariant arch);

// 6 N_model: forward plus a backward pass costing twice the forward.
Count training_flops_per_token(const ShapeConfig& shape);

// Throws OverflowError if the product exceeds 64 bits.
Count total_training_flops(const ShapeConfig& shape, Count tokens_processed);

struct DominanceReport {
  // N_ctx / 12 for causal masks, N_ctx / 6 for bidirectional ones.
  double threshold = 0.0;
  // Strictly H > threshold.
  bool satisfied = false;
  double context_share = 0.0;
};

DominanceReport context_term_dominance(const ShapeConfig& shape, ArchVariant arch);

// Fields c_forward, c_train, context_share (4 decimals).
std::string render_estimate(const ComputeEstimate& est);

}  // namespace tscale
