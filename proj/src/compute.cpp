#include "tscale/compute.hpp"

#include <fmt/format.h>

namespace tscale {

ComputeEstimate forward_flops_per_token(const ShapeConfig& shape, ArchVariant arch) {
  const Count n_model = approx_model_size(shape);
  const Count per_pair = arch.causal() ? 2 : 4;
  ComputeEstimate est;
  est.flops_context_free = checked_mul(2, n_model, "forward FLOPs");
  est.flops_context_dep = checked_mul(
      checked_mul(per_pair, static_cast<Count>(shape.layers), "forward FLOPs"),
      checked_mul(static_cast<Count>(shape.context_len), static_cast<Count>(shape.width),
                  "forward FLOPs"),
      "forward FLOPs");
  est.c_forward = checked_add(est.flops_context_free, est.flops_context_dep, "forward FLOPs");
  est.c_train = checked_mul(6, n_model, "training FLOPs");
  est.context_share =
      static_cast<double>(est.flops_context_dep) / static_cast<double>(est.c_forward);
  return est;
}

Count training_flops_per_token(const ShapeConfig& shape) {
  return checked_mul(6, approx_model_size(shape), "training FLOPs");
}

Count total_training_flops(const ShapeConfig& shape, Count tokens_processed) {
  return checked_mul(training_flops_per_token(shape), tokens_processed, "total training FLOPs");
}

DominanceReport context_term_dominance(const ShapeConfig& shape, ArchVariant arch) {
  const auto est = forward_flops_per_token(shape, arch);
  const std::int64_t divisor = arch.causal() ? 12 : 6;
  DominanceReport r;
  r.threshold = static_cast<double>(shape.context_len) / static_cast<double>(divisor);
  r.satisfied = shape.width * divisor > shape.context_len;
  r.context_share = est.context_share;
  return r;
}

std::string render_estimate(const ComputeEstimate& est) {
  return fmt::format("c_forward: {}\nc_train: {}\ncontext_share: {:.4f}\n", est.c_forward,
                     est.c_train, est.context_share);
}

}  // namespace tscale
