#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tscale/checked.hpp"
#include "tscale/shape.hpp"

namespace tscale {

// Compound scaling L = alpha^phi, H = beta^phi with alpha * beta^2 ~ 2, so
// each unit of phi roughly doubles N_model.
struct ScalingPolicy {
  double alpha = 1.0;  // depth base, full precision
  double beta = 1.0;   // width base, full precision
  double phi0 = 0.0;   // log2(L H^2) of the base shape, unrounded
  double constraint_tol = 0.01;

  // phi0 rounded to the nearest integer; the exponent denominator used when
  // fitting alpha and beta.
  std::int64_t phi0_rounded() const;
  double growth_per_phi() const { return alpha * beta * beta; }
  double constraint_residual() const;
  bool constraint_ok() const;
  // Stable identifier derived from the coefficients.
  std::string id() const;

  friend bool operator==(const ScalingPolicy&, const ScalingPolicy&) = default;
};

// Validating constructor: alpha, beta >= 1 and the constraint within tol.
ScalingPolicy make_policy(double alpha, double beta, double phi0, double constraint_tol = 0.01);

// Fits alpha = L^(1/n), beta = H^(1/n) with n = round(log2(L H^2)). The
// constraint is reported through constraint_ok(), not enforced.
ScalingPolicy fit_coefficients(std::int64_t winner_layers, std::int64_t winner_width,
                               double constraint_tol = 0.01);

struct ScaledShape {
  ShapeConfig shape;
  double phi = 0.0;
  std::string policy_id;
  double raw_layers = 0.0;  // alpha^phi before rounding
  double raw_width = 0.0;   // beta^phi before rounding
};

// Rounds alpha^phi and beta^phi half away from zero and picks heads with
// nearest_head_count. Context length and ff_mult come from `tmpl`.
ScaledShape scale(const ScalingPolicy& policy, double phi, const ShapeConfig& tmpl);

// Continuous-relaxation phi with 12 alpha^phi beta^(2 phi) = n_target.
double phi_for_target_size(const ScalingPolicy& policy, Count n_target);

// 12 alpha^phi beta^(2 phi), no rounding.
double continuous_model_size(const ScalingPolicy& policy, double phi);

struct GridCandidate {
  ShapeConfig shape;
  Count n_model = 0;
  double deviation = 0.0;  // |n_model - target| / target
};

struct GridResult {
  std::vector<GridCandidate> candidates;  // ascending deviation, stable
  std::vector<std::string> notes;         // skipped depths
};

// For each depth, width is the multiple of `heads` nearest to
// sqrt(n_target / (12 L)), ties toward the larger width.
GridResult grid_candidates(Count n_target, std::int64_t heads, std::span<const std::int64_t> depths,
                           std::int64_t context_len = 128);

std::string policy_to_json(const ScalingPolicy& policy, int indent = 2);
ScalingPolicy policy_from_json(std::string_view text);

// Shape document plus `phi` and `policy_id`.
std::string scaled_shape_to_json(const ScaledShape& scaled, ArchVariant arch, const VocabSpec& vocab,
                                 int indent = 2);

}  // namespace tscale
