#include "tscale/scaler.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "json_io.hpp"

namespace tscale {

std::int64_t ScalingPolicy::phi0_rounded() const { return std::llround(phi0); }

double ScalingPolicy::constraint_residual() const { return std::abs(growth_per_phi() - 2.0); }

bool ScalingPolicy::constraint_ok() const { return constraint_residual() <= constraint_tol; }

std::string ScalingPolicy::id() const {
  return fmt::format("a{:.6f}-b{:.6f}", alpha, beta);
}

namespace {

void check_bases(double alpha, double beta, double tol) {
  if (!(alpha >= 1.0) || !(beta >= 1.0)) {
    throw ValidationError(fmt::format("alpha and beta must be >= 1, got {} and {}", alpha, beta));
  }
  if (!(tol >= 0.0)) throw ValidationError("constraint_tol must be non-negative");
}

}  // namespace

ScalingPolicy make_policy(double alpha, double beta, double phi0, double constraint_tol) {
  check_bases(alpha, beta, constraint_tol);
  ScalingPolicy p{alpha, beta, phi0, constraint_tol};
  if (!p.constraint_ok()) {
    throw ValidationError(fmt::format("alpha * beta^2 = {:.6f} is not within {} of 2",
                                      p.growth_per_phi(), constraint_tol));
  }
  return p;
}

ScalingPolicy fit_coefficients(std::int64_t winner_layers, std::int64_t winner_width,
                               double constraint_tol) {
  if (winner_layers < 1 || winner_width < 1) {
    throw ValidationError("winner depth and width must be >= 1");
  }
  const double L = static_cast<double>(winner_layers);
  const double H = static_cast<double>(winner_width);
  ScalingPolicy p;
  p.phi0 = std::log2(L) + 2.0 * std::log2(H);
  if (p.phi0 <= 0.0) {
    throw ValidationError("degenerate winner: L = H = 1 gives compound coefficient 0");
  }
  const double n = static_cast<double>(p.phi0_rounded());
  p.alpha = std::pow(L, 1.0 / n);
  p.beta = std::pow(H, 1.0 / n);
  p.constraint_tol = constraint_tol;
  check_bases(p.alpha, p.beta, constraint_tol);
  return p;
}

ScaledShape scale(const ScalingPolicy& policy, double phi, const ShapeConfig& tmpl) {
  if (!(phi > 0.0)) throw ValidationError(fmt::format("phi must be positive, got {}", phi));
  ScaledShape out;
  out.phi = phi;
  out.policy_id = policy.id();
  out.raw_layers = std::pow(policy.alpha, phi);
  out.raw_width = std::pow(policy.beta, phi);
  // std::round is half away from zero.
  const double layers = std::round(out.raw_layers);
  const double width = std::round(out.raw_width);
  if (layers < 1.0 || width < 1.0) {
    throw ValidationError(
        fmt::format("phi {} rounds to L={} H={}, below 1", phi, layers, width));
  }
  if (layers > 9.0e15 || width > 9.0e15) {
    throw OverflowError(fmt::format("phi {} gives a shape too large to represent", phi));
  }
  out.shape = tmpl;
  out.shape.layers = static_cast<std::int64_t>(layers);
  out.shape.width = static_cast<std::int64_t>(width);
  out.shape.heads = nearest_head_count(out.shape.width);
  return out;
}

double continuous_model_size(const ScalingPolicy& policy, double phi) {
  return 12.0 * std::pow(policy.alpha, phi) * std::pow(policy.beta, 2.0 * phi);
}

double phi_for_target_size(const ScalingPolicy& policy, Count n_target) {
  if (n_target < 12) throw ValidationError("target size must be at least 12");
  const double growth = policy.growth_per_phi();
  if (!(growth > 1.0)) throw ValidationError("policy does not grow with phi (alpha = beta = 1)");
  return std::log(static_cast<double>(n_target) / 12.0) / std::log(growth);
}

namespace {

using Wide = unsigned __int128;

// 12 L w^2 <= n
bool fits(Wide n, Wide layers, Wide w) { return 12 * layers * w * w <= n; }

}  // namespace

GridResult grid_candidates(Count n_target, std::int64_t heads, std::span<const std::int64_t> depths,
                           std::int64_t context_len) {
  if (n_target == 0) throw ValidationError("target size must be positive");
  if (heads < 1) throw ValidationError("heads must be positive");
  GridResult result;
  for (std::int64_t L : depths) {
    if (L < 1) throw ValidationError(fmt::format("depth must be >= 1, got {}", L));
    const double ideal = std::sqrt(static_cast<double>(n_target) / (12.0 * static_cast<double>(L)));
    const Wide A = static_cast<Wide>(heads);
    // Largest m with 12 L (m A)^2 <= n, starting from the float estimate.
    Wide m = static_cast<Wide>(std::floor(ideal / static_cast<double>(heads)));
    while (m > 0 && !fits(n_target, L, m * A)) --m;
    while (fits(n_target, L, (m + 1) * A)) ++m;
    const Wide lo = m * A;
    const Wide hi = (m + 1) * A;
    // Midpoint test in integers: ideal >= (lo + hi) / 2  <=>  n >= 3 L (lo + hi)^2.
    const Wide width = (static_cast<Wide>(n_target) >= 3 * static_cast<Wide>(L) * (lo + hi) * (lo + hi))
                           ? hi
                           : lo;
    if (width == 0) {
      result.notes.push_back(
          fmt::format("L={}: width rounds to 0 for target {} with {} heads; skipped", L, n_target,
                      heads));
      continue;
    }
    GridCandidate c;
    c.shape = ShapeConfig{heads, static_cast<std::int64_t>(width), L, context_len, 4};
    c.n_model = approx_model_size(c.shape);
    const double diff = c.n_model > n_target ? static_cast<double>(c.n_model - n_target)
                                             : static_cast<double>(n_target - c.n_model);
    c.deviation = diff / static_cast<double>(n_target);
    result.candidates.push_back(c);
  }
  std::stable_sort(result.candidates.begin(), result.candidates.end(),
                   [](const GridCandidate& a, const GridCandidate& b) {
                     return a.deviation < b.deviation;
                   });
  return result;
}

std::string policy_to_json(const ScalingPolicy& p, int indent) {
  detail::Json j;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["phi0"] = p.phi0;
  j["constraint_tol"] = p.constraint_tol;
  return j.dump(indent);
}

ScalingPolicy policy_from_json(std::string_view text) {
  constexpr std::string_view what = "policy document";
  const auto j = detail::parse_json(text, what);
  detail::reject_unknown_keys(j, {"alpha", "beta", "phi0", "constraint_tol"}, what);
  ScalingPolicy p;
  p.alpha = detail::get_double(j, "alpha", what);
  p.beta = detail::get_double(j, "beta", what);
  p.phi0 = detail::get_double(j, "phi0", what);
  p.constraint_tol = j.contains("constraint_tol") ? detail::get_double(j, "constraint_tol", what) : 0.01;
  check_bases(p.alpha, p.beta, p.constraint_tol);
  return p;
}

std::string scaled_shape_to_json(const ScaledShape& scaled, ArchVariant arch, const VocabSpec& vocab,
                                 int indent) {
  auto j = detail::shape_value(ShapeDocument{scaled.shape, arch, vocab});
  j["phi"] = scaled.phi;
  j["policy_id"] = scaled.policy_id;
  return j.dump(indent);
}

}  // namespace tscale
