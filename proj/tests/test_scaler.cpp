#include <cmath>
#include <random>

#include "doctest.h"
#include "tscale/errors.hpp"
#include "tscale/scaler.hpp"

using namespace tscale;

TEST_SUITE("scaler") {

TEST_CASE("coefficients fitted from the 3 x 104 winner") {
  const auto p = fit_coefficients(3, 104);
  CHECK(p.phi0 == doctest::Approx(std::log2(3.0 * 104 * 104)));
  CHECK(p.phi0_rounded() == 15);
  CHECK(p.alpha == doctest::Approx(std::pow(3.0, 1.0 / 15)));
  CHECK(p.beta == doctest::Approx(std::pow(104.0, 1.0 / 15)));
  CHECK(std::round(p.alpha * 1000) / 1000 == doctest::Approx(1.076));
  CHECK(std::round(p.beta * 1000) / 1000 == doctest::Approx(1.363));
  CHECK(p.growth_per_phi() == doctest::Approx(1.9987).epsilon(0.0003));
  CHECK(p.constraint_ok());
}

TEST_CASE("published compound-scaled shapes") {
  const auto p = fit_coefficients(3, 104);
  const ShapeConfig tmpl{1, 1, 1, 128, 4};
  struct Row {
    double phi;
    std::int64_t a, h, l;
    Count n;
  };
  for (const Row& r : {Row{19.865, 7, 469, 4, 10'558'128}, Row{20.578, 9, 585, 5, 20'533'500},
                       Row{21.716, 13, 832, 5, 41'533'440}}) {
    const auto s = scale(p, r.phi, tmpl);
    CHECK(s.shape.heads == r.a);
    CHECK(s.shape.width == r.h);
    CHECK(s.shape.layers == r.l);
    CHECK(approx_model_size(s.shape) == r.n);
    CHECK(s.policy_id == p.id());
  }
}

TEST_CASE("scaling at phi0 returns the winner") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t L = 1 + static_cast<std::int64_t>(rng() % 24);
    const std::int64_t H = 8 + static_cast<std::int64_t>(rng() % 1017);
    const auto p = fit_coefficients(L, H);
    const auto s = scale(p, static_cast<double>(p.phi0_rounded()), {1, 1, 1, 128, 4});
    CHECK(s.shape.layers == L);
    CHECK(s.shape.width == H);
  }
}

TEST_CASE("continuous size doubles per unit phi") {
  const auto p = fit_coefficients(3, 104);
  for (double phi : {10.0, 15.0, 20.0, 25.0}) {
    const double ratio = continuous_model_size(p, phi + 1) / continuous_model_size(p, phi);
    CHECK(ratio == doctest::Approx(p.growth_per_phi()));
    CHECK(ratio >= 1.99);
    CHECK(ratio <= 2.01);
  }
}

TEST_CASE("phi for a target size inverts the continuous size") {
  const auto p = fit_coefficients(3, 104);
  for (Count n : {1'000'000ull, 41'553'440ull, 1'000'000'000ull}) {
    const double phi = phi_for_target_size(p, n);
    CHECK(continuous_model_size(p, phi) == doctest::Approx(static_cast<double>(n)));
  }
  // Bisection on the continuous size as an independent check.
  double lo = 0, hi = 64;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (12 * std::pow(p.alpha, mid) * std::pow(p.beta, 2 * mid) < 41'553'440.0 ? lo : hi) = mid;
  }
  CHECK(phi_for_target_size(p, 41'553'440) == doctest::Approx(lo));
  CHECK(std::abs(phi_for_target_size(p, 41'553'440) - 21.716) < 0.05);
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(make_policy(1.5, 1.5, 10), ValidationError);
  CHECK_NOTHROW(make_policy(1.0, std::sqrt(2.0), 10));
  CHECK_THROWS_AS(fit_coefficients(0, 104), ValidationError);
  CHECK_THROWS_AS(fit_coefficients(1, 1), ValidationError);
}

TEST_CASE("policy document round trip") {
  const auto p = fit_coefficients(3, 104);
  CHECK(policy_from_json(policy_to_json(p)) == p);
  CHECK_THROWS_AS(policy_from_json(R"({"alpha":1.0})"), ValidationError);
}

TEST_CASE("grid candidates for the published search") {
  const std::array<std::int64_t, 9> depths{2, 3, 4, 6, 8, 10, 12, 14, 16};
  const auto g = grid_candidates(393'216, 2, depths);
  REQUIRE(g.candidates.size() == 9);
  std::map<std::int64_t, std::pair<std::int64_t, Count>> by_depth;
  for (const auto& c : g.candidates) by_depth[c.shape.layers] = {c.shape.width, c.n_model};
  CHECK(by_depth[2] == std::pair<std::int64_t, Count>{128, 393'216});
  CHECK(by_depth[3] == std::pair<std::int64_t, Count>{104, 389'376});
  CHECK(by_depth[4] == std::pair<std::int64_t, Count>{90, 388'800});
  CHECK(by_depth[6] == std::pair<std::int64_t, Count>{74, 394'272});
  CHECK(by_depth[8] == std::pair<std::int64_t, Count>{64, 393'216});
  CHECK(by_depth[10] == std::pair<std::int64_t, Count>{58, 403'680});
  CHECK(by_depth[12] == std::pair<std::int64_t, Count>{52, 389'376});
  CHECK(by_depth[14] == std::pair<std::int64_t, Count>{48, 387'072});
  CHECK(by_depth[16] == std::pair<std::int64_t, Count>{46, 406'272});
  for (std::size_t i = 1; i < g.candidates.size(); ++i) {
    CHECK(g.candidates[i - 1].deviation <= g.candidates[i].deviation);
  }
}

TEST_CASE("grid widths are the nearest multiple of the head count") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Count target = 10'000 + rng() % 100'000'000;
    const std::int64_t heads = 1 + static_cast<std::int64_t>(rng() % 8);
    const std::array<std::int64_t, 1> depth{1 + static_cast<std::int64_t>(rng() % 24)};
    const auto g = grid_candidates(target, heads, depth);
    if (g.candidates.empty()) continue;
    const auto h = g.candidates[0].shape.width;
    CHECK(h % heads == 0);
    const double ideal = std::sqrt(static_cast<double>(target) / (12.0 * depth[0]));
    CHECK(std::abs(h - ideal) <= heads / 2.0 + 1e-9);
  }
}

TEST_CASE("grid skips depths that cannot hold one head") {
  const std::array<std::int64_t, 2> depths{1, 1000};
  const auto g = grid_candidates(12'000, 8, depths);
  CHECK(g.candidates.size() == 1);
  CHECK(g.notes.size() == 1);
}

}
