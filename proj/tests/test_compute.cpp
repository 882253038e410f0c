#include "doctest.h"
#include "tscale/compute.hpp"
#include "tscale/errors.hpp"

using namespace tscale;

TEST_SUITE("compute") {

TEST_CASE("forward FLOPs for the smallest published shape") {
  const ShapeConfig s{2, 128, 2, 128, 4};
  const auto causal = forward_flops_per_token(s, ArchVariant(Objective::gpt2));
  // 2 * 393,216 + 2 * 2 * 128 * 128
  CHECK(causal.c_forward == 851'968);
  CHECK(causal.flops_context_free == 786'432);
  CHECK(causal.flops_context_dep == 65'536);
  CHECK(causal.context_share == doctest::Approx(65'536.0 / 851'968.0));
  CHECK(causal.context_share == doctest::Approx(0.0769).epsilon(0.001));

  const auto bidir = forward_flops_per_token(s, ArchVariant(Objective::bert));
  CHECK(bidir.c_forward == 917'504);
  CHECK(bidir.flops_context_dep == 2 * causal.flops_context_dep);
  CHECK(bidir.c_train == causal.c_train);
}

TEST_CASE("training FLOPs") {
  const ShapeConfig s{2, 128, 2, 128, 4};
  CHECK(training_flops_per_token(s) == 2'359'296);
  CHECK(total_training_flops(s, 1'000'000) == 2'359'296'000'000ull);
  CHECK_THROWS_AS(total_training_flops({1, 1 << 20, 1 << 20, 128, 4}, 1ull << 40), OverflowError);
}

TEST_CASE("FLOPs grow with every dimension") {
  const ArchVariant arch(Objective::roberta);
  const ShapeConfig base{2, 128, 4, 128, 4};
  const auto c0 = forward_flops_per_token(base, arch).c_forward;
  auto wider = base;
  wider.width = 256;
  auto deeper = base;
  deeper.layers = 5;
  auto longer = base;
  longer.context_len = 256;
  CHECK(forward_flops_per_token(wider, arch).c_forward > c0);
  CHECK(forward_flops_per_token(deeper, arch).c_forward > c0);
  CHECK(forward_flops_per_token(longer, arch).c_forward > c0);
}

TEST_CASE("context term dominance thresholds") {
  const ArchVariant bidir(Objective::bert), causal(Objective::gpt2);
  auto r = context_term_dominance({1, 21, 2, 128, 4}, bidir);
  CHECK(r.threshold == doctest::Approx(128.0 / 6.0));
  CHECK_FALSE(r.satisfied);
  CHECK(context_term_dominance({1, 22, 2, 128, 4}, bidir).satisfied);
  CHECK_FALSE(context_term_dominance({1, 10, 2, 128, 4}, causal).satisfied);
  CHECK(context_term_dominance({1, 11, 2, 128, 4}, causal).satisfied);
  CHECK(context_term_dominance({2, 128, 2, 128, 4}, causal).context_share < 0.1);
}

TEST_CASE("rendered estimate") {
  const auto est = forward_flops_per_token({2, 128, 2, 128, 4}, ArchVariant(Objective::gpt2));
  CHECK(render_estimate(est) == "c_forward: 851968\nc_train: 2359296\ncontext_share: 0.0769\n");
}

}
