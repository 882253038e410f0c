#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "tscale/errors.hpp"
#include "tscale/shape.hpp"

using namespace tscale;

TEST_SUITE("shape") {

TEST_CASE("approximate size for the published depth sweep") {
  CHECK(approx_model_size({2, 128, 36, 128, 4}) == 7'077'888);
  CHECK(approx_model_size({2, 128, 2, 128, 4}) == 393'216);
  CHECK(approx_model_size({2, 544, 2, 128, 4}) == 7'102'464);
}

TEST_CASE("approximate size ignores head count") {
  for (std::int64_t a : {1, 2, 4, 8, 16, 32, 64, 128}) {
    CHECK(approx_model_size({a, 128, 36, 128, 4}) == 7'077'888);
  }
}

TEST_CASE("exact count equals the approximation without biases and layer norms") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const std::int64_t A = 1 + static_cast<std::int64_t>(rng() % 16);
    const std::int64_t H = A * (1 + static_cast<std::int64_t>(rng() % 64));
    const std::int64_t L = 1 + static_cast<std::int64_t>(rng() % 48);
    const auto pc = exact_param_count({A, H, L, 128, 4}, ArchVariant(Objective::bert),
                                      VocabSpec::defaults_for(Objective::bert));
    CHECK(pc.n_nonembed_exact == pc.n_model_approx);
  }
}

TEST_CASE("exact count matches tensor enumeration") {
  for (auto obj : {Objective::bert, Objective::roberta, Objective::gpt2}) {
    for (int mask = 0; mask < 8; ++mask) {
      const bool bias = mask & 1, ln = mask & 2, tied = !(mask & 4);
      const auto v = VocabSpec::defaults_for(obj);
      const auto pc =
          exact_param_count({4, 96, 3, 128, 4}, ArchVariant(obj), v, ParamOptions{bias, ln, tied});
      const auto t = oracle::enumerate_tensors(4, 96, 3, 4, v.tokens, v.positions, v.segments,
                                               bias, ln, tied);
      CHECK(pc.n_nonembed_exact == t.nonembed);
      CHECK(pc.n_embed == t.embed);
    }
  }
}

TEST_CASE("bert embeddings for H=128") {
  // (30522 + 512 + 2) * 128
  const auto pc = exact_param_count({2, 128, 36, 128, 4}, ArchVariant(Objective::bert),
                                    VocabSpec::defaults_for(Objective::bert));
  CHECK(pc.n_embed == 3'972'608);
  CHECK(pc.breakdown.find(component::embeddings)->second == 3'972'608);
}

TEST_CASE("breakdown sums to the totals") {
  const auto pc = exact_param_count({4, 256, 6, 512, 4}, ArchVariant(Objective::gpt2),
                                    VocabSpec::defaults_for(Objective::gpt2), {true, true, false});
  Count sum = 0;
  for (const auto& [k, v] : pc.breakdown) sum += v;
  CHECK(sum == pc.total());
  CHECK(pc.breakdown.find(component::input_proj)->second == 6ull * 3 * 256 * 256);
}

TEST_CASE("bias and layer-norm overhead shrinks as width grows") {
  double prev = 1e9;
  for (std::int64_t h = 64; h <= 4096; h *= 2) {
    const auto pc = exact_param_count({1, h, 12, 128, 4}, ArchVariant{}, VocabSpec{}, {true, true, true});
    const double ratio =
        static_cast<double>(pc.n_nonembed_exact - pc.n_model_approx) / pc.n_model_approx;
    CHECK(ratio < prev);
    prev = ratio;
  }
}

TEST_CASE("nearest head count") {
  CHECK(nearest_head_count(469) == 7);
  CHECK(nearest_head_count(585) == 9);
  CHECK(nearest_head_count(832) == 13);
  CHECK(nearest_head_count(104) == 2);
  CHECK(nearest_head_count(1) == 1);
  CHECK(nearest_head_count(768) == 12);
  // 96 / 64 = 1.5: ties go to the larger divisor.
  CHECK(nearest_head_count(96) == 2);
  for (std::int64_t h = 1; h <= 3000; ++h) {
    const auto a = nearest_head_count(h);
    REQUIRE(h % a == 0);
    CHECK(a == oracle::nearest_divisor(h));
  }
  CHECK_THROWS_AS(nearest_head_count(0), ValidationError);
}

TEST_CASE("validation") {
  CHECK(validate_shape({2, 128, 2, 128, 4}).empty());
  const auto v = validate_shape({3, 128, 0, 128, 4});
  REQUIRE(v.size() == 2);
  CHECK(v[0].field == "layers");
  CHECK(v[1].field == "heads");
  CHECK_THROWS_AS(approx_model_size({3, 128, 2, 128, 4}), ValidationError);
  CHECK_THROWS_AS(approx_model_size({1, -4, 2, 128, 4}), ValidationError);
  CHECK_FALSE(validate_vocab({100, 10, 1}).empty());
  CHECK(validate_vocab({100, 10, 2}).empty());
}

TEST_CASE("overflow is reported, not wrapped") {
  CHECK_THROWS_AS(approx_model_size({1, 4'000'000'000, 4'000'000'000, 1, 4}), OverflowError);
}

TEST_CASE("architecture variants") {
  CHECK(ArchVariant(Objective::gpt2).causal());
  CHECK_FALSE(ArchVariant(Objective::roberta).causal());
  CHECK(ArchVariant(Objective::bert).uses_segments());
  CHECK_FALSE(ArchVariant(Objective::roberta).uses_segments());
  CHECK(parse_objective("gpt2_style") == Objective::gpt2);
  CHECK(parse_objective("roberta") == Objective::roberta);
  CHECK_THROWS_AS(parse_objective("t5"), ValidationError);
}

TEST_CASE("shape document round trip") {
  ShapeDocument doc{{8, 512, 6, 256, 4}, ArchVariant(Objective::roberta),
                    VocabSpec::defaults_for(Objective::roberta)};
  CHECK(shape_from_json(shape_to_json(doc)) == doc);
  CHECK(shape_from_json(shape_to_json(doc, -1)) == doc);
}

TEST_CASE("shape document rejects bad input") {
  CHECK_THROWS_AS(shape_from_json("{"), ValidationError);
  CHECK_THROWS_AS(shape_from_json(R"({"heads":2,"width":128,"layers":2,"context_len":128,)"
                                  R"("objective":"bert","colour":1})"),
                  ValidationError);
  CHECK_THROWS_AS(shape_from_json(R"({"heads":3,"width":128,"layers":2,"context_len":128,)"
                                  R"("objective":"bert"})"),
                  ValidationError);
}

}
