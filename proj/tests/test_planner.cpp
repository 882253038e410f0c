#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "tscale/errors.hpp"
#include "tscale/planner.hpp"
#include "tscale/results.hpp"

using namespace tscale;

namespace {

RunRecord timed(double seconds, double glue) {
  RunRecord r;
  r.shape = {2, 128, 2, 128, 4};
  r.total_time = seconds;
  r.glue_large_reported = glue;
  return r;
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("bert schedule from the built-in token statistics") {
  const auto stats = CorpusStats::builtin(Objective::bert);
  const auto n_short = static_cast<std::uint64_t>(std::llround(110'888'186 / 110.04));
  const auto n_long = static_cast<std::uint64_t>(std::llround(43'274'856 / 375.52));
  CHECK(stats.short_seq.n_sequences() == n_short);
  CHECK(stats.long_seq.n_sequences() == n_long);
  CHECK(steps_per_epoch(stats, Partition::short_seq, 64) == oracle::ceil_div(n_short, 64));
  CHECK(steps_per_epoch(stats, Partition::short_seq, 64) == 15'746);
  CHECK(steps_per_epoch(stats, Partition::long_seq, 16) == 7'203);

  const auto s = build_schedule(stats, {6, 6, 64, 16, 1000, std::nullopt});
  REQUIRE(s.phases.size() == 2);
  CHECK(s.phases[0].partition == Partition::short_seq);
  CHECK(s.phases[0].seq_len == 128);
  CHECK(s.phases[0].steps == 6 * 15'746);
  CHECK(s.phases[1].seq_len == 512);
  CHECK(s.phases[1].steps == 6 * 7'203);
  CHECK(s.total_steps == 137'694);
  CHECK(s.warmup_steps == 1000);
  CHECK(s.warmup_fraction() == doctest::Approx(1000.0 / 137'694));
  CHECK(s.share(Partition::short_seq) + s.share(Partition::long_seq) == doctest::Approx(1.0));
}

TEST_CASE("warmup as a fraction") {
  const auto stats = CorpusStats::builtin(Objective::roberta);
  ScheduleRequest req{10, 10, 64, 16, 1000, 0.06};
  const auto s = build_schedule(stats, req);
  CHECK(s.warmup_steps == static_cast<Count>(std::llround(0.06 * s.total_steps)));
  req.warmup_fraction = 1.5;
  CHECK_THROWS_AS(build_schedule(stats, req), ValidationError);
}

TEST_CASE("schedule validation") {
  const auto stats = CorpusStats::builtin(Objective::bert);
  CHECK_THROWS_AS(build_schedule(stats, {0, 6, 64, 16, 1000, std::nullopt}), ValidationError);
  CHECK_THROWS_AS(build_schedule(stats, {6, 6, 0, 16, 1000, std::nullopt}), ValidationError);
  CHECK_THROWS_AS(build_schedule(stats, {1, 1, 64, 16, 10'000'000, std::nullopt}), ValidationError);
  CorpusStats bad = stats;
  bad.short_seq.avg_seq_len = 200;
  CHECK_THROWS_AS(build_schedule(bad, {6, 6, 64, 16, 1000, std::nullopt}), ValidationError);
}

TEST_CASE("halving the batch doubles the steps up to rounding") {
  const auto stats = CorpusStats::builtin(Objective::gpt2);
  for (Count b : {8u, 16u, 32u, 64u}) {
    const auto full = steps_per_epoch(stats, Partition::short_seq, b);
    const auto half = steps_per_epoch(stats, Partition::short_seq, b / 2);
    CHECK(half >= 2 * full - 1);
    CHECK(half <= 2 * full);
  }
}

TEST_CASE("corpus statistics documents") {
  const auto stats = CorpusStats::builtin(Objective::gpt2);
  const auto back = stats_from_json(stats_to_json(stats));
  CHECK(back.short_seq.total_tokens == stats.short_seq.total_tokens);
  CHECK(back.long_seq.avg_seq_len == stats.long_seq.avg_seq_len);
  CHECK_THROWS_AS(stats_from_json(R"([{"partition":"short","total_tokens":10,"avg_seq_len":5}])"),
                  ValidationError);
  CHECK_THROWS_AS(stats_from_json(R"([{"partition":"medium","total_tokens":10,"avg_seq_len":5}])"),
                  ValidationError);
}

TEST_CASE("throughput calibration") {
  const std::vector<StepObservation> exact{{1.0, 10}, {2.0, 20}, {3.0, 30}};
  CHECK(calibrate_throughput(exact) == doctest::Approx(0.1));
  // Least squares through the origin: sum(t s) / sum(s^2).
  const std::vector<StepObservation> noisy{{1.1, 10}, {1.9, 20}};
  CHECK(calibrate_throughput(noisy) == doctest::Approx((11.0 + 38.0) / 500.0));
  CHECK_THROWS_AS(calibrate_throughput(std::vector<StepObservation>{}), ValidationError);

  const auto log = parse_run_log("step,elapsed_seconds\n0,0\n100,12.5\n200,25\n");
  REQUIRE(log.size() == 2);
  CHECK(calibrate_throughput(log) == doctest::Approx(0.125));
  CHECK_THROWS_AS(parse_run_log("step,seconds\n1,2\n"), ValidationError);
}

TEST_CASE("wall-clock estimate") {
  const auto s = build_schedule(CorpusStats::builtin(Objective::bert), {6, 6, 64, 16, 1000, std::nullopt});
  ThroughputProfile p;
  p.set({"x", 128, 64}, 0.05);
  CHECK_THROWS_AS(estimate_wall_clock(s, p, "x"), ValidationError);
  p.set({"x", 512, 16}, 0.12);
  CHECK(estimate_wall_clock(s, p, "x") == doctest::Approx(94'476 * 0.05 + 43'218 * 0.12));
  CHECK_THROWS_AS(estimate_wall_clock(s, p, "y"), ValidationError);
  CHECK_THROWS_AS(p.set({"x", 128, 64}, 0.0), ValidationError);
}

TEST_CASE("budget comparison") {
  const auto base = timed(21'358, 78.6);
  const std::vector<RunRecord> variants{timed(10'736, 77.4), timed(14'575, 78.2), timed(25'000, 79.0)};
  const std::vector<std::string> labels{"half steps", "half batch", "slower"};
  const auto r = compare_budgets(base, variants, labels);
  REQUIRE(r.variants.size() == 3);
  CHECK(r.variants[0].delta_time == doctest::Approx(-10'622));
  CHECK(r.variants[0].delta_score == doctest::Approx(-1.2));
  CHECK(r.variants[1].delta_time == doctest::Approx(-6'783));
  CHECK(r.variants[1].delta_score == doctest::Approx(-0.4));
  CHECK(r.variants[1].delta_time_pct == doctest::Approx(-100.0 * 6'783 / 21'358));
  CHECK(r.variants[0].score_loss_per_hour_saved);
  CHECK_FALSE(r.variants[2].score_loss_per_hour_saved);
  CHECK_FALSE(r.variants[0].dominates);
  // 0.4 / (6783 / 3600) < 1.2 / (10622 / 3600)
  CHECK(r.variants[1].preferred);
  CHECK_FALSE(r.variants[0].preferred);
  CHECK(r.variants[2].label == "slower");

  const auto better = compare_budgets(base, std::vector<RunRecord>{timed(20'000, 79.0)});
  CHECK(better.variants[0].dominates);
  CHECK(better.variants[0].label == "variant 1");

  RunRecord untimed;
  CHECK_THROWS_AS(compare_budgets(untimed, variants), ValidationError);
}

TEST_CASE("manifest defaults and overrides") {
  const ShapeConfig shape{2, 128, 4, 128, 4};
  const auto sched = build_schedule(CorpusStats::builtin(Objective::gpt2), {10, 10, 64, 16, 1000, std::nullopt});
  const auto gpt = emit_manifest(shape, ArchVariant(Objective::gpt2), VocabSpec::defaults_for(Objective::gpt2), sched);
  CHECK(gpt.peak_lr.value == doctest::Approx(2.5e-4));
  CHECK_FALSE(gpt.peak_lr.overridden);
  const auto bert = emit_manifest(shape, ArchVariant{}, VocabSpec::defaults_for(Objective::bert), sched);
  CHECK(bert.peak_lr.value == doctest::Approx(1e-4));
  CHECK(bert.adam_eps.value == doctest::Approx(1e-6));
  CHECK(bert.activation.value == "gelu");
  CHECK(bert.finetune_epochs.value == 3);

  const auto o = emit_manifest(shape, ArchVariant{}, VocabSpec::defaults_for(Objective::bert), sched,
                               {{"dropout", "0.2"}, {"finetune.batch", "32"}, {"activation", "relu"}});
  CHECK(o.dropout.value == doctest::Approx(0.2));
  CHECK(o.dropout.overridden);
  CHECK(o.finetune_batch.value == 32);
  CHECK(o.activation.overridden);
  CHECK_FALSE(o.adam_beta1.overridden);
  CHECK_THROWS_AS(emit_manifest(shape, ArchVariant{}, VocabSpec{}, sched, {{"momentum", "0.9"}}),
                  ValidationError);
  CHECK_THROWS_AS(emit_manifest(shape, ArchVariant{}, VocabSpec{}, sched, {{"dropout", "lots"}}),
                  ValidationError);
}

TEST_CASE("manifest document round trip") {
  const ShapeConfig shape{7, 469, 4, 128, 4};
  const auto sched = build_schedule(CorpusStats::builtin(Objective::bert), {6, 6, 64, 16, 1000, std::nullopt});
  const auto m = emit_manifest(shape, ArchVariant{}, VocabSpec::defaults_for(Objective::bert), sched,
                               {{"peak_lr", "5e-4"}, {"finetune.lr", "3e-5"}});
  const auto text = manifest_to_json(m);
  CHECK(manifest_from_json(text) == m);
  CHECK(manifest_to_json(manifest_from_json(text)) == text);
  CHECK(text.find("1e-06") != std::string::npos);
}

}
