#include "tscale/published.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "tscale/compute.hpp"
#include "tscale/planner.hpp"
#include "tscale/scaler.hpp"
#include "tscale/text.hpp"

namespace tscale::published {

namespace {

constexpr std::array<SizedShape, 20> kSizes{{
    // width sweep
    {2, 128, 2, 393'216},
    {2, 192, 2, 884'736},
    {2, 288, 2, 1'990'656},
    {2, 384, 2, 3'538'944},
    {2, 544, 2, 7'102'464},
    // depth sweep
    {2, 128, 5, 983'040},
    {2, 128, 10, 1'966'080},
    {2, 128, 18, 3'538'944},
    {2, 128, 36, 7'077'888},
    // multi-dimension
    {2, 204, 7, 3'495'744},
    {2, 256, 9, 7'077'888},
    {8, 544, 2, 7'102'464},
    // grid search
    {2, 104, 3, 389'376},
    {2, 90, 4, 388'800},
    {2, 74, 6, 394'272},
    {2, 64, 8, 393'216},
    {2, 58, 10, 403'680},
    {2, 52, 12, 389'376},
    {2, 48, 14, 387'072},
    {2, 46, 16, 406'272},
}};

constexpr std::array<SizedShape, 9> kGrid{{
    {2, 128, 2, 393'216},
    {2, 104, 3, 389'376},
    {2, 90, 4, 388'800},
    {2, 74, 6, 394'272},
    {2, 64, 8, 393'216},
    {2, 58, 10, 403'680},
    {2, 52, 12, 389'376},
    {2, 48, 14, 387'072},
    {2, 46, 16, 406'272},
}};

constexpr std::array<ScaledRow, 3> kScaled{{
    {19.865, 7, 469, 4, 10'558'128},
    {20.578, 9, 585, 5, 20'553'500},
    {21.716, 13, 832, 5, 41'553'440},
}};

using O = Objective;
constexpr auto none = std::nullopt;

ScoredRun sweep(const char* table, O o, std::int64_t w, std::int64_t l, double glue, double m,
                double mm, double qqp, double qnli, double sst2, Count n) {
  return {table, fmt::format("A=2 H={} L={}", w, l), o, 2, w, l, m, mm, qqp, qnli, sst2, none, glue,
          none, none, n};
}

ScoredRun budget(O o, const char* label, double time, double glue, double m, double mm, double qqp,
                 double qnli, double sst2) {
  return {"batch-vs-steps", label, o, 2, 256, 9, m, mm, qqp, qnli, sst2, none, glue, time, none,
          7'077'888};
}

const std::vector<ScoredRun>& scored() {
  static const std::vector<ScoredRun> rows = [] {
    std::vector<ScoredRun> r;
    const char* ws = "width-sweep";
    r.push_back(sweep(ws, O::bert, 128, 2, 65.4, 59.0, 60.2, 72.3, 64.8, 78.0, 393'216));
    r.push_back(sweep(ws, O::bert, 192, 2, 67.2, 62.1, 62.8, 74.0, 65.4, 82.6, 884'736));
    r.push_back(sweep(ws, O::bert, 288, 2, 69.3, 63.7, 65.2, 76.0, 68.3, 82.0, 1'990'656));
    r.push_back(sweep(ws, O::bert, 384, 2, 72.3, 65.7, 66.6, 77.8, 73.2, 81.1, 3'538'944));
    r.push_back(sweep(ws, O::bert, 544, 2, 72.3, 66.8, 68.1, 78.0, 72.0, 83.3, 7'102'464));
    r.push_back(sweep(ws, O::gpt2, 128, 2, 61.6, 56.3, 56.2, 66.1, 62.3, 79.8, 393'216));
    r.push_back(sweep(ws, O::gpt2, 192, 2, 62.9, 58.0, 58.4, 68.7, 61.9, 79.7, 884'736));
    r.push_back(sweep(ws, O::gpt2, 288, 2, 63.9, 58.7, 58.7, 70.9, 62.2, 81.7, 1'990'656));
    r.push_back(sweep(ws, O::gpt2, 384, 2, 64.9, 59.8, 59.6, 71.9, 63.0, 81.2, 3'538'944));
    r.push_back(sweep(ws, O::gpt2, 544, 2, 65.0, 59.8, 59.7, 72.4, 62.9, 82.5, 7'102'464));
    r.push_back(sweep(ws, O::roberta, 128, 2, 60.1, 53.7, 55.1, 64.7, 61.9, 79.2, 393'216));
    r.push_back(sweep(ws, O::roberta, 192, 2, 60.5, 54.4, 55.4, 65.0, 62.0, 80.8, 884'736));
    r.push_back(sweep(ws, O::roberta, 288, 2, 63.0, 57.5, 58.0, 68.1, 63.4, 80.3, 1'990'656));
    r.push_back(sweep(ws, O::roberta, 384, 2, 64.3, 59.4, 59.8, 69.0, 64.6, 81.9, 3'538'944));
    r.push_back(sweep(ws, O::roberta, 544, 2, 66.5, 60.2, 60.7, 72.7, 66.5, 81.8, 7'102'464));

    const char* ds = "depth-sweep";
    r.push_back(sweep(ds, O::bert, 128, 2, 65.4, 59.0, 60.2, 72.3, 64.8, 78.0, 393'216));
    r.push_back(sweep(ds, O::bert, 128, 5, 68.9, 62.1, 64.2, 75.0, 68.6, 79.8, 983'040));
    r.push_back(sweep(ds, O::bert, 128, 10, 72.0, 65.3, 66.9, 76.7, 74.1, 81.8, 1'966'080));
    r.push_back(sweep(ds, O::bert, 128, 18, 74.2, 67.2, 68.6, 77.8, 77.7, 82.2, 3'538'944));
    r.push_back(sweep(ds, O::bert, 128, 36, 75.9, 69.7, 70.4, 79.7, 78.3, 83.3, 7'077'888));
    r.push_back(sweep(ds, O::gpt2, 128, 2, 61.6, 56.3, 56.2, 66.1, 62.3, 79.8, 393'216));
    r.push_back(sweep(ds, O::gpt2, 128, 5, 62.4, 57.6, 56.1, 67.4, 62.0, 80.5, 983'040));
    r.push_back(sweep(ds, O::gpt2, 128, 10, 62.0, 56.9, 57.0, 67.7, 61.5, 81.4, 1'966'080));
    r.push_back(sweep(ds, O::gpt2, 128, 18, 61.8, 56.1, 56.4, 66.8, 62.4, 80.6, 3'538'944));
    r.push_back(sweep(ds, O::gpt2, 128, 36, 61.4, 56.6, 56.7, 66.6, 61.1, 80.7, 7'077'888));
    r.push_back(sweep(ds, O::roberta, 128, 2, 60.1, 53.7, 55.1, 64.7, 61.9, 79.2, 393'216));
    r.push_back(sweep(ds, O::roberta, 128, 5, 64.8, 59.5, 60.6, 70.4, 64.4, 80.2, 983'040));
    r.push_back(sweep(ds, O::roberta, 128, 10, 67.1, 60.9, 61.9, 72.0, 68.5, 81.7, 1'966'080));
    r.push_back(sweep(ds, O::roberta, 128, 18, 67.2, 62.9, 64.3, 74.3, 64.3, 80.0, 3'538'944));
    r.push_back(sweep(ds, O::roberta, 128, 36, 73.3, 67.6, 69.1, 77.3, 75.0, 82.6, 7'077'888));

    r.push_back(budget(O::bert, "baseline", 21'358, 78.6, 72.0, 72.7, 81.2, 82.5, 83.4));
    r.push_back(budget(O::bert, "half steps", 10'736, 77.4, 70.2, 71.2, 80.5, 81.5, 82.5));
    r.push_back(budget(O::bert, "half batch", 14'575, 78.2, 71.5, 71.9, 80.9, 82.3, 83.9));
    r.push_back(budget(O::roberta, "baseline", 19'760, 75.0, 68.4, 70.9, 78.2, 78.3, 75.0));
    r.push_back(budget(O::roberta, "half steps", 9'906, 73.7, 67.0, 69.0, 76.7, 77.4, 83.5));
    r.push_back(budget(O::roberta, "half batch", 13'101, 75.6, 68.2, 70.0, 79.5, 78.9, 84.4));

    r.push_back({"compound-scaled", "phi=20.578", O::bert, 9, 585, 5, 75.3, 75.5, 83.5, 83.4, 85.1,
                 16.5, 80.7, none, 20.578, 20'553'500});
    r.push_back({"compound-scaled", "phi=21.716", O::bert, 13, 832, 5, 75.6, 75.9, 84.1, 84.4, 85.8,
                 21.3, 81.4, none, 21.716, 41'553'440});
    return r;
  }();
  return rows;
}

RunRecord summary(Objective o, std::int64_t a, std::int64_t h, std::int64_t l, double glue,
                  std::optional<double> time = none, std::optional<double> loss = none,
                  std::optional<double> phi = none, std::optional<Count> n = none) {
  RunRecord r;
  r.arch = ArchVariant(o);
  r.shape = ShapeConfig{a, h, l, 128, 4};
  r.glue_large_reported = glue;
  r.total_time = time;
  r.final_val_loss = loss;
  r.phi = phi;
  r.n_model_reported = n;
  return r;
}

Check check(std::string section, std::string item, std::string expected, std::string actual) {
  const Status s = expected == actual ? Status::match : Status::mismatch;
  return {std::move(section), std::move(item), std::move(expected), std::move(actual), s};
}

}  // namespace

std::span<const SizedShape> size_rows() { return kSizes; }
std::span<const SizedShape> grid_rows() { return kGrid; }
std::span<const ScaledRow> scaled_rows() { return kScaled; }
std::span<const ScoredRun> scored_runs() { return scored(); }

std::vector<ScoredRun> batch_vs_steps() {
  std::vector<ScoredRun> out;
  for (const auto& r : scored()) {
    if (r.table == "batch-vs-steps") out.push_back(r);
  }
  return out;
}

RunRecord ScoredRun::to_record() const {
  RunRecord r;
  r.arch = ArchVariant(objective);
  r.shape = ShapeConfig{heads, width, layers, 128, 4};
  r.scores = {{Task::mnli_m, mnli_m}, {Task::mnli_mm, mnli_mm}, {Task::qqp, qqp},
              {Task::qnli, qnli},     {Task::sst2, sst2}};
  if (cola) r.scores[Task::cola] = *cola;
  r.glue_large_reported = glue_large;
  r.total_time = total_time;
  r.phi = phi;
  r.n_model_reported = n_model;
  return r;
}

std::vector<RunRecord> summary_records() {
  return {
      summary(O::bert, 2, 204, 7, 77.1),
      summary(O::bert, 2, 256, 9, 78.6, 21'358, 3.24, none, 7'077'888),
      summary(O::bert, 4, 256, 9, 78.9, 21'703, 3.29, none, 7'077'888),
      summary(O::bert, 7, 469, 4, 79.4, 20'873, 3.13, 19.865, 10'558'128),
      summary(O::bert, 8, 544, 2, 78.4),
      summary(O::gpt2, 2, 204, 7, 63.6),
      summary(O::gpt2, 2, 256, 9, 63.8),
      summary(O::gpt2, 8, 544, 2, 66.0),
      summary(O::roberta, 2, 204, 7, 72.9),
      summary(O::roberta, 2, 256, 9, 75.0),
      summary(O::roberta, 8, 544, 2, 70.9),
  };
}

std::vector<Check> reproduction_report() {
  std::vector<Check> out;
  auto g = [](Count v) { return text::grouped(v); };

  for (const auto& row : size_rows()) {
    const ShapeConfig s{row.heads, row.width, row.layers, 128, 4};
    out.push_back(check("model size", fmt::format("A={} H={} L={}", row.heads, row.width, row.layers),
                        g(row.n_model), g(approx_model_size(s))));
  }

  const auto policy = fit_coefficients(winner_layers, winner_width);
  out.push_back(check("compound scaling", "phi0 = log2(L H^2)", "14.99", fmt::format("{:.2f}", policy.phi0)));
  out.push_back(check("compound scaling", "alpha", "1.076", fmt::format("{:.3f}", policy.alpha)));
  out.push_back(check("compound scaling", "beta", "1.363", fmt::format("{:.3f}", policy.beta)));
  for (const auto& row : scaled_rows()) {
    const auto scaled = scale(policy, row.phi, ShapeConfig{1, 1, 1, 128, 4});
    const auto& s = scaled.shape;
    out.push_back(check("compound scaling", fmt::format("shape at phi={}", row.phi),
                        fmt::format("A={} H={} L={}", row.heads, row.width, row.layers),
                        fmt::format("A={} H={} L={}", s.heads, s.width, s.layers)));
    out.push_back(check("compound scaling", fmt::format("N_model at phi={}", row.phi),
                        g(row.n_model), g(approx_model_size(s))));
  }

  const std::array<std::int64_t, 9> depths{2, 3, 4, 6, 8, 10, 12, 14, 16};
  auto grid = grid_candidates(grid_target, 2, depths);
  for (const auto& row : grid_rows()) {
    std::string actual = "absent";
    for (const auto& c : grid.candidates) {
      if (c.shape.layers == row.layers) actual = fmt::format("H={} N={}", c.shape.width, g(c.n_model));
    }
    out.push_back(check("grid search", fmt::format("L={}", row.layers),
                        fmt::format("H={} N={}", row.width, g(row.n_model)), actual));
  }

  for (const auto& run : scored_runs()) {
    out.push_back(check("GLUE-Large",
                        fmt::format("{} {} {}", run.table, to_string(run.objective), run.label),
                        fmt::format("{:.1f}", run.glue_large),
                        fmt::format("{:.1f}", glue_large(run.to_record()).display)));
  }

  const auto stats = CorpusStats::builtin(Objective::bert);
  const auto sched = build_schedule(stats, ScheduleRequest{6, 6, 64, 16, 1000, std::nullopt});
  const double dev = std::abs(static_cast<double>(sched.total_steps) - 137'000.0) / 137'000.0;
  out.push_back(check("schedule",
                      fmt::format("total steps {} within 1% of 137,000", g(sched.total_steps)),
                      "yes", dev <= 0.01 ? "yes" : "no"));
  const double share = sched.share(Partition::short_seq);
  out.push_back(check("schedule", fmt::format("short-phase share {:.1f}% in [85%, 95%]", 100.0 * share),
                      "yes", share >= 0.85 && share <= 0.95 ? "yes" : "no"));

  const auto runs = batch_vs_steps();
  for (std::size_t base = 0; base < runs.size(); base += 3) {
    const auto baseline = runs[base].to_record();
    const std::vector<RunRecord> variants{runs[base + 1].to_record(), runs[base + 2].to_record()};
    const auto report = compare_budgets(baseline, variants);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& run = runs[base + 1 + i];
      const auto& d = report.variants[i];
      out.push_back(check(
          "budget trade-off", fmt::format("{} {}", to_string(run.objective), run.label),
          fmt::format("dtime {} dscore {:+.1f}",
                      text::grouped_signed(static_cast<std::int64_t>(*run.total_time - *runs[base].total_time)),
                      run.glue_large - runs[base].glue_large),
          fmt::format("dtime {} dscore {:+.1f}",
                      text::grouped_signed(static_cast<std::int64_t>(d.delta_time)), d.delta_score)));
    }
  }
  return out;
}

}  // namespace tscale::published
