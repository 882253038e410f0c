#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tscale/checked.hpp"
#include "tscale/results.hpp"
#include "tscale/shape.hpp"

// Values transcribed from the published shape-scaling experiments on
// WikiText-103 pre-training with GLUE fine-tuning. Used by `verify` and the
// acceptance suite as fixed oracles.
namespace tscale::published {

struct SizedShape {
  std::int64_t heads, width, layers;
  Count n_model;  // as printed
};

// Width sweep, depth sweep, multi-dimension comparison and grid search.
std::span<const SizedShape> size_rows();

struct ScoredRun {
  std::string table;  // "width-sweep", "depth-sweep", "batch-vs-steps", "compound-scaled"
  std::string label;
  Objective objective;
  std::int64_t heads, width, layers;
  double mnli_m, mnli_mm, qqp, qnli, sst2;
  std::optional<double> cola;
  double glue_large;  // as printed
  std::optional<double> total_time;
  std::optional<double> phi;
  std::optional<Count> n_model;  // as printed

  RunRecord to_record() const;
};

// Every run whose three GLUE-Large components are printed.
std::span<const ScoredRun> scored_runs();

// Batch-vs-steps runs in print order: for each of BERT then RoBERTa,
// baseline, half steps, half batch.
std::vector<ScoredRun> batch_vs_steps();

struct ScaledRow {
  double phi;
  std::int64_t heads, width, layers;
  Count n_model;  // as printed
};

// Base winner (L=3, H=104) and the three scaled systems.
inline constexpr std::int64_t winner_layers = 3;
inline constexpr std::int64_t winner_width = 104;
std::span<const ScaledRow> scaled_rows();

// Grid search: target 393,216, A=2.
inline constexpr Count grid_target = 393'216;
std::span<const SizedShape> grid_rows();

// Runs reported with GLUE-Large only, in the records-file schema.
std::vector<RunRecord> summary_records();

enum class Status { match, mismatch };

struct Check {
  std::string section;
  std::string item;
  std::string expected;
  std::string actual;
  Status status = Status::match;
};

// Recomputes every published arithmetic artifact. Mismatches are findings
// about the printed values (or this toolkit) and are reported, not thrown.
std::vector<Check> reproduction_report();

}  // namespace tscale::published
