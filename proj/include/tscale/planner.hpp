#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tscale/checked.hpp"
#include "tscale/results.hpp"
#include "tscale/shape.hpp"

namespace tscale {

// Short sequences are packed to 128 tokens, long ones to 512.
enum class Partition { short_seq, long_seq };

std::string_view to_string(Partition p);
Partition parse_partition(std::string_view s);
std::int64_t max_seq_len(Partition p);

struct PartitionStats {
  Count total_tokens = 0;
  double avg_seq_len = 0.0;

  // round(total_tokens / avg_seq_len)
  Count n_sequences() const;
};

struct CorpusStats {
  PartitionStats short_seq;
  PartitionStats long_seq;

  const PartitionStats& at(Partition p) const {
    return p == Partition::short_seq ? short_seq : long_seq;
  }

  // Token statistics of the WikiText-103 partitions under each tokenizer.
  static CorpusStats builtin(Objective o);
};

// Throws ValidationError on non-positive totals or averages above the
// partition length.
void validate_stats(const CorpusStats& stats);

// JSON array of {partition, total_tokens, avg_seq_len}.
CorpusStats stats_from_json(std::string_view text);
std::string stats_to_json(const CorpusStats& stats, int indent = 2);

// ceil(n_sequences / batch_size)
Count steps_per_epoch(const CorpusStats& stats, Partition partition, Count batch_size);

struct Phase {
  Partition partition = Partition::short_seq;
  std::int64_t seq_len = 128;
  Count batch_size = 0;
  Count epochs = 0;
  Count steps = 0;

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct Schedule {
  std::vector<Phase> phases;  // short phase first
  Count warmup_steps = 0;
  Count total_steps = 0;

  double warmup_fraction() const;
  double share(Partition p) const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct ScheduleRequest {
  Count epochs_short = 0;
  Count epochs_long = 0;
  Count batch_short = 64;
  Count batch_long = 16;
  Count warmup_steps = 1000;
  // When set, warmup = round(fraction * total_steps) and warmup_steps is ignored.
  std::optional<double> warmup_fraction;
};

Schedule build_schedule(const CorpusStats& stats, const ScheduleRequest& request);

struct ThroughputKey {
  std::string shape_id;
  std::int64_t seq_len = 0;
  Count batch_size = 0;

  auto operator<=>(const ThroughputKey&) const = default;
};

struct ThroughputProfile {
  std::map<ThroughputKey, double> seconds_per_step;

  void set(const ThroughputKey& key, double seconds);
};

struct StepObservation {
  double elapsed_seconds = 0.0;
  double steps = 0.0;
};

// Least-squares slope through the origin: sum(t s) / sum(s^2).
double calibrate_throughput(std::span<const StepObservation> observations);

// Delimited run log with columns elapsed_seconds, step.
std::vector<StepObservation> parse_run_log(std::string_view text);

// Sum over phases of steps * seconds_per_step[(shape_id, seq_len, batch)].
double estimate_wall_clock(const Schedule& schedule, const ThroughputProfile& profile,
                           std::string_view shape_id);

struct BudgetDelta {
  std::string label;
  double delta_time = 0.0;      // seconds, variant - baseline
  double delta_time_pct = 0.0;  // percent of baseline time
  double delta_score = 0.0;     // GLUE-Large points
  // Points lost per hour saved; negative when the variant also scores higher.
  std::optional<double> score_loss_per_hour_saved;
  bool dominates = false;  // faster and not worse
  bool preferred = false;  // best trade-off among the variants
};

struct BudgetReport {
  double baseline_time = 0.0;
  double baseline_score = 0.0;
  std::vector<BudgetDelta> variants;
};

// Records must carry total_time and a GLUE-Large value (reported or
// computable). `labels` may be empty or one per variant.
BudgetReport compare_budgets(const RunRecord& baseline, std::span<const RunRecord> variants,
                             std::span<const std::string> labels = {});

std::string render_budget_report(const BudgetReport& report);

template <typename T>
struct ManifestField {
  T value{};
  bool overridden = false;

  friend bool operator==(const ManifestField&, const ManifestField&) = default;
};

struct ExperimentManifest {
  ShapeConfig shape;
  ArchVariant arch;
  VocabSpec vocab;
  Schedule schedule;
  ManifestField<double> adam_beta1{0.9};
  ManifestField<double> adam_beta2{0.999};
  ManifestField<double> adam_eps{1e-6};
  ManifestField<double> weight_decay{0.01};
  ManifestField<double> peak_lr{1e-4};
  ManifestField<double> dropout{0.1};
  ManifestField<std::string> activation{"gelu"};
  ManifestField<std::int64_t> finetune_epochs{3};
  ManifestField<std::int64_t> finetune_batch{16};
  ManifestField<double> finetune_lr{2e-5};

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

// Override keys: adam_beta1, adam_beta2, adam_eps, weight_decay, peak_lr,
// dropout, activation, finetune.epochs, finetune.batch, finetune.lr.
ExperimentManifest emit_manifest(const ShapeConfig& shape, ArchVariant arch, const VocabSpec& vocab,
                                 const Schedule& schedule,
                                 const std::map<std::string, std::string>& overrides = {});

// Floating constants in shortest round-trip scientific notation; overridden
// fields are written as {"value": ..., "override": true}.
std::string manifest_to_json(const ExperimentManifest& manifest);
ExperimentManifest manifest_from_json(std::string_view text);

}  // namespace tscale
