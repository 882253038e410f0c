#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tscale/checked.hpp"
#include "tscale/shape.hpp"

namespace tscale {

enum class Task { mnli_m, mnli_mm, qqp, qnli, sst2, cola };

inline constexpr std::array<Task, 6> all_tasks{Task::mnli_m, Task::mnli_mm, Task::qqp,
                                              Task::qnli,   Task::sst2,    Task::cola};

std::string_view task_column(Task t);  // "mnli_m"
std::string_view task_label(Task t);   // "MNLI-m"

struct RunRecord {
  ShapeConfig shape;
  ArchVariant arch;
  std::map<Task, double> scores;  // percentages; CoLA kept as given
  std::optional<double> total_time;
  std::optional<double> final_val_loss;
  std::optional<double> phi;
  // Ingested as-is when component scores were not published.
  std::optional<double> glue_large_reported;
  // Advisory; reports always recompute 12 L H^2.
  std::optional<Count> n_model_reported;
  std::size_t source_line = 0;  // 0 when not parsed from a file

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct GlueLarge {
  double value = 0.0;    // unrounded mean
  double display = 0.0;  // one decimal, half away from zero
};

// Mean of MNLI-m, QQP and QNLI. Throws ValidationError naming a missing task.
GlueLarge glue_large(const RunRecord& record);

// Reported value when present, otherwise the display value of glue_large.
double effective_glue_large(const RunRecord& record);

// Set only when the record carries both a reported value and the three
// components: true iff the reported value equals the computed display value.
std::optional<bool> glue_large_consistent(const RunRecord& record);

// Records file columns.
inline constexpr std::array<std::string_view, 14> record_columns{
    "objective", "heads",  "width", "layers", "context_len", "mnli_m",         "mnli_mm",
    "qqp",       "qnli",   "sst2",  "cola",   "total_time_s", "final_val_loss", "phi"};
// Accepted in addition to record_columns, may be omitted from the header.
inline constexpr std::array<std::string_view, 2> optional_record_columns{"glue_large", "n_model"};

std::vector<RunRecord> parse_run_records(std::string_view document);
std::string write_run_records(const std::vector<RunRecord>& records);

enum class GroupBy { objective, scaled_dim, phi };
GroupBy parse_group_by(std::string_view s);

struct ReportRow {
  RunRecord record;
  Count n_model = 0;  // recomputed
  bool size_mismatch = false;
  std::optional<double> glue_large;           // effective value
  std::optional<double> glue_large_computed;  // display value from components
  std::optional<bool> glue_large_consistent;
  bool smallest_loss = false;
};

struct ReportGroup {
  std::string key;
  std::vector<ReportRow> rows;  // ascending n_model
};

struct Report {
  GroupBy group_by = GroupBy::objective;
  std::vector<ReportGroup> groups;  // ascending key

  std::vector<std::string> flags() const;
};

Report build_report(const std::vector<RunRecord>& records, GroupBy group_by);

std::string render_report_table(const Report& report);
std::string render_report_json(const Report& report);

}  // namespace tscale
