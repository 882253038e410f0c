#include "tscale/results.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "json_io.hpp"
#include "tscale/text.hpp"

namespace tscale {

std::string_view task_column(Task t) {
  switch (t) {
    case Task::mnli_m: return "mnli_m";
    case Task::mnli_mm: return "mnli_mm";
    case Task::qqp: return "qqp";
    case Task::qnli: return "qnli";
    case Task::sst2: return "sst2";
    case Task::cola: return "cola";
  }
  return "?";
}

std::string_view task_label(Task t) {
  switch (t) {
    case Task::mnli_m: return "MNLI-m";
    case Task::mnli_mm: return "MNLI-mm";
    case Task::qqp: return "QQP";
    case Task::qnli: return "QNLI";
    case Task::sst2: return "SST-2";
    case Task::cola: return "CoLA";
  }
  return "?";
}

GlueLarge glue_large(const RunRecord& record) {
  double sum = 0.0;
  for (Task t : {Task::mnli_m, Task::qqp, Task::qnli}) {
    auto it = record.scores.find(t);
    if (it == record.scores.end()) {
      throw ValidationError(fmt::format("GLUE-Large needs {}, which is missing", task_label(t)));
    }
    sum += it->second;
  }
  const double mean = sum / 3.0;
  return {mean, text::round1(mean)};
}

namespace {

bool has_components(const RunRecord& r) {
  return r.scores.contains(Task::mnli_m) && r.scores.contains(Task::qqp) &&
         r.scores.contains(Task::qnli);
}

}  // namespace

double effective_glue_large(const RunRecord& record) {
  if (record.glue_large_reported) return *record.glue_large_reported;
  return glue_large(record).display;
}

std::optional<bool> glue_large_consistent(const RunRecord& record) {
  if (!record.glue_large_reported || !has_components(record)) return std::nullopt;
  return text::round1(*record.glue_large_reported) == glue_large(record).display;
}

// ---------------------------------------------------------------------------
// Records file

namespace {

std::optional<double> optional_real(const std::string& cell, std::string_view what) {
  if (cell.empty()) return std::nullopt;
  return text::parse_double(cell, what);
}

double check_score(double v, std::string_view column) {
  if (v < 0.0 || v > 100.0) {
    throw ValidationError(fmt::format("{} score {} outside [0, 100]", column, text::shortest(v)));
  }
  return v;
}

RunRecord parse_row(const text::DelimitedTable& table, const text::DelimitedRow& row) {
  auto cell = [&](std::string_view name) -> const std::string& {
    return row.cells[static_cast<std::size_t>(table.column(name))];
  };
  auto required_int = [&](std::string_view name) {
    const auto& c = cell(name);
    if (c.empty()) throw ValidationError(fmt::format("'{}' is required", name));
    return text::parse_int(c, name);
  };

  RunRecord r;
  r.source_line = row.line;
  if (cell("objective").empty()) throw ValidationError("'objective' is required");
  r.arch = ArchVariant(parse_objective(cell("objective")));
  r.shape.heads = required_int("heads");
  r.shape.width = required_int("width");
  r.shape.layers = required_int("layers");
  r.shape.context_len = required_int("context_len");
  require_valid(r.shape);

  for (Task t : all_tasks) {
    if (auto v = optional_real(cell(task_column(t)), task_column(t))) {
      r.scores[t] = check_score(*v, task_column(t));
    }
  }
  r.total_time = optional_real(cell("total_time_s"), "total_time_s");
  if (r.total_time && *r.total_time < 0.0) throw ValidationError("total_time_s must be >= 0");
  r.final_val_loss = optional_real(cell("final_val_loss"), "final_val_loss");
  r.phi = optional_real(cell("phi"), "phi");
  if (table.column("glue_large") >= 0) {
    r.glue_large_reported = optional_real(cell("glue_large"), "glue_large");
    if (r.glue_large_reported) check_score(*r.glue_large_reported, "glue_large");
  }
  if (table.column("n_model") >= 0 && !cell("n_model").empty()) {
    const auto n = text::parse_int(cell("n_model"), "n_model");
    if (n < 0) throw ValidationError("n_model must be non-negative");
    r.n_model_reported = static_cast<Count>(n);
  }
  return r;
}

}  // namespace

std::vector<RunRecord> parse_run_records(std::string_view document) {
  const auto table = text::parse_delimited(document);
  for (auto col : record_columns) {
    if (table.column(col) < 0) {
      throw ValidationError(fmt::format("records schema: missing column '{}'", col));
    }
  }
  std::set<std::string_view> seen;
  for (const auto& h : table.header) {
    const bool known =
        std::find(record_columns.begin(), record_columns.end(), h) != record_columns.end() ||
        std::find(optional_record_columns.begin(), optional_record_columns.end(), h) !=
            optional_record_columns.end();
    if (!known) throw ValidationError(fmt::format("records schema: unknown column '{}'", h));
    if (!seen.insert(h).second) {
      throw ValidationError(fmt::format("records schema: duplicate column '{}'", h));
    }
  }

  std::vector<RunRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    try {
      out.push_back(parse_row(table, table.rows[i]));
    } catch (const ValidationError& e) {
      throw ValidationError(
          fmt::format("row {} (line {}): {}", i + 1, table.rows[i].line, e.what()));
    }
  }
  return out;
}

std::string write_run_records(const std::vector<RunRecord>& records) {
  const bool with_glue = std::any_of(records.begin(), records.end(),
                                     [](const RunRecord& r) { return r.glue_large_reported; });
  const bool with_size = std::any_of(records.begin(), records.end(),
                                     [](const RunRecord& r) { return r.n_model_reported; });
  auto opt = [](const std::optional<double>& v) { return v ? text::shortest(*v) : std::string(); };

  std::string out;
  for (std::size_t i = 0; i < record_columns.size(); ++i) {
    if (i) out += ',';
    out += record_columns[i];
  }
  if (with_glue) out += ",glue_large";
  if (with_size) out += ",n_model";
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{}", to_string(r.arch.objective()), r.shape.heads,
                       r.shape.width, r.shape.layers, r.shape.context_len);
    for (Task t : all_tasks) {
      auto it = r.scores.find(t);
      out += ',';
      if (it != r.scores.end()) out += text::shortest(it->second);
    }
    out += fmt::format(",{},{},{}", opt(r.total_time), opt(r.final_val_loss), opt(r.phi));
    if (with_glue) out += "," + opt(r.glue_large_reported);
    if (with_size) out += "," + (r.n_model_reported ? std::to_string(*r.n_model_reported) : "");
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

GroupBy parse_group_by(std::string_view s) {
  if (s == "objective") return GroupBy::objective;
  if (s == "scaled_dim") return GroupBy::scaled_dim;
  if (s == "phi") return GroupBy::phi;
  throw ValidationError(fmt::format("unknown grouping '{}' (objective, scaled_dim, phi)", s));
}

namespace {

std::string_view group_by_name(GroupBy g) {
  switch (g) {
    case GroupBy::objective: return "objective";
    case GroupBy::scaled_dim: return "scaled_dim";
    case GroupBy::phi: return "phi";
  }
  return "?";
}

// Dimensions in which `r` differs from the smallest run of its objective.
std::string scaled_dims(const RunRecord& r, const RunRecord& base) {
  std::string out;
  auto add = [&](bool differs, std::string_view name) {
    if (!differs) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(r.shape.heads != base.shape.heads, "heads");
  add(r.shape.width != base.shape.width, "width");
  add(r.shape.layers != base.shape.layers, "layers");
  return out.empty() ? "base" : out;
}

}  // namespace

Report build_report(const std::vector<RunRecord>& records, GroupBy group_by) {
  if (records.empty()) throw ValidationError("report needs at least one record");

  std::map<Objective, const RunRecord*> base;
  for (const auto& r : records) {
    auto& b = base[r.arch.objective()];
    if (!b || approx_model_size(r.shape) < approx_model_size(b->shape)) b = &r;
  }

  std::map<std::string, ReportGroup> groups;
  for (const auto& r : records) {
    std::string key;
    switch (group_by) {
      case GroupBy::objective:
        key = std::string(to_string(r.arch.objective()));
        break;
      case GroupBy::scaled_dim:
        key = fmt::format("{}/{}", to_string(r.arch.objective()),
                          scaled_dims(r, *base[r.arch.objective()]));
        break;
      case GroupBy::phi:
        key = r.phi ? fmt::format("phi={:.3f}", *r.phi) : "phi=NA";
        break;
    }
    ReportRow row;
    row.record = r;
    row.n_model = approx_model_size(r.shape);
    row.size_mismatch = r.n_model_reported && *r.n_model_reported != row.n_model;
    if (has_components(r)) row.glue_large_computed = glue_large(r).display;
    if (r.glue_large_reported || row.glue_large_computed) row.glue_large = effective_glue_large(r);
    row.glue_large_consistent = glue_large_consistent(r);
    auto& g = groups[key];
    g.key = key;
    g.rows.push_back(std::move(row));
  }

  Report report;
  report.group_by = group_by;
  for (auto& [key, g] : groups) {
    std::stable_sort(g.rows.begin(), g.rows.end(),
                     [](const ReportRow& a, const ReportRow& b) { return a.n_model < b.n_model; });
    ReportRow* best = nullptr;
    for (auto& row : g.rows) {
      if (row.record.final_val_loss &&
          (!best || *row.record.final_val_loss < *best->record.final_val_loss)) {
        best = &row;
      }
    }
    if (best) best->smallest_loss = true;
    report.groups.push_back(std::move(g));
  }
  return report;
}

std::vector<std::string> Report::flags() const {
  std::vector<std::string> out;
  for (const auto& g : groups) {
    for (const auto& row : g.rows) {
      const auto& s = row.record.shape;
      if (row.size_mismatch) {
        out.push_back(fmt::format("size mismatch: A={} H={} L={} stated {} but 12LH^2 = {}", s.heads,
                                  s.width, s.layers, text::grouped(*row.record.n_model_reported),
                                  text::grouped(row.n_model)));
      }
      if (row.glue_large_consistent && !*row.glue_large_consistent) {
        out.push_back(fmt::format(
            "GLUE-Large mismatch: A={} H={} L={} ({}) stated {:.1f} but components give {:.1f}",
            s.heads, s.width, s.layers, to_string(row.record.arch.objective()),
            *row.record.glue_large_reported, *row.glue_large_computed));
      }
    }
  }
  return out;
}

std::string render_report_table(const Report& report) {
  auto opt = [](const std::optional<double>& v, int decimals) {
    return v ? fmt::format("{:.{}f}", *v, decimals) : std::string("-");
  };
  std::string out;
  for (const auto& g : report.groups) {
    out += fmt::format("[{}]\n", g.key);
    out += fmt::format("{:<8} {:>4} {:>6} {:>4} {:>14} {:>10} {:>10} {:>8} {:>8}  {}\n", "style", "A",
                       "H", "L", "N_model", "GLUE-Large", "time_s", "loss", "phi", "flags");
    for (const auto& row : g.rows) {
      const auto& r = row.record;
      std::string flags;
      if (row.smallest_loss) flags += "smallest-loss ";
      if (row.size_mismatch) flags += "size-mismatch ";
      if (row.glue_large_consistent && !*row.glue_large_consistent) flags += "glue-mismatch ";
      if (!flags.empty()) flags.pop_back();
      out += text::trim(fmt::format("{:<8} {:>4} {:>6} {:>4} {:>14} {:>10} {:>10} {:>8} {:>8}  {}",
                         to_string(r.arch.objective()), r.shape.heads, r.shape.width, r.shape.layers,
                         text::grouped(row.n_model), opt(row.glue_large, 1), opt(r.total_time, 0),
                         opt(r.final_val_loss, 2), opt(r.phi, 3), flags)) + "\n";
    }
    out += '\n';
  }
  for (const auto& f : report.flags()) out += "FLAG " + f + "\n";
  return out;
}

std::string render_report_json(const Report& report) {
  using detail::Json;
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["group_by"] = std::string(group_by_name(report.group_by));
  Json groups = Json::array();
  for (const auto& g : report.groups) {
    Json rows = Json::array();
    for (const auto& row : g.rows) {
      const auto& r = row.record;
      Json jr;
      jr["objective"] = std::string(to_string(r.arch.objective()));
      jr["heads"] = r.shape.heads;
      jr["width"] = r.shape.width;
      jr["layers"] = r.shape.layers;
      jr["context_len"] = r.shape.context_len;
      jr["n_model"] = row.n_model;
      jr["n_model_reported"] = r.n_model_reported ? Json(*r.n_model_reported) : Json(nullptr);
      jr["size_mismatch"] = row.size_mismatch;
      jr["glue_large"] = opt(row.glue_large);
      jr["glue_large_computed"] = opt(row.glue_large_computed);
      jr["glue_large_consistent"] =
          row.glue_large_consistent ? Json(*row.glue_large_consistent) : Json(nullptr);
      Json scores = Json::object();
      for (const auto& [t, v] : r.scores) scores[std::string(task_column(t))] = v;
      jr["scores"] = scores;
      jr["total_time_s"] = opt(r.total_time);
      jr["final_val_loss"] = opt(r.final_val_loss);
      jr["phi"] = opt(r.phi);
      jr["smallest_loss"] = row.smallest_loss;
      rows.push_back(std::move(jr));
    }
    groups.push_back(Json{{"key", g.key}, {"rows", std::move(rows)}});
  }
  j["groups"] = std::move(groups);
  j["flags"] = report.flags();
  return j.dump(2);
}

}  // namespace tscale
