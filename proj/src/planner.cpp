#include "tscale/planner.hpp"

#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "json_io.hpp"
#include "tscale/text.hpp"

namespace tscale {

std::string_view to_string(Partition p) { return p == Partition::short_seq ? "short" : "long"; }

Partition parse_partition(std::string_view s) {
  if (s == "short") return Partition::short_seq;
  if (s == "long") return Partition::long_seq;
  throw ValidationError(fmt::format("unknown partition '{}' (short or long)", s));
}

std::int64_t max_seq_len(Partition p) { return p == Partition::short_seq ? 128 : 512; }

Count PartitionStats::n_sequences() const {
  return static_cast<Count>(std::llround(static_cast<double>(total_tokens) / avg_seq_len));
}

CorpusStats CorpusStats::builtin(Objective o) {
  switch (o) {
    case Objective::bert: return {{110'888'186, 110.04}, {43'274'856, 375.52}};
    case Objective::roberta: return {{70'025'709, 110.31}, {27'692'351, 457.04}};
    case Objective::gpt2: return {{70'564'106, 111.16}, {27'729'551, 457.65}};
  }
  return {};
}

void validate_stats(const CorpusStats& stats) {
  for (Partition p : {Partition::short_seq, Partition::long_seq}) {
    const auto& s = stats.at(p);
    if (s.total_tokens == 0) {
      throw ValidationError(fmt::format("{} partition: total_tokens must be positive", to_string(p)));
    }
    if (!(s.avg_seq_len > 0.0) || s.avg_seq_len > static_cast<double>(max_seq_len(p))) {
      throw ValidationError(fmt::format("{} partition: avg_seq_len {} outside (0, {}]", to_string(p),
                                        s.avg_seq_len, max_seq_len(p)));
    }
  }
}

CorpusStats stats_from_json(std::string_view text) {
  const auto j = detail::parse_json(text, "corpus stats");
  if (!j.is_array()) throw ValidationError("corpus stats must be an array of partitions");
  CorpusStats stats;
  bool seen[2] = {false, false};
  for (const auto& entry : j) {
    constexpr std::string_view what = "corpus stats entry";
    detail::reject_unknown_keys(entry, {"partition", "total_tokens", "avg_seq_len"}, what);
    if (!entry.contains("partition") || !entry["partition"].is_string()) {
      throw ValidationError("corpus stats entry needs a string 'partition'");
    }
    const Partition p = parse_partition(entry["partition"].get<std::string>());
    auto& slot = seen[p == Partition::short_seq ? 0 : 1];
    if (slot) throw ValidationError(fmt::format("duplicate {} partition", to_string(p)));
    slot = true;
    const auto total = detail::get_int(entry, "total_tokens", what);
    if (total <= 0) throw ValidationError("total_tokens must be positive");
    PartitionStats ps{static_cast<Count>(total), detail::get_double(entry, "avg_seq_len", what)};
    (p == Partition::short_seq ? stats.short_seq : stats.long_seq) = ps;
  }
  if (!seen[0] || !seen[1]) throw ValidationError("corpus stats need both short and long partitions");
  validate_stats(stats);
  return stats;
}

std::string stats_to_json(const CorpusStats& stats, int indent) {
  detail::Json j = detail::Json::array();
  for (Partition p : {Partition::short_seq, Partition::long_seq}) {
    const auto& s = stats.at(p);
    j.push_back(detail::Json{{"partition", std::string(to_string(p))},
                             {"total_tokens", s.total_tokens},
                             {"avg_seq_len", s.avg_seq_len}});
  }
  return j.dump(indent);
}

Count steps_per_epoch(const CorpusStats& stats, Partition partition, Count batch_size) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  const Count n = stats.at(partition).n_sequences();
  return n / batch_size + (n % batch_size != 0 ? 1 : 0);
}

double Schedule::warmup_fraction() const {
  return total_steps == 0 ? 0.0 : static_cast<double>(warmup_steps) / static_cast<double>(total_steps);
}

double Schedule::share(Partition p) const {
  if (total_steps == 0) return 0.0;
  Count steps = 0;
  for (const auto& ph : phases) {
    if (ph.partition == p) steps += ph.steps;
  }
  return static_cast<double>(steps) / static_cast<double>(total_steps);
}

Schedule build_schedule(const CorpusStats& stats, const ScheduleRequest& req) {
  validate_stats(stats);
  if (req.epochs_short < 1 || req.epochs_long < 1) throw ValidationError("epochs must be >= 1");
  if (req.batch_short < 1 || req.batch_long < 1) throw ValidationError("batch sizes must be >= 1");

  Schedule s;
  auto add_phase = [&](Partition p, Count epochs, Count batch) {
    const Count steps = checked_mul(epochs, steps_per_epoch(stats, p, batch), "phase steps");
    s.phases.push_back({p, max_seq_len(p), batch, epochs, steps});
    s.total_steps = checked_add(s.total_steps, steps, "total steps");
  };
  add_phase(Partition::short_seq, req.epochs_short, req.batch_short);
  add_phase(Partition::long_seq, req.epochs_long, req.batch_long);

  if (req.warmup_fraction) {
    const double f = *req.warmup_fraction;
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("warmup fraction must lie in [0, 1]");
    s.warmup_steps = static_cast<Count>(std::llround(f * static_cast<double>(s.total_steps)));
  } else {
    s.warmup_steps = req.warmup_steps;
  }
  if (s.warmup_steps > s.total_steps) {
    throw ValidationError(fmt::format("warmup of {} steps exceeds the {} total steps",
                                      s.warmup_steps, s.total_steps));
  }
  return s;
}

void ThroughputProfile::set(const ThroughputKey& key, double seconds) {
  if (!(seconds > 0.0)) {
    throw ValidationError(fmt::format("seconds per step must be positive, got {}", seconds));
  }
  seconds_per_step[key] = seconds;
}

double calibrate_throughput(std::span<const StepObservation> observations) {
  if (observations.empty()) throw ValidationError("calibration needs at least one observation");
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : observations) {
    if (!(o.steps > 0.0)) throw ValidationError("calibration observations need steps > 0");
    num += o.elapsed_seconds * o.steps;
    den += o.steps * o.steps;
  }
  return num / den;
}

std::vector<StepObservation> parse_run_log(std::string_view text) {
  const auto table = text::parse_delimited(text);
  const int t_col = table.column("elapsed_seconds");
  const int s_col = table.column("step");
  if (t_col < 0 || s_col < 0) {
    throw ValidationError("run log needs columns 'elapsed_seconds' and 'step'");
  }
  std::vector<StepObservation> out;
  for (const auto& row : table.rows) {
    const auto where = fmt::format("run log line {}", row.line);
    StepObservation o;
    o.elapsed_seconds = text::parse_double(row.cells[static_cast<std::size_t>(t_col)], where);
    o.steps = text::parse_double(row.cells[static_cast<std::size_t>(s_col)], where);
    if (o.elapsed_seconds < 0.0) throw ValidationError(where + ": negative elapsed time");
    // A step-0 row carries no rate information.
    if (o.steps > 0.0) out.push_back(o);
  }
  return out;
}

double estimate_wall_clock(const Schedule& schedule, const ThroughputProfile& profile,
                           std::string_view shape_id) {
  double seconds = 0.0;
  for (const auto& ph : schedule.phases) {
    const ThroughputKey key{std::string(shape_id), ph.seq_len, ph.batch_size};
    auto it = profile.seconds_per_step.find(key);
    if (it == profile.seconds_per_step.end()) {
      throw ValidationError(fmt::format(
          "no throughput entry for the {} phase (shape {}, seq_len {}, batch {})",
          to_string(ph.partition), shape_id, ph.seq_len, ph.batch_size));
    }
    seconds += static_cast<double>(ph.steps) * it->second;
  }
  return seconds;
}

BudgetReport compare_budgets(const RunRecord& baseline, std::span<const RunRecord> variants,
                             std::span<const std::string> labels) {
  if (!labels.empty() && labels.size() != variants.size()) {
    throw ValidationError("compare_budgets: one label per variant expected");
  }
  auto time_of = [](const RunRecord& r, std::string_view name) {
    if (!r.total_time) throw ValidationError(fmt::format("{} record lacks total_time", name));
    return *r.total_time;
  };
  auto score_of = [](const RunRecord& r, std::string_view name) {
    try {
      return effective_glue_large(r);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{} record lacks GLUE-Large: {}", name, e.what()));
    }
  };

  BudgetReport report;
  report.baseline_time = time_of(baseline, "baseline");
  report.baseline_score = score_of(baseline, "baseline");
  if (!(report.baseline_time > 0.0)) throw ValidationError("baseline total_time must be positive");

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const std::string label = labels.empty() ? fmt::format("variant {}", i + 1) : labels[i];
    BudgetDelta d;
    d.label = label;
    d.delta_time = time_of(variants[i], label) - report.baseline_time;
    d.delta_time_pct = 100.0 * d.delta_time / report.baseline_time;
    d.delta_score = score_of(variants[i], label) - report.baseline_score;
    if (d.delta_time < 0.0) {
      d.score_loss_per_hour_saved = -d.delta_score / (-d.delta_time / 3600.0);
      d.dominates = d.delta_score >= 0.0;
      if (!best || *d.score_loss_per_hour_saved <
                       *report.variants[*best].score_loss_per_hour_saved) {
        best = i;
      }
    }
    report.variants.push_back(std::move(d));
  }
  if (best) report.variants[*best].preferred = true;
  return report;
}

std::string render_budget_report(const BudgetReport& r) {
  std::string out = fmt::format("baseline: time {:.0f} s, GLUE-Large {:.1f}\n", r.baseline_time,
                                r.baseline_score);
  out += fmt::format("{:<24} {:>10} {:>9} {:>8} {:>14}  {}\n", "variant", "dtime_s", "dtime_%",
                     "dscore", "loss/hour", "notes");
  for (const auto& d : r.variants) {
    std::string notes;
    if (d.dominates) notes += "dominates ";
    if (d.preferred) notes += "preferred ";
    if (!notes.empty()) notes.pop_back();
    out += text::trim(fmt::format("{:<24} {:>10.0f} {:>9.2f} {:>+8.1f} {:>14}  {}", d.label, d.delta_time,
                       d.delta_time_pct, d.delta_score,
                       d.score_loss_per_hour_saved
                           ? fmt::format("{:.3f}", *d.score_loss_per_hour_saved)
                           : std::string("-"),
                       notes)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifests

ExperimentManifest emit_manifest(const ShapeConfig& shape, ArchVariant arch, const VocabSpec& vocab,
                                 const Schedule& schedule,
                                 const std::map<std::string, std::string>& overrides) {
  require_valid(shape);
  ExperimentManifest m;
  m.shape = shape;
  m.arch = arch;
  m.vocab = vocab;
  m.schedule = schedule;
  m.peak_lr.value = arch.objective() == Objective::gpt2 ? 2.5e-4 : 1e-4;

  auto set_real = [](ManifestField<double>& f, const std::string& key, const std::string& v) {
    f.value = text::parse_double(v, key);
    f.overridden = true;
  };
  auto set_int = [](ManifestField<std::int64_t>& f, const std::string& key, const std::string& v) {
    f.value = text::parse_int(v, key);
    if (f.value < 1) throw ValidationError(fmt::format("{} must be >= 1", key));
    f.overridden = true;
  };
  for (const auto& [key, value] : overrides) {
    if (key == "adam_beta1") set_real(m.adam_beta1, key, value);
    else if (key == "adam_beta2") set_real(m.adam_beta2, key, value);
    else if (key == "adam_eps") set_real(m.adam_eps, key, value);
    else if (key == "weight_decay") set_real(m.weight_decay, key, value);
    else if (key == "peak_lr") set_real(m.peak_lr, key, value);
    else if (key == "dropout") set_real(m.dropout, key, value);
    else if (key == "finetune.lr") set_real(m.finetune_lr, key, value);
    else if (key == "finetune.epochs") set_int(m.finetune_epochs, key, value);
    else if (key == "finetune.batch") set_int(m.finetune_batch, key, value);
    else if (key == "activation") {
      if (value.empty()) throw ValidationError("activation must not be empty");
      m.activation = {value, true};
    } else {
      throw ValidationError(fmt::format("unknown manifest override '{}'", key));
    }
  }
  return m;
}

namespace {

using detail::Json;

// nlohmann writes doubles in shortest general form; scientific notation is
// spliced in after dumping through a string placeholder.
constexpr std::string_view sci_tag = "\x01sci:";

Json sci(double v) { return std::string(sci_tag) + text::scientific(v); }

std::string splice_scientific(std::string dumped) {
  const std::string needle = "\"" + std::string("\\u0001sci:");
  std::size_t pos = 0;
  while ((pos = dumped.find(needle, pos)) != std::string::npos) {
    const auto end = dumped.find('"', pos + needle.size());
    const std::string number = dumped.substr(pos + needle.size(), end - pos - needle.size());
    dumped.replace(pos, end - pos + 1, number);
    pos += number.size();
  }
  return dumped;
}

template <typename T, typename F>
Json field(const ManifestField<T>& f, F&& encode) {
  if (!f.overridden) return encode(f.value);
  return Json{{"value", encode(f.value)}, {"override", true}};
}

Json schedule_value(const Schedule& s) {
  Json phases = Json::array();
  for (const auto& p : s.phases) {
    phases.push_back(Json{{"partition", std::string(to_string(p.partition))},
                          {"seq_len", p.seq_len},
                          {"batch_size", p.batch_size},
                          {"epochs", p.epochs},
                          {"steps", p.steps}});
  }
  return Json{{"phases", std::move(phases)},
              {"warmup_steps", s.warmup_steps},
              {"total_steps", s.total_steps}};
}

Count get_count(const Json& j, std::string_view key, std::string_view what) {
  const auto v = detail::get_int(j, key, what);
  if (v < 0) throw ValidationError(fmt::format("{} '{}' must be non-negative", what, key));
  return static_cast<Count>(v);
}

Schedule schedule_from_value(const Json& j) {
  constexpr std::string_view what = "schedule";
  detail::reject_unknown_keys(j, {"phases", "warmup_steps", "total_steps"}, what);
  Schedule s;
  if (!j.contains("phases") || !j["phases"].is_array()) {
    throw ValidationError("schedule needs a 'phases' array");
  }
  for (const auto& p : j["phases"]) {
    constexpr std::string_view pw = "schedule phase";
    detail::reject_unknown_keys(p, {"partition", "seq_len", "batch_size", "epochs", "steps"}, pw);
    if (!p.contains("partition") || !p["partition"].is_string()) {
      throw ValidationError("schedule phase needs a string 'partition'");
    }
    Phase ph;
    ph.partition = parse_partition(p["partition"].get<std::string>());
    ph.seq_len = detail::get_int(p, "seq_len", pw);
    ph.batch_size = get_count(p, "batch_size", pw);
    ph.epochs = get_count(p, "epochs", pw);
    ph.steps = get_count(p, "steps", pw);
    s.phases.push_back(ph);
  }
  s.warmup_steps = get_count(j, "warmup_steps", what);
  s.total_steps = get_count(j, "total_steps", what);
  Count sum = 0;
  for (const auto& ph : s.phases) sum = checked_add(sum, ph.steps, "total steps");
  if (sum != s.total_steps) throw ValidationError("schedule total_steps differs from phase sum");
  if (s.warmup_steps > s.total_steps) throw ValidationError("schedule warmup exceeds total steps");
  return s;
}

template <typename T, typename F>
void read_field(const Json& j, std::string_view key, ManifestField<T>& f, F&& decode) {
  auto it = j.find(std::string(key));
  if (it == j.end()) throw ValidationError(fmt::format("manifest is missing '{}'", key));
  if (it->is_object()) {
    detail::reject_unknown_keys(*it, {"value", "override"}, key);
    if (!it->contains("value")) throw ValidationError(fmt::format("'{}' needs a value", key));
    const auto& flag = (*it)["override"];
    if (!flag.is_boolean()) throw ValidationError(fmt::format("'{}' override must be boolean", key));
    f.value = decode((*it)["value"], key);
    f.overridden = flag.get<bool>();
  } else {
    f.value = decode(*it, key);
    f.overridden = false;
  }
}

double decode_real(const Json& v, std::string_view key) {
  if (!v.is_number()) throw ValidationError(fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

std::int64_t decode_int(const Json& v, std::string_view key) {
  if (!v.is_number_integer()) throw ValidationError(fmt::format("'{}' must be an integer", key));
  return v.get<std::int64_t>();
}

std::string decode_string(const Json& v, std::string_view key) {
  if (!v.is_string()) throw ValidationError(fmt::format("'{}' must be a string", key));
  return v.get<std::string>();
}

}  // namespace

std::string manifest_to_json(const ExperimentManifest& m) {
  auto real = [](double v) { return sci(v); };
  auto integer = [](std::int64_t v) { return Json(v); };
  auto str = [](const std::string& v) { return Json(v); };
  Json j;
  j["shape"] = detail::shape_value(ShapeDocument{m.shape, m.arch, m.vocab});
  j["schedule"] = schedule_value(m.schedule);
  j["adam_beta1"] = field(m.adam_beta1, real);
  j["adam_beta2"] = field(m.adam_beta2, real);
  j["adam_eps"] = field(m.adam_eps, real);
  j["weight_decay"] = field(m.weight_decay, real);
  j["peak_lr"] = field(m.peak_lr, real);
  j["dropout"] = field(m.dropout, real);
  j["activation"] = field(m.activation, str);
  j["finetune"] = Json{{"epochs", field(m.finetune_epochs, integer)},
                       {"batch", field(m.finetune_batch, integer)},
                       {"lr", field(m.finetune_lr, real)}};
  return splice_scientific(j.dump(2)) + "\n";
}

ExperimentManifest manifest_from_json(std::string_view text) {
  const auto j = detail::parse_json(text, "manifest");
  detail::reject_unknown_keys(j,
                              {"shape", "schedule", "adam_beta1", "adam_beta2", "adam_eps",
                               "weight_decay", "peak_lr", "dropout", "activation", "finetune"},
                              "manifest");
  if (!j.contains("shape")) throw ValidationError("manifest is missing 'shape'");
  if (!j.contains("schedule")) throw ValidationError("manifest is missing 'schedule'");
  if (!j.contains("finetune")) throw ValidationError("manifest is missing 'finetune'");
  ExperimentManifest m;
  const auto doc = detail::shape_from_value(j["shape"]);
  m.shape = doc.shape;
  m.arch = doc.arch;
  m.vocab = doc.vocab;
  m.schedule = schedule_from_value(j["schedule"]);
  read_field(j, "adam_beta1", m.adam_beta1, decode_real);
  read_field(j, "adam_beta2", m.adam_beta2, decode_real);
  read_field(j, "adam_eps", m.adam_eps, decode_real);
  read_field(j, "weight_decay", m.weight_decay, decode_real);
  read_field(j, "peak_lr", m.peak_lr, decode_real);
  read_field(j, "dropout", m.dropout, decode_real);
  read_field(j, "activation", m.activation, decode_string);
  const Json& ft = j["finetune"];
  detail::reject_unknown_keys(ft, {"epochs", "batch", "lr"}, "finetune");
  read_field(ft, "epochs", m.finetune_epochs, decode_int);
  read_field(ft, "batch", m.finetune_batch, decode_int);
  read_field(ft, "lr", m.finetune_lr, decode_real);
  return m;
}

}  // namespace tscale
