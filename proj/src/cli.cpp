#include "tscale/cli.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tscale/compute.hpp"
#include "tscale/microformer.hpp"
#include "tscale/planner.hpp"
#include "tscale/published.hpp"
#include "tscale/results.hpp"
#include "tscale/scaler.hpp"
#include "tscale/text.hpp"

namespace tscale::cli {

namespace {

using Json = nlohmann::ordered_json;

enum class Format { table, machine };

struct OutputOptions {
  std::string format = "table";
  std::string out_path;

  Format fmt() const { return format == "machine" ? Format::machine : Format::table; }
};

void add_output_options(CLI::App* sub, OutputOptions& o) {
  sub->add_option("--format", o.format, "table or machine")
      ->check(CLI::IsMember({"table", "machine"}));
  sub->add_option("--out", o.out_path, "write output to this file instead of stdout");
}

struct ShapeOptions {
  std::int64_t heads = 2;
  std::int64_t width = 128;
  std::int64_t layers = 2;
  std::int64_t context_len = 128;
  std::int64_t ff_mult = 4;
  std::string objective = "bert";
  std::optional<std::int64_t> vocab_tokens, vocab_positions, vocab_segments;
  std::string shape_file;

  ShapeDocument resolve() const {
    if (!shape_file.empty()) return shape_from_json(text::read_file(shape_file));
    ShapeDocument doc;
    doc.shape = ShapeConfig{heads, width, layers, context_len, ff_mult};
    doc.arch = ArchVariant(parse_objective(objective));
    doc.vocab = VocabSpec::defaults_for(doc.arch.objective());
    if (vocab_tokens) doc.vocab.tokens = *vocab_tokens;
    if (vocab_positions) doc.vocab.positions = *vocab_positions;
    if (vocab_segments) doc.vocab.segments = *vocab_segments;
    require_valid(doc.shape);
    if (auto v = validate_vocab(doc.vocab); !v.empty()) {
      throw ValidationError(fmt::format("invalid vocabulary: {} {}", v.front().field, v.front().message));
    }
    return doc;
  }
};

void add_shape_options(CLI::App* sub, ShapeOptions& s) {
  sub->add_option("--heads,-A", s.heads, "attention heads")->capture_default_str();
  sub->add_option("--width,-H", s.width, "embedding dimension")->capture_default_str();
  sub->add_option("--layers,-L", s.layers, "layer count")->capture_default_str();
  sub->add_option("--context-len", s.context_len, "context length in tokens")->capture_default_str();
  sub->add_option("--ff-mult", s.ff_mult, "feed-forward expansion")->capture_default_str();
  sub->add_option("--objective", s.objective, "bert, roberta or gpt2")->capture_default_str();
  sub->add_option("--vocab-tokens", s.vocab_tokens, "token vocabulary size");
  sub->add_option("--vocab-positions", s.vocab_positions, "position vocabulary size");
  sub->add_option("--vocab-segments", s.vocab_segments, "segment vocabulary size (0 or 2)");
  sub->add_option("--shape", s.shape_file, "shape document; overrides the shape flags");
}

std::string shape_label(const ShapeConfig& s) {
  return fmt::format("A={} H={} L={}", s.heads, s.width, s.layers);
}

Json parse_machine(const std::string& s) { return Json::parse(s); }

// ---------------------------------------------------------------------------

std::string cmd_size(const ShapeOptions& so, const ParamOptions& po, Format f) {
  const auto doc = so.resolve();
  const auto pc = exact_param_count(doc.shape, doc.arch, doc.vocab, po);
  if (f == Format::machine) {
    Json j;
    j["shape"] = parse_machine(shape_to_json(doc, -1));
    j["include_bias"] = po.include_bias;
    j["include_layernorm"] = po.include_layernorm;
    j["tie_output_embedding"] = po.tie_output_embedding;
    j["n_model"] = pc.n_model_approx;
    j["n_nonembed_exact"] = pc.n_nonembed_exact;
    j["n_embed"] = pc.n_embed;
    Json b;
    for (const auto& [k, v] : pc.breakdown) b[k] = v;
    j["breakdown"] = b;
    return j.dump(2) + "\n";
  }
  std::string out = fmt::format("{} ({})\n", shape_label(doc.shape), to_string(doc.arch.objective()));
  out += fmt::format("N_model: {}\n", text::grouped(pc.n_model_approx));
  out += fmt::format("exact non-embedding: {}\n", text::grouped(pc.n_nonembed_exact));
  out += fmt::format("embeddings: {}\n", text::grouped(pc.n_embed));
  out += fmt::format("total: {}\n", text::grouped(pc.total()));
  for (const auto& [k, v] : pc.breakdown) out += fmt::format("  {:<12} {:>16}\n", k, text::grouped(v));
  return out;
}

std::string cmd_flops(const ShapeOptions& so, std::optional<Count> tokens, Format f) {
  const auto doc = so.resolve();
  const auto est = forward_flops_per_token(doc.shape, doc.arch);
  const auto dom = context_term_dominance(doc.shape, doc.arch);
  std::optional<Count> total;
  if (tokens) total = total_training_flops(doc.shape, *tokens);
  if (f == Format::machine) {
    Json j;
    j["shape"] = parse_machine(shape_to_json(doc, -1));
    j["flops_context_free"] = est.flops_context_free;
    j["flops_context_dep"] = est.flops_context_dep;
    j["c_forward"] = est.c_forward;
    j["c_train"] = est.c_train;
    j["context_share"] = est.context_share;
    j["dominance_threshold"] = dom.threshold;
    j["dominance_satisfied"] = dom.satisfied;
    if (total) {
      j["tokens"] = *tokens;
      j["total_training_flops"] = *total;
    }
    return j.dump(2) + "\n";
  }
  std::string out = fmt::format("{} N_ctx={} ({} mask)\n", shape_label(doc.shape),
                                doc.shape.context_len, to_string(doc.arch.attention_mask()));
  out += render_estimate(est);
  out += fmt::format("context term small (H > {:.2f}): {}\n", dom.threshold,
                     dom.satisfied ? "yes" : "no");
  if (total) out += fmt::format("total training FLOPs for {} tokens: {}\n", *tokens, *total);
  return out;
}

struct ScaleArgs {
  std::string alpha_from;
  std::string policy_file;
  std::string policy_out;
  std::optional<double> phi;
  std::optional<Count> target;
  double tol = 0.01;
};

ScalingPolicy resolve_policy(const ScaleArgs& a) {
  if (!a.policy_file.empty()) return policy_from_json(text::read_file(a.policy_file));
  const auto parts = text::split(a.alpha_from, ',');
  if (parts.size() != 2) throw ValidationError("--alpha-from expects L,H (e.g. 3,104)");
  return fit_coefficients(text::parse_int(parts[0], "--alpha-from L"),
                          text::parse_int(parts[1], "--alpha-from H"), a.tol);
}

std::string cmd_scale(const ScaleArgs& a, const ShapeOptions& so, Format f) {
  if (a.alpha_from.empty() == a.policy_file.empty()) {
    throw ValidationError("give exactly one of --alpha-from or --policy");
  }
  const auto policy = resolve_policy(a);
  if (!a.policy_out.empty()) text::write_file(a.policy_out, policy_to_json(policy) + "\n");
  double phi = 0.0;
  if (a.phi) {
    phi = *a.phi;
  } else if (a.target) {
    phi = phi_for_target_size(policy, *a.target);
  } else {
    phi = static_cast<double>(policy.phi0_rounded());
  }
  ShapeConfig tmpl{1, 1, 1, so.context_len, so.ff_mult};
  const auto scaled = scale(policy, phi, tmpl);
  const auto arch = ArchVariant(parse_objective(so.objective));
  const Count n = approx_model_size(scaled.shape);
  if (f == Format::machine) {
    return scaled_shape_to_json(scaled, arch, VocabSpec::defaults_for(arch.objective())) + "\n";
  }
  std::string out = fmt::format("A={} H={} L={} N={}\n", scaled.shape.heads, scaled.shape.width,
                                scaled.shape.layers, text::grouped(n));
  out += fmt::format("phi: {}\n", text::shortest(phi));
  out += fmt::format("alpha: {:.3f} beta: {:.3f} (alpha*beta^2 = {:.4f}, constraint {})\n",
                     policy.alpha, policy.beta, policy.growth_per_phi(),
                     policy.constraint_ok() ? "ok" : "violated");
  out += fmt::format("phi0: {:.2f} (exponent denominator {})\n", policy.phi0, policy.phi0_rounded());
  out += fmt::format("unrounded: L={:.3f} H={:.3f}\n", scaled.raw_layers, scaled.raw_width);
  if (a.target) out += fmt::format("continuous size at phi: {:.0f}\n", continuous_model_size(policy, phi));
  return out;
}

std::string cmd_grid(Count target, std::int64_t heads, const std::vector<std::int64_t>& depths,
                     std::int64_t context_len, Format f) {
  const auto grid = grid_candidates(target, heads, depths, context_len);
  if (f == Format::machine) {
    Json j;
    j["target"] = target;
    j["heads"] = heads;
    Json c = Json::array();
    for (const auto& g : grid.candidates) {
      c.push_back(Json{{"heads", g.shape.heads},
                       {"width", g.shape.width},
                       {"layers", g.shape.layers},
                       {"n_model", g.n_model},
                       {"deviation", g.deviation}});
    }
    j["candidates"] = c;
    j["notes"] = grid.notes;
    return j.dump(2) + "\n";
  }
  std::string out = fmt::format("target N_model {} with A={}\n", text::grouped(target), heads);
  out += fmt::format("{:>4} {:>6} {:>4} {:>12} {:>10}\n", "A", "H", "L", "N_model", "deviation");
  for (const auto& g : grid.candidates) {
    out += fmt::format("{:>4} {:>6} {:>4} {:>12} {:>9.3f}%\n", g.shape.heads, g.shape.width,
                       g.shape.layers, text::grouped(g.n_model), 100.0 * g.deviation);
  }
  for (const auto& n : grid.notes) out += "note: " + n + "\n";
  return out;
}

struct PlanArgs {
  std::string stats_file;
  std::optional<Count> epochs_short, epochs_long;
  Count batch_short = 64;
  Count batch_long = 16;
  Count warmup = 1000;
  std::optional<double> warmup_fraction;
  std::vector<std::string> overrides;
  std::string manifest_out;
  std::vector<std::string> throughput;  // SEQ:BATCH=SECONDS
  std::vector<std::string> run_logs;    // SEQ:BATCH=FILE
};

std::pair<std::int64_t, Count> parse_phase_key(const std::string& spec, std::string& rest) {
  const auto eq = spec.find('=');
  const auto colon = spec.find(':');
  if (eq == std::string::npos || colon == std::string::npos || colon > eq) {
    throw ValidationError(fmt::format("expected SEQ:BATCH=VALUE, got '{}'", spec));
  }
  rest = spec.substr(eq + 1);
  const auto seq = text::parse_int(spec.substr(0, colon), "sequence length");
  const auto batch = text::parse_int(spec.substr(colon + 1, eq - colon - 1), "batch size");
  if (seq < 1 || batch < 1) throw ValidationError("sequence length and batch must be positive");
  return {seq, static_cast<Count>(batch)};
}

std::string cmd_plan(const PlanArgs& a, const ShapeOptions& so, Format f) {
  const auto doc = so.resolve();
  const Objective obj = doc.arch.objective();
  const auto stats = a.stats_file.empty() ? CorpusStats::builtin(obj)
                                          : stats_from_json(text::read_file(a.stats_file));
  const Count default_epochs = obj == Objective::bert ? 6 : 10;
  ScheduleRequest req;
  req.epochs_short = a.epochs_short.value_or(default_epochs);
  req.epochs_long = a.epochs_long.value_or(default_epochs);
  req.batch_short = a.batch_short;
  req.batch_long = a.batch_long;
  req.warmup_steps = a.warmup;
  req.warmup_fraction = a.warmup_fraction;
  const auto sched = build_schedule(stats, req);

  std::map<std::string, std::string> overrides;
  for (const auto& o : a.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ValidationError(fmt::format("override '{}' lacks '='", o));
    overrides[o.substr(0, eq)] = o.substr(eq + 1);
  }
  const auto manifest = emit_manifest(doc.shape, doc.arch, doc.vocab, sched, overrides);
  const std::string manifest_text = manifest_to_json(manifest);
  if (!a.manifest_out.empty()) text::write_file(a.manifest_out, manifest_text);

  const std::string shape_id = shape_label(doc.shape);
  ThroughputProfile profile;
  for (const auto& spec : a.throughput) {
    std::string rest;
    const auto [seq, batch] = parse_phase_key(spec, rest);
    profile.set({shape_id, seq, batch}, text::parse_double(rest, "seconds per step"));
  }
  for (const auto& spec : a.run_logs) {
    std::string path;
    const auto [seq, batch] = parse_phase_key(spec, path);
    const auto obs = parse_run_log(text::read_file(path));
    profile.set({shape_id, seq, batch}, calibrate_throughput(obs));
  }
  std::optional<double> wall;
  if (!profile.seconds_per_step.empty()) wall = estimate_wall_clock(sched, profile, shape_id);

  if (f == Format::machine) {
    Json j;
    j["manifest"] = Json::parse(manifest_text);
    j["short_share"] = sched.share(Partition::short_seq);
    j["warmup_fraction"] = sched.warmup_fraction();
    Json prof = Json::array();
    for (const auto& [k, v] : profile.seconds_per_step) {
      prof.push_back(Json{{"seq_len", k.seq_len}, {"batch_size", k.batch_size}, {"seconds_per_step", v}});
    }
    j["throughput"] = prof;
    j["wall_clock_s"] = wall ? Json(*wall) : Json(nullptr);
    return j.dump(2) + "\n";
  }
  std::string out = fmt::format("schedule for {} ({})\n", shape_id, to_string(obj));
  out += fmt::format("{:<6} {:>7} {:>6} {:>7} {:>10} {:>12}\n", "phase", "seq_len", "batch", "epochs",
                     "steps/epoch", "steps");
  for (const auto& ph : sched.phases) {
    out += fmt::format("{:<6} {:>7} {:>6} {:>7} {:>10} {:>12}\n", to_string(ph.partition), ph.seq_len,
                       ph.batch_size, ph.epochs, text::grouped(ph.steps / ph.epochs),
                       text::grouped(ph.steps));
  }
  out += fmt::format("total steps: {}\n", text::grouped(sched.total_steps));
  out += fmt::format("short-phase share: {:.2f}%\n", 100.0 * sched.share(Partition::short_seq));
  out += fmt::format("warmup: {} steps ({:.2f}% of total)\n", sched.warmup_steps,
                     100.0 * sched.warmup_fraction());
  out += fmt::format("peak_lr: {}\n", text::scientific(manifest.peak_lr.value));
  for (const auto& [k, v] : profile.seconds_per_step) {
    out += fmt::format("throughput seq_len={} batch={}: {:.5f} s/step\n", k.seq_len, k.batch_size, v);
  }
  if (wall) out += fmt::format("estimated wall clock: {:.0f} s\n", *wall);
  if (!a.manifest_out.empty()) out += fmt::format("manifest written to {}\n", a.manifest_out);
  return out;
}

struct VerifyArgs {
  std::int64_t seq_len = 0;
  std::uint64_t seed = 0;
  bool serial = false;
  bool skip_published = false;
};

std::string cmd_verify(const VerifyArgs& a, const ShapeOptions& so, Format f, bool& ok) {
  const auto doc = so.resolve();
  const std::int64_t seq = a.seq_len > 0 ? a.seq_len : doc.shape.context_len;
  const auto exec = a.serial ? kernels::Exec::serial : kernels::Exec::parallel;

  const auto model = microformer::materialize(doc.shape, doc.arch, doc.vocab, ParamOptions{}, a.seed);
  const auto m = microformer::measured_flops_per_token(model, seq, a.seed, exec);
  const auto count = microformer::tensor_element_count(model);
  const auto analytic_params = exact_param_count(doc.shape, doc.arch, doc.vocab, ParamOptions{});

  const Count L = static_cast<Count>(doc.shape.layers);
  const Count H = static_cast<Count>(doc.shape.width);
  const Count N = static_cast<Count>(seq);
  const Count ff = static_cast<Count>(doc.shape.ff_mult);
  const bool context_free_ok =
      m.totals.context_free() == (8 + 4 * ff) * L * H * H * N;
  const Count expected_attention = doc.arch.causal() ? 2 * L * H * N * (N + 1) : 4 * L * N * H * N;
  const bool attention_ok = m.totals.attention() == expected_attention;
  const bool params_ok = count.n_nonembed_exact == analytic_params.n_nonembed_exact &&
                         count.n_embed == analytic_params.n_embed;
  ok = context_free_ok && attention_ok && params_ok;

  std::vector<published::Check> checks;
  if (!a.skip_published) checks = published::reproduction_report();

  if (f == Format::machine) {
    Json j;
    j["shape"] = parse_machine(shape_to_json(doc, -1));
    j["seq_len"] = seq;
    Json cats = Json::array();
    for (auto c : microformer::all_categories) {
      const auto i = static_cast<std::size_t>(c);
      cats.push_back(Json{{"category", std::string(microformer::to_string(c))},
                          {"measured_per_token", m.measured_per_token[i]},
                          {"analytic_per_token", m.analytic_per_token[i]},
                          {"measured_total", m.totals.flops[i]}});
    }
    j["categories"] = cats;
    j["context_free_identity"] = context_free_ok;
    j["attention_identity"] = attention_ok;
    j["parameter_identity"] = params_ok;
    Json repro = Json::array();
    for (const auto& c : checks) {
      repro.push_back(Json{{"section", c.section},
                           {"item", c.item},
                           {"expected", c.expected},
                           {"actual", c.actual},
                           {"match", c.status == published::Status::match}});
    }
    j["reproduction"] = repro;
    return j.dump(2) + "\n";
  }

  std::string out = fmt::format("microformer {} N_ctx={} seq_len={} ({} mask)\n",
                                shape_label(doc.shape), doc.shape.context_len, seq,
                                to_string(doc.arch.attention_mask()));
  out += fmt::format("{:<24} {:>16} {:>16} {:>9}\n", "category", "measured/token", "analytic/token",
                     "ratio");
  for (auto c : microformer::all_categories) {
    const auto i = static_cast<std::size_t>(c);
    out += fmt::format("{:<24} {:>16.1f} {:>16.1f} {:>9.4f}\n", microformer::to_string(c),
                       m.measured_per_token[i], m.analytic_per_token[i],
                       m.measured_per_token[i] / m.analytic_per_token[i]);
  }
  out += fmt::format("excluded from counts: {}\n", microformer::FlopCounter::excluded);
  out += fmt::format("context-free FLOPs identity: {}\n", context_free_ok ? "exact" : "FAILED");
  out += fmt::format("attention FLOPs identity ({} pairs): {}\n",
                     doc.arch.causal() ? "N(N+1)/2" : "N^2", attention_ok ? "exact" : "FAILED");
  out += fmt::format("parameter identity ({} non-embedding, {} embedding): {}\n",
                     text::grouped(count.n_nonembed_exact), text::grouped(count.n_embed),
                     params_ok ? "exact" : "FAILED");
  if (!checks.empty()) {
    std::size_t mismatches = 0;
    out += "\nreproduction of published arithmetic\n";
    for (const auto& c : checks) {
      const bool match = c.status == published::Status::match;
      mismatches += match ? 0 : 1;
      out += fmt::format("{} [{}] {}: expected {}, got {}\n", match ? "ok  " : "FLAG", c.section,
                         c.item, c.expected, c.actual);
    }
    out += fmt::format("{} checks, {} flagged\n", checks.size(), mismatches);
  }
  return out;
}

std::string cmd_ingest(const std::string& path, Format f) {
  const auto records = parse_run_records(text::read_file(path));
  if (f == Format::machine) return write_run_records(records);
  std::string out = fmt::format("{} records\n", records.size());
  for (const auto& r : records) {
    std::string glue = "-";
    if (r.glue_large_reported || r.scores.contains(Task::mnli_m)) {
      try {
        glue = fmt::format("{:.1f}", effective_glue_large(r));
      } catch (const ValidationError&) {
      }
    }
    out += fmt::format("line {:>3}: {:<8} {:<20} N_model {:>12} GLUE-Large {}\n", r.source_line,
                       to_string(r.arch.objective()), shape_label(r.shape),
                       text::grouped(approx_model_size(r.shape)), glue);
  }
  return out;
}

std::string cmd_report(const std::string& path, const std::string& group_by, bool budgets,
                       Format f) {
  const auto records = parse_run_records(text::read_file(path));
  if (budgets) {
    if (records.size() < 2) throw ValidationError("--budgets needs a baseline and at least one variant");
    const std::vector<RunRecord> variants(records.begin() + 1, records.end());
    std::vector<std::string> labels;
    for (const auto& v : variants) labels.push_back(fmt::format("line {}", v.source_line));
    const auto rep = compare_budgets(records.front(), variants, labels);
    if (f == Format::machine) {
      Json j;
      j["baseline_time_s"] = rep.baseline_time;
      j["baseline_glue_large"] = rep.baseline_score;
      Json vs = Json::array();
      for (const auto& d : rep.variants) {
        vs.push_back(Json{{"label", d.label},
                          {"delta_time_s", d.delta_time},
                          {"delta_time_pct", d.delta_time_pct},
                          {"delta_glue_large", d.delta_score},
                          {"score_loss_per_hour_saved",
                           d.score_loss_per_hour_saved ? Json(*d.score_loss_per_hour_saved) : Json(nullptr)},
                          {"dominates", d.dominates},
                          {"preferred", d.preferred}});
      }
      j["variants"] = vs;
      return j.dump(2) + "\n";
    }
    return render_budget_report(rep);
  }
  const auto report = build_report(records, parse_group_by(group_by));
  return f == Format::machine ? render_report_json(report) + "\n" : render_report_table(report);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformer shape scaling toolkit", "tscale"};
  app.require_subcommand(1, 1);

  OutputOptions oo;
  ShapeOptions so;
  ParamOptions po;
  std::optional<Count> tokens;
  ScaleArgs sa;
  Count grid_target = 0;
  std::int64_t grid_heads = 2;
  std::vector<std::int64_t> grid_depths;
  PlanArgs pa;
  VerifyArgs va;
  std::string records_path;
  std::string group_by = "objective";
  bool budgets = false;

  auto* size = app.add_subcommand("size", "parameter counts for a shape");
  add_shape_options(size, so);
  size->add_flag("--bias", po.include_bias, "count bias vectors");
  size->add_flag("--layernorm", po.include_layernorm, "count layer-norm parameters");
  bool untied = false;
  size->add_flag("--untied", untied, "separate output embedding");
  add_output_options(size, oo);

  auto* flops = app.add_subcommand("flops", "analytic FLOPs per token");
  add_shape_options(flops, so);
  flops->add_option("--tokens", tokens, "tokens processed, for total training FLOPs");
  add_output_options(flops, oo);

  auto* scale_cmd = app.add_subcommand("scale", "compound scaling of a grid-search winner");
  scale_cmd->add_option("--alpha-from", sa.alpha_from, "winner L,H to fit alpha and beta from");
  scale_cmd->add_option("--policy", sa.policy_file, "policy document");
  scale_cmd->add_option("--policy-out", sa.policy_out, "write the policy document here");
  scale_cmd->add_option("--phi", sa.phi, "compound coefficient");
  scale_cmd->add_option("--target", sa.target, "target N_model; phi is solved for");
  scale_cmd->add_option("--tol", sa.tol, "constraint tolerance on alpha*beta^2")->capture_default_str();
  scale_cmd->add_option("--context-len", so.context_len, "context length of the scaled shape");
  scale_cmd->add_option("--objective", so.objective, "objective of the scaled shape");
  add_output_options(scale_cmd, oo);

  auto* grid = app.add_subcommand("grid", "comparable-size candidates for a grid search");
  grid->add_option("--target", grid_target, "target N_model")->required();
  grid->add_option("--heads,-A", grid_heads, "attention heads")->capture_default_str();
  grid->add_option("--depths", grid_depths, "comma-separated depths")->delimiter(',')->required();
  grid->add_option("--context-len", so.context_len, "context length");
  add_output_options(grid, oo);

  auto* plan = app.add_subcommand("plan", "training schedule, manifest and wall-clock estimate");
  add_shape_options(plan, so);
  plan->add_option("--stats", pa.stats_file, "corpus statistics document (default: built-in)");
  plan->add_option("--epochs-short", pa.epochs_short, "epochs on short sequences");
  plan->add_option("--epochs-long", pa.epochs_long, "epochs on long sequences");
  plan->add_option("--batch-short", pa.batch_short, "batch size for short sequences")->capture_default_str();
  plan->add_option("--batch-long", pa.batch_long, "batch size for long sequences")->capture_default_str();
  plan->add_option("--warmup", pa.warmup, "warmup steps")->capture_default_str();
  plan->add_option("--warmup-fraction", pa.warmup_fraction, "warmup as a fraction of total steps");
  plan->add_option("--override", pa.overrides, "manifest override KEY=VALUE");
  plan->add_option("--manifest", pa.manifest_out, "write the manifest document here");
  plan->add_option("--throughput", pa.throughput, "seconds per step, SEQ:BATCH=SECONDS");
  plan->add_option("--run-log", pa.run_logs, "calibrate from a run log, SEQ:BATCH=FILE");
  add_output_options(plan, oo);

  auto* verify = app.add_subcommand("verify", "instrumented forward pass vs. analytic counts");
  add_shape_options(verify, so);
  verify->add_option("--seq-len", va.seq_len, "tokens in the probe sequence (default: N_ctx)");
  verify->add_option("--seed", va.seed, "weight and input seed")->capture_default_str();
  verify->add_flag("--serial", va.serial, "use the serial reference kernels");
  verify->add_flag("--skip-published", va.skip_published, "skip the published-table reproduction");
  add_output_options(verify, oo);

  auto* ingest = app.add_subcommand("ingest", "validate a run-records file");
  ingest->add_option("--records", records_path, "records file")->required();
  add_output_options(ingest, oo);

  auto* report = app.add_subcommand("report", "aggregate run records");
  report->add_option("--records", records_path, "records file")->required();
  report->add_option("--group-by", group_by, "objective, scaled_dim or phi")->capture_default_str();
  report->add_flag("--budgets", budgets, "first record is the baseline; compare the rest");
  add_output_options(report, oo);

  std::vector<const char*> argv{"tscale"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_validation;
  }

  try {
    po.tie_output_embedding = !untied;
    const Format f = oo.fmt();
    std::string text;
    int code = exit_ok;
    if (*size) {
      text = cmd_size(so, po, f);
    } else if (*flops) {
      text = cmd_flops(so, tokens, f);
    } else if (*scale_cmd) {
      text = cmd_scale(sa, so, f);
    } else if (*grid) {
      text = cmd_grid(grid_target, grid_heads, grid_depths, so.context_len, f);
    } else if (*plan) {
      text = cmd_plan(pa, so, f);
    } else if (*verify) {
      bool ok = true;
      text = cmd_verify(va, so, f, ok);
      if (!ok) code = exit_validation;
    } else if (*ingest) {
      text = cmd_ingest(records_path, f);
    } else if (*report) {
      text = cmd_report(records_path, group_by, budgets, f);
    }
    if (oo.out_path.empty()) {
      out << text;
    } else {
      text::write_file(oo.out_path, text);
    }
    return code;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  }
}

}  // namespace tscale::cli
