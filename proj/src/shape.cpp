#include "tscale/shape.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "json_io.hpp"

namespace tscale {

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::bert: return "bert";
    case Objective::roberta: return "roberta";
    case Objective::gpt2: return "gpt2";
  }
  return "?";
}

std::string_view to_string(AttentionMask m) {
  return m == AttentionMask::causal ? "causal" : "bidirectional";
}

Objective parse_objective(std::string_view s) {
  if (s.ends_with("_style")) s.remove_suffix(6);
  if (s == "bert") return Objective::bert;
  if (s == "roberta") return Objective::roberta;
  if (s == "gpt2") return Objective::gpt2;
  throw ValidationError(fmt::format("unknown objective '{}' (expected bert, roberta or gpt2)", s));
}

VocabSpec VocabSpec::defaults_for(Objective o) {
  switch (o) {
    case Objective::bert: return {30522, 512, 2};
    case Objective::roberta: return {50265, 514, 0};
    case Objective::gpt2: return {50257, 1024, 0};
  }
  return {};
}

std::vector<ShapeViolation> validate_shape(const ShapeConfig& s) {
  std::vector<ShapeViolation> out;
  auto positive = [&](std::string_view field, std::int64_t v) {
    if (v <= 0) out.push_back({std::string(field), fmt::format("must be positive, got {}", v)});
  };
  positive("heads", s.heads);
  positive("width", s.width);
  positive("layers", s.layers);
  positive("context_len", s.context_len);
  positive("ff_mult", s.ff_mult);
  if (s.heads > 0 && s.width > 0 && s.width % s.heads != 0) {
    out.push_back({"heads", fmt::format("{} does not divide width {}", s.heads, s.width)});
  }
  return out;
}

std::vector<ShapeViolation> validate_vocab(const VocabSpec& v) {
  std::vector<ShapeViolation> out;
  if (v.tokens < 0) out.push_back({"vocab.tokens", "must be non-negative"});
  if (v.positions < 0) out.push_back({"vocab.positions", "must be non-negative"});
  if (v.segments != 0 && v.segments != 2) {
    out.push_back({"vocab.segments", fmt::format("must be 0 or 2, got {}", v.segments)});
  }
  return out;
}

namespace {

void throw_violations(const std::vector<ShapeViolation>& v, std::string_view what) {
  if (v.empty()) return;
  std::string msg = fmt::format("invalid {}:", what);
  for (const auto& x : v) msg += fmt::format(" {} {};", x.field, x.message);
  msg.pop_back();
  throw ValidationError(msg);
}

Count u(std::int64_t v) { return static_cast<Count>(v); }

}  // namespace

void require_valid(const ShapeConfig& shape) { throw_violations(validate_shape(shape), "shape"); }

Count approx_model_size(const ShapeConfig& shape) {
  require_valid(shape);
  const Count h2 = checked_mul(u(shape.width), u(shape.width), "N_model");
  return checked_mul(checked_mul(12, u(shape.layers), "N_model"), h2, "N_model");
}

ParamCount exact_param_count(const ShapeConfig& shape, ArchVariant arch, const VocabSpec& vocab,
                             const ParamOptions& options) {
  require_valid(shape);
  throw_violations(validate_vocab(vocab), "vocabulary");

  const Count H = u(shape.width);
  const Count L = u(shape.layers);
  const Count A = u(shape.heads);
  const Count head_dim = u(shape.head_dim());
  const Count ff = checked_mul(u(shape.ff_mult), H, "ff_dim");
  auto mul = [](Count a, Count b) { return checked_mul(a, b, "parameter count"); };
  auto add = [](Count a, Count b) { return checked_add(a, b, "parameter count"); };

  ParamCount pc;
  pc.n_model_approx = approx_model_size(shape);

  // Per head: three H x H/A matrices.
  const Count input_proj = mul(L, mul(A, mul(3, mul(H, head_dim))));
  const Count output_proj = mul(L, mul(H, H));
  const Count ffn = mul(L, mul(2, mul(H, ff)));

  Count biases = 0;
  if (options.include_bias) {
    biases = mul(L, add(add(mul(3, H), H), add(ff, H)));
  }
  Count layer_norm = 0;
  if (options.include_layernorm) {
    // Two per block, plus the final (causal) or embedding (bidirectional) one.
    layer_norm = add(mul(L, mul(2, mul(2, H))), mul(2, H));
  }

  Count embeddings = mul(H, add(add(u(vocab.tokens), u(vocab.positions)), u(vocab.segments)));
  if (!options.tie_output_embedding) embeddings = add(embeddings, mul(H, u(vocab.tokens)));

  pc.breakdown.emplace(component::input_proj, input_proj);
  pc.breakdown.emplace(component::output_proj, output_proj);
  pc.breakdown.emplace(component::ffn, ffn);
  pc.breakdown.emplace(component::biases, biases);
  pc.breakdown.emplace(component::layer_norm, layer_norm);
  pc.breakdown.emplace(component::embeddings, embeddings);

  pc.n_nonembed_exact = add(add(add(input_proj, output_proj), add(ffn, biases)), layer_norm);
  pc.n_embed = embeddings;
  (void)arch;  // layer-norm count is the same for both placements
  return pc;
}

std::int64_t nearest_head_count(std::int64_t width) {
  if (width < 1) throw ValidationError(fmt::format("width must be positive, got {}", width));
  // Distance |d - H/64| scaled by 64 to stay in integers.
  std::int64_t best = 1;
  std::int64_t best_dist = std::llabs(64 - width);
  for (std::int64_t d = 2; d <= width; ++d) {
    if (width % d != 0) continue;
    const std::int64_t dist = std::llabs(64 * d - width);
    if (dist <= best_dist) {
      best = d;
      best_dist = dist;
    }
  }
  return best;
}

namespace detail {

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed {} document: {}", what, e.what()));
  }
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view what) {
  if (!obj.is_object()) throw ValidationError(fmt::format("{} must be an object", what));
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError(fmt::format("unknown key '{}' in {}", key, what));
  }
}

std::int64_t get_int(const Json& obj, std::string_view key, std::string_view what) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ValidationError(fmt::format("{} is missing '{}'", what, key));
  if (!it->is_number_integer()) {
    throw ValidationError(fmt::format("{} key '{}' must be an integer", what, key));
  }
  return it->get<std::int64_t>();
}

double get_double(const Json& obj, std::string_view key, std::string_view what) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ValidationError(fmt::format("{} is missing '{}'", what, key));
  if (!it->is_number()) throw ValidationError(fmt::format("{} key '{}' must be a number", what, key));
  return it->get<double>();
}

Json shape_value(const ShapeDocument& doc) {
  Json j;
  j["heads"] = doc.shape.heads;
  j["width"] = doc.shape.width;
  j["layers"] = doc.shape.layers;
  j["context_len"] = doc.shape.context_len;
  j["ff_mult"] = doc.shape.ff_mult;
  j["objective"] = std::string(to_string(doc.arch.objective()));
  j["vocab"] = Json{{"tokens", doc.vocab.tokens},
                    {"positions", doc.vocab.positions},
                    {"segments", doc.vocab.segments}};
  return j;
}

ShapeDocument shape_from_value(const Json& j) {
  constexpr std::string_view what = "shape document";
  // phi and policy_id are provenance written by the scaler.
  reject_unknown_keys(j,
                      {"heads", "width", "layers", "context_len", "ff_mult", "objective", "vocab",
                       "phi", "policy_id"},
                      what);
  ShapeDocument doc;
  doc.shape.heads = get_int(j, "heads", what);
  doc.shape.width = get_int(j, "width", what);
  doc.shape.layers = get_int(j, "layers", what);
  doc.shape.context_len = get_int(j, "context_len", what);
  if (j.contains("ff_mult")) doc.shape.ff_mult = get_int(j, "ff_mult", what);
  if (!j.contains("objective") || !j["objective"].is_string()) {
    throw ValidationError("shape document needs a string 'objective'");
  }
  doc.arch = ArchVariant(parse_objective(j["objective"].get<std::string>()));
  doc.vocab = VocabSpec::defaults_for(doc.arch.objective());
  if (j.contains("vocab")) {
    const Json& v = j["vocab"];
    reject_unknown_keys(v, {"tokens", "positions", "segments"}, "vocab");
    if (v.contains("tokens")) doc.vocab.tokens = get_int(v, "tokens", "vocab");
    if (v.contains("positions")) doc.vocab.positions = get_int(v, "positions", "vocab");
    if (v.contains("segments")) doc.vocab.segments = get_int(v, "segments", "vocab");
  }
  throw_violations(validate_shape(doc.shape), "shape");
  throw_violations(validate_vocab(doc.vocab), "vocabulary");
  return doc;
}

}  // namespace detail

std::string shape_to_json(const ShapeDocument& doc, int indent) {
  return detail::shape_value(doc).dump(indent);
}

ShapeDocument shape_from_json(std::string_view text) {
  return detail::shape_from_value(detail::parse_json(text, "shape"));
}

}  // namespace tscale
