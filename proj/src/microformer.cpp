#include "tscale/microformer.hpp"

#include <bit>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace tscale::microformer {

namespace {

class Init {
 public:
  Init(std::uint64_t seed, double scale) : rng_(seed), scale_(scale) {}

  Matrix matrix(std::int64_t rows, std::int64_t cols) {
    Matrix m(rows, cols);
    for (auto& x : m.data) x = scale_ * normal_(rng_);
    return m;
  }

  std::vector<double> vec(std::int64_t n, bool enabled) {
    std::vector<double> v;
    if (!enabled) return v;
    v.resize(static_cast<std::size_t>(n));
    for (auto& x : v) x = scale_ * normal_(rng_);
    return v;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double scale_;
};

std::optional<LayerNormWeights> layer_norm(std::int64_t width, bool enabled) {
  if (!enabled) return std::nullopt;
  const auto n = static_cast<std::size_t>(width);
  return LayerNormWeights{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
}

}  // namespace

ModelInstance materialize(const ShapeConfig& shape, ArchVariant arch, const VocabSpec& vocab,
                          const ParamOptions& options, std::uint64_t seed) {
  require_valid(shape);
  if (auto v = validate_vocab(vocab); !v.empty()) {
    throw ValidationError(fmt::format("invalid vocabulary: {} {}", v.front().field, v.front().message));
  }
  const std::int64_t H = shape.width;
  const std::int64_t hd = shape.head_dim();
  const std::int64_t ff = shape.ff_dim();
  const bool bias = options.include_bias;

  ModelInstance m;
  m.shape = shape;
  m.arch = arch;
  m.vocab = vocab;
  m.options = options;
  m.seed = seed;

  Init init(seed, 1.0 / std::sqrt(static_cast<double>(H)));
  m.token_embedding = init.matrix(vocab.tokens, H);
  m.position_embedding = init.matrix(vocab.positions, H);
  m.segment_embedding = init.matrix(vocab.segments, H);
  if (!options.tie_output_embedding) m.output_embedding = init.matrix(vocab.tokens, H);
  m.extra_ln = layer_norm(H, options.include_layernorm);

  m.layers.resize(static_cast<std::size_t>(shape.layers));
  for (auto& layer : m.layers) {
    layer.heads.resize(static_cast<std::size_t>(shape.heads));
    for (auto& head : layer.heads) {
      head.wq = init.matrix(H, hd);
      head.wk = init.matrix(H, hd);
      head.wv = init.matrix(H, hd);
      head.bq = init.vec(hd, bias);
      head.bk = init.vec(hd, bias);
      head.bv = init.vec(hd, bias);
    }
    layer.wo = init.matrix(H, H);
    layer.bo = init.vec(H, bias);
    layer.w1 = init.matrix(H, ff);
    layer.b1 = init.vec(ff, bias);
    layer.w2 = init.matrix(ff, H);
    layer.b2 = init.vec(H, bias);
    layer.ln1 = layer_norm(H, options.include_layernorm);
    layer.ln2 = layer_norm(H, options.include_layernorm);
  }
  return m;
}

ParamCount tensor_element_count(const ModelInstance& m) {
  Count input_proj = 0, output_proj = 0, ffn = 0, biases = 0, ln = 0, emb = 0;
  auto ln_size = [](const std::optional<LayerNormWeights>& w) -> Count {
    return w ? w->gamma.size() + w->beta.size() : 0;
  };
  for (const auto& layer : m.layers) {
    for (const auto& head : layer.heads) {
      input_proj += head.wq.size() + head.wk.size() + head.wv.size();
      biases += head.bq.size() + head.bk.size() + head.bv.size();
    }
    output_proj += layer.wo.size();
    ffn += layer.w1.size() + layer.w2.size();
    biases += layer.bo.size() + layer.b1.size() + layer.b2.size();
    ln += ln_size(layer.ln1) + ln_size(layer.ln2);
  }
  ln += ln_size(m.extra_ln);
  emb = m.token_embedding.size() + m.position_embedding.size() + m.segment_embedding.size();
  if (m.output_embedding) emb += m.output_embedding->size();

  ParamCount pc;
  pc.n_model_approx = approx_model_size(m.shape);
  pc.breakdown.emplace(component::input_proj, input_proj);
  pc.breakdown.emplace(component::output_proj, output_proj);
  pc.breakdown.emplace(component::ffn, ffn);
  pc.breakdown.emplace(component::biases, biases);
  pc.breakdown.emplace(component::layer_norm, ln);
  pc.breakdown.emplace(component::embeddings, emb);
  pc.n_nonembed_exact = input_proj + output_proj + ffn + biases + ln;
  pc.n_embed = emb;
  return pc;
}

std::uint64_t weight_checksum(const ModelInstance& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::span<const double> xs) {
    for (double x : xs) {
      h ^= std::bit_cast<std::uint64_t>(x);
      h *= 1099511628211ull;
    }
  };
  auto mix_ln = [&](const std::optional<LayerNormWeights>& w) {
    if (w) {
      mix(w->gamma);
      mix(w->beta);
    }
  };
  mix(m.token_embedding.data);
  mix(m.position_embedding.data);
  mix(m.segment_embedding.data);
  if (m.output_embedding) mix(m.output_embedding->data);
  mix_ln(m.extra_ln);
  for (const auto& layer : m.layers) {
    for (const auto& head : layer.heads) {
      mix(head.wq.data);
      mix(head.wk.data);
      mix(head.wv.data);
      mix(head.bq);
      mix(head.bk);
      mix(head.bv);
    }
    mix(layer.wo.data);
    mix(layer.bo);
    mix(layer.w1.data);
    mix(layer.b1);
    mix(layer.w2.data);
    mix(layer.b2);
    mix_ln(layer.ln1);
    mix_ln(layer.ln2);
  }
  return h;
}

std::string_view to_string(FlopCategory c) {
  switch (c) {
    case FlopCategory::input_proj: return "input_proj";
    case FlopCategory::attention_weights: return "attention_weights";
    case FlopCategory::attention_weighted_sum: return "attention_weighted_sum";
    case FlopCategory::output_proj: return "output_proj";
    case FlopCategory::ffn: return "ffn";
  }
  return "?";
}

void FlopCounter::add_macs(FlopCategory c, std::uint64_t macs) {
  auto& slot = flops[static_cast<std::size_t>(c)];
  slot = checked_add(slot, checked_mul(2, macs, "FLOP counter"), "FLOP counter");
}

Count FlopCounter::total() const {
  Count t = 0;
  for (Count f : flops) t += f;
  return t;
}

Count FlopCounter::context_free() const {
  return (*this)[FlopCategory::input_proj] + (*this)[FlopCategory::output_proj] +
         (*this)[FlopCategory::ffn];
}

Count FlopCounter::attention() const {
  return (*this)[FlopCategory::attention_weights] + (*this)[FlopCategory::attention_weighted_sum];
}

namespace {

void add_bias(Matrix& x, const std::vector<double>& b) {
  if (b.empty()) return;
  for (std::int64_t i = 0; i < x.rows; ++i) {
    for (std::int64_t j = 0; j < x.cols; ++j) x.at(i, j) += b[static_cast<std::size_t>(j)];
  }
}

void apply_layer_norm(Matrix& x, const std::optional<LayerNormWeights>& w) {
  if (!w) return;
  constexpr double eps = 1e-5;
  for (std::int64_t i = 0; i < x.rows; ++i) {
    double mean = 0.0;
    for (std::int64_t j = 0; j < x.cols; ++j) mean += x.at(i, j);
    mean /= static_cast<double>(x.cols);
    double var = 0.0;
    for (std::int64_t j = 0; j < x.cols; ++j) {
      const double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(x.cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::int64_t j = 0; j < x.cols; ++j) {
      const auto k = static_cast<std::size_t>(j);
      x.at(i, j) = (x.at(i, j) - mean) * inv * w->gamma[k] + w->beta[k];
    }
  }
}

void add_into(Matrix& x, const Matrix& y) {
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += y.data[i];
}

double gelu(double v) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v)));
}

Matrix project(kernels::Exec exec, const Matrix& x, const Matrix& w, FlopCategory cat,
               FlopCounter& counter) {
  Matrix out(x.rows, w.cols);
  counter.add_macs(cat, kernels::matmul(exec, x.data, w.data, out.data, x.rows, x.cols, w.cols));
  return out;
}

Matrix attention_block(kernels::Exec exec, const LayerWeights& layer, const Matrix& x, bool causal,
                       FlopCounter& counter) {
  const std::int64_t seq = x.rows;
  const std::int64_t H = x.cols;
  const std::int64_t A = static_cast<std::int64_t>(layer.heads.size());
  const std::int64_t hd = H / A;
  Matrix concat(seq, H);
  Matrix head_out(seq, hd);
  for (std::int64_t h = 0; h < A; ++h) {
    const auto& w = layer.heads[static_cast<std::size_t>(h)];
    Matrix q = project(exec, x, w.wq, FlopCategory::input_proj, counter);
    Matrix k = project(exec, x, w.wk, FlopCategory::input_proj, counter);
    Matrix v = project(exec, x, w.wv, FlopCategory::input_proj, counter);
    add_bias(q, w.bq);
    add_bias(k, w.bk);
    add_bias(v, w.bv);
    const auto macs = kernels::attention(exec, q.data, k.data, v.data, head_out.data, seq, hd, causal);
    counter.add_macs(FlopCategory::attention_weights, macs.weights);
    counter.add_macs(FlopCategory::attention_weighted_sum, macs.weighted_sum);
    for (std::int64_t i = 0; i < seq; ++i) {
      for (std::int64_t j = 0; j < hd; ++j) concat.at(i, h * hd + j) = head_out.at(i, j);
    }
  }
  Matrix out = project(exec, concat, layer.wo, FlopCategory::output_proj, counter);
  add_bias(out, layer.bo);
  return out;
}

Matrix ffn_block(kernels::Exec exec, const LayerWeights& layer, const Matrix& x,
                 FlopCounter& counter) {
  Matrix inner = project(exec, x, layer.w1, FlopCategory::ffn, counter);
  add_bias(inner, layer.b1);
  for (auto& v : inner.data) v = gelu(v);
  Matrix out = project(exec, inner, layer.w2, FlopCategory::ffn, counter);
  add_bias(out, layer.b2);
  return out;
}

}  // namespace

ForwardResult forward(const ModelInstance& model, std::span<const std::int64_t> token_ids,
                      kernels::Exec exec) {
  const std::int64_t seq = static_cast<std::int64_t>(token_ids.size());
  const std::int64_t H = model.shape.width;
  if (seq == 0) throw ValidationError("forward needs at least one token");
  if (seq > model.shape.context_len) {
    throw ValidationError(
        fmt::format("sequence of {} tokens exceeds context length {}", seq, model.shape.context_len));
  }
  if (seq > model.vocab.positions) {
    throw ValidationError(fmt::format("sequence of {} tokens exceeds the {} position embeddings", seq,
                                      model.vocab.positions));
  }
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (token_ids[i] < 0 || token_ids[i] >= model.vocab.tokens) {
      throw ValidationError(fmt::format("token id {} at position {} outside vocabulary of {}",
                                        token_ids[i], i, model.vocab.tokens));
    }
  }

  ForwardResult result;
  FlopCounter& counter = result.counter;
  const bool causal = model.arch.causal();

  Matrix x(seq, H);
  for (std::int64_t i = 0; i < seq; ++i) {
    const auto tok = model.token_embedding.row(token_ids[static_cast<std::size_t>(i)]);
    const auto pos = model.position_embedding.row(i);
    for (std::int64_t j = 0; j < H; ++j) {
      const auto k = static_cast<std::size_t>(j);
      x.at(i, j) = tok[k] + pos[k];
      // Single-segment input.
      if (model.segment_embedding.rows > 0) x.at(i, j) += model.segment_embedding.at(0, j);
    }
  }

  if (causal) {
    for (const auto& layer : model.layers) {
      Matrix h = x;
      apply_layer_norm(h, layer.ln1);
      add_into(x, attention_block(exec, layer, h, true, counter));
      h = x;
      apply_layer_norm(h, layer.ln2);
      add_into(x, ffn_block(exec, layer, h, counter));
    }
    apply_layer_norm(x, model.extra_ln);
  } else {
    apply_layer_norm(x, model.extra_ln);
    for (const auto& layer : model.layers) {
      add_into(x, attention_block(exec, layer, x, false, counter));
      apply_layer_norm(x, layer.ln1);
      add_into(x, ffn_block(exec, layer, x, counter));
      apply_layer_norm(x, layer.ln2);
    }
  }

  const Matrix& out_emb = model.output_embedding ? *model.output_embedding : model.token_embedding;
  result.logits = Matrix(seq, model.vocab.tokens);
  kernels::matmul_bt(exec, x.data, out_emb.data, result.logits.data, seq, H, model.vocab.tokens);
  return result;
}

double FlopMeasurement::context_free_per_token() const {
  return measured_per_token[0] + measured_per_token[3] + measured_per_token[4];
}

double FlopMeasurement::attention_per_token() const {
  return measured_per_token[1] + measured_per_token[2];
}

FlopMeasurement measured_flops_per_token(const ModelInstance& model, std::int64_t seq_len,
                                         std::uint64_t input_seed, kernels::Exec exec) {
  if (seq_len < 1 || seq_len > model.shape.context_len) {
    throw ValidationError(fmt::format("seq_len must lie in [1, {}], got {}",
                                      model.shape.context_len, seq_len));
  }
  std::mt19937_64 rng(input_seed);
  std::uniform_int_distribution<std::int64_t> pick(0, model.vocab.tokens - 1);
  std::vector<std::int64_t> ids(static_cast<std::size_t>(seq_len));
  for (auto& id : ids) id = pick(rng);

  FlopMeasurement m;
  m.seq_len = seq_len;
  m.totals = forward(model, ids, exec).counter;
  for (std::size_t c = 0; c < m.measured_per_token.size(); ++c) {
    m.measured_per_token[c] =
        static_cast<double>(m.totals.flops[c]) / static_cast<double>(seq_len);
  }

  const double L = static_cast<double>(model.shape.layers);
  const double H = static_cast<double>(model.shape.width);
  const double N = static_cast<double>(seq_len);
  const double ff_mult = static_cast<double>(model.shape.ff_mult);
  // Causal masks attend to N/2 positions on average.
  const double attended = model.arch.causal() ? N / 2.0 : N;
  m.analytic_per_token = {6.0 * L * H * H, 2.0 * L * attended * H, 2.0 * L * attended * H,
                          2.0 * L * H * H, 4.0 * ff_mult * L * H * H};
  return m;
}

}  // namespace tscale::microformer
