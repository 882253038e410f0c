#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tscale/checked.hpp"

namespace tscale {

enum class Objective { bert, roberta, gpt2 };
enum class AttentionMask { bidirectional, causal };

std::string_view to_string(Objective o);
std::string_view to_string(AttentionMask m);
// Accepts "bert", "roberta", "gpt2" (also the "_style" suffixed forms).
Objective parse_objective(std::string_view s);

// Pre-training family. The segment/mask flags follow from the family and
// cannot be set independently.
class ArchVariant {
 public:
  constexpr ArchVariant() = default;
  constexpr explicit ArchVariant(Objective family) : family_(family) {}

  constexpr Objective objective() const { return family_; }
  constexpr bool uses_segments() const { return family_ == Objective::bert; }
  constexpr AttentionMask attention_mask() const {
    return family_ == Objective::gpt2 ? AttentionMask::causal : AttentionMask::bidirectional;
  }
  constexpr bool causal() const { return attention_mask() == AttentionMask::causal; }

  friend constexpr bool operator==(ArchVariant, ArchVariant) = default;

 private:
  Objective family_ = Objective::bert;
};

struct VocabSpec {
  std::int64_t tokens = 0;
  std::int64_t positions = 0;
  std::int64_t segments = 0;  // 0 or 2

  // Tokenizer conventions of the three families: WordPiece for BERT,
  // byte-level BPE for RoBERTa (two reserved positions) and GPT-2.
  static VocabSpec defaults_for(Objective o);

  friend bool operator==(const VocabSpec&, const VocabSpec&) = default;
};

struct ShapeConfig {
  std::int64_t heads = 0;        // A
  std::int64_t width = 0;        // H
  std::int64_t layers = 0;       // L
  std::int64_t context_len = 0;  // N_ctx
  std::int64_t ff_mult = 4;

  std::int64_t head_dim() const { return heads > 0 ? width / heads : 0; }
  std::int64_t ff_dim() const { return ff_mult * width; }

  friend bool operator==(const ShapeConfig&, const ShapeConfig&) = default;
};

struct ShapeViolation {
  std::string field;
  std::string message;
};

// Empty iff the shape is valid.
std::vector<ShapeViolation> validate_shape(const ShapeConfig& shape);
std::vector<ShapeViolation> validate_vocab(const VocabSpec& vocab);

// Throws ValidationError listing every violation.
void require_valid(const ShapeConfig& shape);

struct ParamOptions {
  bool include_bias = false;
  bool include_layernorm = false;
  // Output projection to the vocabulary shares the token embedding.
  bool tie_output_embedding = true;

  friend bool operator==(const ParamOptions&, const ParamOptions&) = default;
};

// Keys of ParamCount::breakdown.
namespace component {
inline constexpr std::string_view input_proj = "input_proj";
inline constexpr std::string_view output_proj = "output_proj";
inline constexpr std::string_view ffn = "ffn";
inline constexpr std::string_view biases = "biases";
inline constexpr std::string_view layer_norm = "layer_norm";
inline constexpr std::string_view embeddings = "embeddings";
}  // namespace component

struct ParamCount {
  Count n_model_approx = 0;    // 12 L H^2
  Count n_nonembed_exact = 0;  // projections + ffn (+ biases, layer norms when enabled)
  Count n_embed = 0;
  std::map<std::string, Count, std::less<>> breakdown;

  Count total() const { return checked_add(n_nonembed_exact, n_embed, "total parameters"); }
};

// N_model := 12 L H^2. Independent of heads and context length.
Count approx_model_size(const ShapeConfig& shape);

// Per layer: 3H^2 query/key/value projections (A heads of H x H/A each),
// H^2 output projection, 2 * ff_mult * H^2 feed-forward.
// Biases per layer: 3H (QKV) + H (output) + ff_dim + H (FFN).
// Layer norms: two per layer at 2H each, plus one final LN for causal models
// or one embedding LN for bidirectional ones.
ParamCount exact_param_count(const ShapeConfig& shape, ArchVariant arch, const VocabSpec& vocab,
                             const ParamOptions& options = {});

// Divisor of H closest to H/64; ties go to the larger head count.
std::int64_t nearest_head_count(std::int64_t width);

// Shape document: heads, width, layers, context_len, ff_mult, objective,
// vocab.{tokens, positions, segments}. Unknown keys are rejected.
struct ShapeDocument {
  ShapeConfig shape;
  ArchVariant arch;
  VocabSpec vocab;

  friend bool operator==(const ShapeDocument&, const ShapeDocument&) = default;
};

std::string shape_to_json(const ShapeDocument& doc, int indent = 2);
ShapeDocument shape_from_json(std::string_view text);

}  // namespace tscale
