#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hoaxdet/core/errors.hpp"
#include "hoaxdet/core/tensor.hpp"

namespace hoaxdet::tfm {

/// Reserved ids present in every subword vocabulary.
struct SpecialTokens {
  static constexpr std::int32_t pad = 0;
  static constexpr std::int32_t unk = 1;
  static constexpr std::int32_t cls = 2;
  static constexpr std::int32_t sep = 3;
  static constexpr std::int32_t mask = 4;
  static constexpr std::int32_t count = 5;

  static bool is_special(std::int32_t id) { return id >= 0 && id < count; }
};

struct TransformerConfig {
  std::string preset = "custom";
  Index num_layers = 2;
  Index hidden = 64;
  Index num_heads = 4;
  Index feed_forward = 128;
  Index max_seq = 128;
  Index vocab_size = 0;
  Index languages = 1;  // metadata only

  Index head_dim() const { return hidden / num_heads; }

  /// Throws ConfigError on hidden % heads != 0, max_seq < 2 or an empty
  /// vocabulary.
  void validate() const;

  /// Trainable scalars of the encoder stack including embeddings, excluding
  /// task heads.
  std::int64_t encoder_parameter_count() const;

  nlohmann::json to_json() const;
  static TransformerConfig from_json(const nlohmann::json& j);

  /// 12 layers, 768 hidden, 12 heads (3072 feed-forward, 512 positions, 104
  /// languages of metadata).
  static TransformerConfig base(Index vocab_size);

  /// 2 layers, 64 hidden, 4 heads, 128 feed-forward, 128 positions.
  static TransformerConfig desk(Index vocab_size);
};

inline void TransformerConfig::validate() const {
  if (num_layers < 1 || hidden < 1 || num_heads < 1 || feed_forward < 1) {
    throw ConfigError("transformer dimensions must be positive");
  }
  if (hidden % num_heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(num_heads) +
                      " heads");
  }
  if (max_seq < 2) throw ConfigError("max sequence length must leave room for [CLS] and [SEP]");
  if (vocab_size <= SpecialTokens::count) throw ConfigError("subword vocabulary too small");
}

inline std::int64_t TransformerConfig::encoder_parameter_count() const {
  const std::int64_t h = hidden, f = feed_forward;
  const std::int64_t embeddings = (vocab_size + max_seq + 2) * h;
  const std::int64_t attention = 4 * (h * h + h);
  const std::int64_t ffn = h * f + f + f * h + h;
  const std::int64_t norms = 2 * 2 * h;
  return embeddings + num_layers * (attention + ffn + norms);
}

inline nlohmann::json TransformerConfig::to_json() const {
  return {{"preset", preset},     {"num_layers", num_layers}, {"hidden", hidden},         {"num_heads", num_heads},
          {"feed_forward", feed_forward}, {"max_seq", max_seq}, {"vocab_size", vocab_size}, {"languages", languages}};
}

inline TransformerConfig TransformerConfig::from_json(const nlohmann::json& j) {
  TransformerConfig c;
  c.preset = j.value("preset", "custom");
  c.num_layers = j.at("num_layers").get<Index>();
  c.hidden = j.at("hidden").get<Index>();
  c.num_heads = j.at("num_heads").get<Index>();
  c.feed_forward = j.at("feed_forward").get<Index>();
  c.max_seq = j.at("max_seq").get<Index>();
  c.vocab_size = j.at("vocab_size").get<Index>();
  c.languages = j.value("languages", Index{1});
  c.validate();
  return c;
}

inline TransformerConfig TransformerConfig::base(Index vocab_size) {
  TransformerConfig c;
  c.preset = "base";
  c.num_layers = 12;
  c.hidden = 768;
  c.num_heads = 12;
  c.feed_forward = 3072;
  c.max_seq = 512;
  c.vocab_size = vocab_size;
  c.languages = 104;
  c.validate();
  return c;
}

inline TransformerConfig TransformerConfig::desk(Index vocab_size) {
  TransformerConfig c;
  c.preset = "desk";
  c.num_layers = 2;
  c.hidden = 64;
  c.num_heads = 4;
  c.feed_forward = 128;
  c.max_seq = 128;
  c.vocab_size = vocab_size;
  c.validate();
  return c;
}

}  // namespace hoaxdet::tfm
