#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hoaxdet/core/tensor.hpp"

namespace hoaxdet::zoo {

enum class ModelKind { cnn, bilstm, hybrid, transformer };

/// Checkpoint spelling: CNN, BiLSTM, HybridCnnBiLstm, MiniTransformer.
std::string_view kind_name(ModelKind kind);
ModelKind parse_kind(std::string_view name);  // throws VersionError

struct LayerSpec {
  std::string name;
  Shape output;
  std::int64_t params = 0;
};

/// Declarative layer stack of one of the word-level classifiers.
struct ModelArchitecture {
  ModelKind kind = ModelKind::cnn;
  Index vocab_size = 2;
  Index seq_len = 1000;
  Index embed_dim = 50;
  Index filters = 32;
  Index kernel_size = 2;
  Index hidden = 128;  // per LSTM direction
  Index classes = 2;
  double dropout = 0.5;

  /// Output shape and trainable parameter count per layer, in table order.
  std::vector<LayerSpec> layers() const;
};

ModelArchitecture build_cnn(Index vocab_size, Index seq_len = 1000);
ModelArchitecture build_bilstm(Index vocab_size, Index seq_len = 1000);
ModelArchitecture build_hybrid(Index vocab_size, Index seq_len = 1000);
ModelArchitecture build_architecture(ModelKind kind, Index vocab_size, Index seq_len = 1000);

struct ParameterCount {
  std::vector<std::pair<std::string, std::int64_t>> per_layer;
  std::int64_t total = 0;
};

ParameterCount count_parameters(const ModelArchitecture& arch);

/// Four gate blocks, each with input kernel, recurrent kernel and two biases.
inline std::int64_t lstm_direction_params(Index input, Index hidden) { return 4 * hidden * (input + hidden + 2); }

}  // namespace hoaxdet::zoo
