#include "hoaxdet/models/architecture.hpp"

#include "hoaxdet/core/errors.hpp"

namespace hoaxdet::zoo {

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::cnn:
      return "CNN";
    case ModelKind::bilstm:
      return "BiLSTM";
    case ModelKind::hybrid:
      return "HybridCnnBiLstm";
    case ModelKind::transformer:
      return "MiniTransformer";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  for (auto k : {ModelKind::cnn, ModelKind::bilstm, ModelKind::hybrid, ModelKind::transformer}) {
    if (kind_name(k) == name) return k;
  }
  throw VersionError("unknown architecture kind '" + std::string(name) + "'");
}

std::vector<LayerSpec> ModelArchitecture::layers() const {
  std::vector<LayerSpec> out;
  out.push_back({"Embedding", {seq_len, embed_dim}, static_cast<std::int64_t>(vocab_size) * embed_dim});
  Shape current{seq_len, embed_dim};

  auto conv = [&] {
    current = {current[0] - kernel_size + 1, filters};
    out.push_back({"Conv1D", current, kernel_size * embed_dim * filters + filters});
    out.push_back({"Dropout", current, 0});
  };
  auto recurrent = [&] {
    const Index input = current[1];
    current = {current[0], 2 * hidden};
    out.push_back({"Bidirectional", current, 2 * lstm_direction_params(input, hidden)});
  };
  auto head = [&](bool dropout_after_pool) {
    current = {current[1]};
    out.push_back({"GlobalMaxPool1D", current, 0});
    if (dropout_after_pool) out.push_back({"Dropout", current, 0});
    out.push_back({"Dense", {classes}, current[0] * classes + classes});
  };

  switch (kind) {
    case ModelKind::cnn:
      conv();
      head(false);
      break;
    case ModelKind::bilstm:
      recurrent();
      head(true);
      break;
    case ModelKind::hybrid:
      conv();
      current = {current[0] / 2, current[1]};
      out.push_back({"MaxPool1D", current, 0});
      recurrent();
      head(true);
      break;
    case ModelKind::transformer:
      throw ConfigError("transformer layers are described by TransformerConfig");
  }
  return out;
}

namespace {

ModelArchitecture make(ModelKind kind, Index vocab_size, Index seq_len) {
  if (vocab_size < 2) throw ConfigError("vocabulary must hold at least PAD and OOV");
  ModelArchitecture arch;
  arch.kind = kind;
  arch.vocab_size = vocab_size;
  arch.seq_len = seq_len;
  const Index min_len = kind == ModelKind::hybrid ? arch.kernel_size + 1 : arch.kernel_size;
  if (seq_len < min_len) throw ConfigError("sequence length " + std::to_string(seq_len) + " too short");
  return arch;
}

}  // namespace

ModelArchitecture build_cnn(Index vocab_size, Index seq_len) { return make(ModelKind::cnn, vocab_size, seq_len); }
ModelArchitecture build_bilstm(Index vocab_size, Index seq_len) { return make(ModelKind::bilstm, vocab_size, seq_len); }
ModelArchitecture build_hybrid(Index vocab_size, Index seq_len) { return make(ModelKind::hybrid, vocab_size, seq_len); }

ModelArchitecture build_architecture(ModelKind kind, Index vocab_size, Index seq_len) {
  return make(kind, vocab_size, seq_len);
}

ParameterCount count_parameters(const ModelArchitecture& arch) {
  ParameterCount count;
  for (const auto& layer : arch.layers()) {
    count.per_layer.emplace_back(layer.name, layer.params);
    count.total += layer.params;
  }
  return count;
}

}  // namespace hoaxdet::zoo
