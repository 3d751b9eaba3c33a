#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoaxdet/core/ops.hpp"
#include "hoaxdet/models/architecture.hpp"

namespace hoaxdet::zoo {

using TokenId = ad::TokenId;

struct NamedParameter {
  std::string name;
  Tensor<float>* tensor;
};

/// A trainable two-class model over a fixed-length id sequence. Implemented by
/// the word-level models below and by the transformer classifier.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;

  /// Architecture hyperparameters as recorded in checkpoints.
  virtual nlohmann::json hyperparameters() const = 0;

  /// Length every input sequence must have.
  virtual std::size_t input_length() const = 0;

  /// Records the forward pass and returns the [2] probability vector.
  virtual ad::Var<float> forward(ad::Graph<float>& graph, std::span<const TokenId> ids, bool training, Rng& rng) = 0;

  /// Trainable tensors in a fixed order (checkpoint and optimizer order).
  virtual std::vector<NamedParameter> parameters() = 0;

  /// Tokens of the vocabulary the ids refer to; stored in checkpoints.
  virtual const std::vector<std::string>& vocabulary_tokens() const = 0;

  /// Inference-mode probabilities (dropout off, no gradient tape).
  std::array<float, 2> predict(std::span<const TokenId> ids);

  std::int64_t parameter_count();

  void zero_grad();
};

enum class EmbeddingSource { random, word2vec };

/// CNN, BiLSTM or hybrid CNN-BiLSTM over word embeddings.
class SequenceClassifier final : public Classifier {
 public:
  /// Glorot-uniform kernels, +-0.05 recurrent kernels and embeddings, zero
  /// biases except a forget-gate input bias of 1.
  SequenceClassifier(ModelArchitecture arch, std::vector<std::string> vocabulary, std::uint64_t seed);

  /// Builds with zero-filled parameters, for checkpoint loading.
  SequenceClassifier(ModelArchitecture arch, std::vector<std::string> vocabulary);

  ModelKind kind() const override { return arch_.kind; }
  nlohmann::json hyperparameters() const override;
  std::size_t input_length() const override { return static_cast<std::size_t>(arch_.seq_len); }
  ad::Var<float> forward(ad::Graph<float>& graph, std::span<const TokenId> ids, bool training, Rng& rng) override;
  std::vector<NamedParameter> parameters() override;
  const std::vector<std::string>& vocabulary_tokens() const override { return vocabulary_; }

  const ModelArchitecture& architecture() const { return arch_; }
  EmbeddingSource embedding_source() const { return embedding_source_; }
  void set_embedding_source(EmbeddingSource s) { embedding_source_ = s; }

  Tensor<float>& embedding() { return tensor("embedding"); }
  Tensor<float>& tensor(const std::string& name);

  static ModelArchitecture architecture_from_json(ModelKind kind, const nlohmann::json& hp);

 private:
  void allocate();
  void initialize(std::uint64_t seed);
  ad::LstmWeights<float> bind_lstm(ad::Graph<float>& g, const std::string& prefix);

  ModelArchitecture arch_;
  std::vector<std::string> vocabulary_;
  std::vector<std::pair<std::string, Tensor<float>>> params_;
  EmbeddingSource embedding_source_ = EmbeddingSource::random;
};

/// Convenience wrapper: inference-mode probability vector.
std::array<float, 2> forward_classify(Classifier& model, std::span<const TokenId> ids, bool training, Rng& rng);

}  // namespace hoaxdet::zoo

namespace hoaxdet::w2v {
struct EmbeddingMatrix;
}

namespace hoaxdet::zoo {

/// Copies word2vec rows into the embedding layer, which stays trainable.
void init_embedding_from_pretrained(SequenceClassifier& model, const w2v::EmbeddingMatrix& embeddings);

}  // namespace hoaxdet::zoo
