#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hoaxdet/core/adam.hpp"
#include "hoaxdet/harness/training.hpp"
#include "hoaxdet/models/classifier.hpp"
#include "hoaxdet/text/pipeline.hpp"
#include "hoaxdet/transformer/attention.hpp"
#include "hoaxdet/transformer/pretraining.hpp"

namespace hoaxdet::tfm {

/// Learned token, position and segment embeddings followed by the encoder
/// stack. Parameters are named "embeddings/..." and "layer_<i>/...".
class TransformerEncoder {
 public:
  /// Zero-filled parameters, for checkpoint loading.
  explicit TransformerEncoder(TransformerConfig config);
  TransformerEncoder(TransformerConfig config, std::uint64_t seed);

  const TransformerConfig& config() const { return config_; }
  std::vector<zoo::NamedParameter> parameters();
  Tensor<float>& tensor(const std::string& name);
  const Tensor<float>& tensor(const std::string& name) const;

  EncoderLayerWeights<float> bind_layer(ad::Graph<float>& g, Index layer);

 private:
  TransformerConfig config_;
  std::vector<std::pair<std::string, Tensor<float>>> params_;
};

/// Returns the [n x hidden] final hidden states. [PAD] keys are masked in
/// every layer. Throws LengthError when n exceeds the configured maximum and
/// ShapeError when ids and segments differ in length.
ad::Var<float> encode_sequence(ad::Graph<float>& g, std::span<const std::int32_t> ids,
                               std::span<const std::int32_t> segments, TransformerEncoder& encoder);

struct PretrainStepResult {
  double loss = 0;  // mean over the batch of MLM + NSP
  double mlm_loss = 0;
  double nsp_loss = 0;
  std::size_t skipped_mlm = 0;  // examples without masked positions
};

/// Encoder plus masked-token head (tied to the token embeddings) and
/// next-sentence head on the [CLS] state.
class PretrainingModel {
 public:
  PretrainingModel(TransformerConfig config, std::vector<std::string> vocabulary, std::uint64_t seed);

  TransformerEncoder& encoder() { return encoder_; }
  const TransformerEncoder& encoder() const { return encoder_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::vector<zoo::NamedParameter> parameters();

  /// Records one example's loss on `g`. `mlm_skipped` is set when it has no
  /// masked positions.
  ad::Var<float> loss(ad::Graph<float>& g, const PretrainExample& ex, double* mlm, double* nsp, bool* mlm_skipped);

 private:
  TransformerEncoder encoder_;
  std::vector<std::string> vocabulary_;
  std::vector<std::pair<std::string, Tensor<float>>> heads_;
  Tensor<float>& head(const std::string& name);
};

/// One Adam update on the mean batch loss. Throws ContractError on an empty
/// batch.
PretrainStepResult pretrain_step(PretrainingModel& model, std::span<const PretrainExample> batch,
                                 AdamState<float>& optimizer);

/// Encoder with a dense two-way softmax head on the [CLS] state.
class TransformerClassifier final : public zoo::Classifier {
 public:
  TransformerClassifier(TransformerEncoder encoder, std::vector<std::string> vocabulary, double dropout,
                        std::uint64_t seed);

  /// Zero-filled, for checkpoint loading.
  TransformerClassifier(TransformerConfig config, std::vector<std::string> vocabulary, double dropout);

  zoo::ModelKind kind() const override { return zoo::ModelKind::transformer; }
  nlohmann::json hyperparameters() const override;
  std::size_t input_length() const override { return static_cast<std::size_t>(encoder_.config().max_seq); }
  ad::Var<float> forward(ad::Graph<float>& graph, std::span<const zoo::TokenId> ids, bool training,
                         Rng& rng) override;
  std::vector<zoo::NamedParameter> parameters() override;
  const std::vector<std::string>& vocabulary_tokens() const override { return vocabulary_; }

  const TransformerEncoder& encoder() const { return encoder_; }
  double dropout() const { return dropout_; }

 private:
  TransformerEncoder encoder_;
  std::vector<std::string> vocabulary_;
  double dropout_;
  Tensor<float> kernel_;
  Tensor<float> bias_;
};

/// [CLS] pieces [SEP] then [PAD] up to `length`, truncating the pieces when
/// needed. Throws ContractError when nothing is left after cleaning.
std::vector<zoo::TokenId> encode_for_classification(std::string_view raw, const WordPieceVocab& vocab,
                                                    std::size_t length, const text::StopwordList* stoplist = nullptr);

/// Copies the pretrained encoder, attaches a fresh head and trains it with
/// the harness loop. Throws ConfigError when `vocab` differs from the
/// pretraining vocabulary.
std::unique_ptr<TransformerClassifier> fine_tune(const PretrainingModel& pretrained, const WordPieceVocab& vocab,
                                                 const harness::LabeledSet& train, const harness::TrainConfig& config,
                                                 const harness::EpochCallback& on_epoch = {});

/// Inference-mode probabilities for raw text.
std::array<float, 2> classify_with_transformer(TransformerClassifier& model, const WordPieceVocab& vocab,
                                               std::string_view raw, const text::StopwordList* stoplist = nullptr);

}  // namespace hoaxdet::tfm
