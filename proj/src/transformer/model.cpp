#include "hoaxdet/transformer/model.hpp"

#include <numeric>

#include "hoaxdet/core/init.hpp"

namespace hoaxdet::tfm {

namespace {

using Params = std::vector<std::pair<std::string, Tensor<float>>>;

constexpr double kEmbeddingLimit = 0.035;

std::string layer_prefix(Index layer) { return "layer_" + std::to_string(layer) + "/"; }

Tensor<float>& find(Params& params, const std::string& name) {
  for (auto& [n, t] : params) {
    if (n == name) return t;
  }
  throw ConfigError("transformer has no parameter '" + name + "'");
}

void add(Params& params, std::string name, Shape shape) {
  params.emplace_back(std::move(name), init::parameter<float>(std::move(shape)));
}

// Kernels are Glorot-uniform, embeddings small uniform, layer-norm scales
// one, everything else zero.
void initialize(Params& params, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& [name, t] : params) {
    if (name.ends_with("/kernel")) {
      init::glorot_uniform(t, t.dim(0), t.dim(1), rng);
    } else if (name.starts_with("embeddings/")) {
      init::uniform(t, kEmbeddingLimit, rng);
    } else if (name.ends_with("/gamma")) {
      t.matrix().setOnes();
    } else {
      t.matrix().setZero();
    }
  }
}

std::vector<zoo::NamedParameter> named(Params& params) {
  std::vector<zoo::NamedParameter> out;
  for (auto& [n, t] : params) out.push_back({n, &t});
  return out;
}

}  // namespace

TransformerEncoder::TransformerEncoder(TransformerConfig config) : config_(std::move(config)) {
  config_.validate();
  const Index h = config_.hidden, f = config_.feed_forward;
  add(params_, "embeddings/token", {config_.vocab_size, h});
  add(params_, "embeddings/position", {config_.max_seq, h});
  add(params_, "embeddings/segment", {2, h});
  for (Index l = 0; l < config_.num_layers; ++l) {
    const std::string p = layer_prefix(l);
    for (const char* proj : {"query", "key", "value", "output"}) {
      add(params_, p + "attention/" + proj + "/kernel", {h, h});
      add(params_, p + "attention/" + proj + "/bias", {h});
    }
    add(params_, p + "attention_norm/gamma", {h});
    add(params_, p + "attention_norm/beta", {h});
    add(params_, p + "ffn/inner/kernel", {h, f});
    add(params_, p + "ffn/inner/bias", {f});
    add(params_, p + "ffn/outer/kernel", {f, h});
    add(params_, p + "ffn/outer/bias", {h});
    add(params_, p + "output_norm/gamma", {h});
    add(params_, p + "output_norm/beta", {h});
  }
}

TransformerEncoder::TransformerEncoder(TransformerConfig config, std::uint64_t seed)
    : TransformerEncoder(std::move(config)) {
  initialize(params_, seed);
}

std::vector<zoo::NamedParameter> TransformerEncoder::parameters() { return named(params_); }

Tensor<float>& TransformerEncoder::tensor(const std::string& name) { return find(params_, name); }

const Tensor<float>& TransformerEncoder::tensor(const std::string& name) const {
  return find(const_cast<Params&>(params_), name);
}

EncoderLayerWeights<float> TransformerEncoder::bind_layer(ad::Graph<float>& g, Index layer) {
  const std::string p = layer_prefix(layer);
  auto v = [&](const std::string& name) { return g.parameter(tensor(p + name)); };
  EncoderLayerWeights<float> w;
  w.attention = {v("attention/query/kernel"), v("attention/query/bias"),   v("attention/key/kernel"),
                 v("attention/key/bias"),     v("attention/value/kernel"), v("attention/value/bias"),
                 v("attention/output/kernel"), v("attention/output/bias")};
  w.attention_norm_gamma = v("attention_norm/gamma");
  w.attention_norm_beta = v("attention_norm/beta");
  w.ffn = {v("ffn/inner/kernel"), v("ffn/inner/bias"), v("ffn/outer/kernel"), v("ffn/outer/bias")};
  w.output_norm_gamma = v("output_norm/gamma");
  w.output_norm_beta = v("output_norm/beta");
  return w;
}

ad::Var<float> encode_sequence(ad::Graph<float>& g, std::span<const std::int32_t> ids,
                               std::span<const std::int32_t> segments, TransformerEncoder& encoder) {
  const auto& cfg = encoder.config();
  if (ids.empty()) throw ContractError("encode_sequence: empty input");
  if (static_cast<Index>(ids.size()) > cfg.max_seq) {
    throw LengthError("sequence of " + std::to_string(ids.size()) + " exceeds the maximum of " +
                      std::to_string(cfg.max_seq));
  }
  if (segments.size() != ids.size()) {
    throw ShapeError("encode_sequence: " + std::to_string(ids.size()) + " ids but " +
                     std::to_string(segments.size()) + " segment ids");
  }
  std::vector<std::int32_t> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<bool> padding(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) padding[i] = ids[i] == SpecialTokens::pad;

  auto x = ad::add(ad::add(ad::embedding_lookup(ids, g.parameter(encoder.tensor("embeddings/token"))),
                           ad::embedding_lookup(std::span<const std::int32_t>(positions),
                                                g.parameter(encoder.tensor("embeddings/position")))),
                   ad::embedding_lookup(segments, g.parameter(encoder.tensor("embeddings/segment"))));
  for (Index l = 0; l < cfg.num_layers; ++l) {
    x = encoder_layer_forward(x, cfg.num_heads, encoder.bind_layer(g, l), padding);
  }
  return x;
}

PretrainingModel::PretrainingModel(TransformerConfig config, std::vector<std::string> vocabulary, std::uint64_t seed)
    : encoder_(config, seed), vocabulary_(std::move(vocabulary)) {
  if (static_cast<Index>(vocabulary_.size()) != encoder_.config().vocab_size) {
    throw ConfigError("vocabulary has " + std::to_string(vocabulary_.size()) + " pieces but the config declares " +
                      std::to_string(encoder_.config().vocab_size));
  }
  const Index h = encoder_.config().hidden;
  add(heads_, "mlm/transform/kernel", {h, h});
  add(heads_, "mlm/transform/bias", {h});
  add(heads_, "mlm/norm/gamma", {h});
  add(heads_, "mlm/norm/beta", {h});
  add(heads_, "mlm/output_bias", {encoder_.config().vocab_size});
  add(heads_, "nsp/kernel", {h, 2});
  add(heads_, "nsp/bias", {2});
  initialize(heads_, seed ^ 0xa5a5a5a5ULL);
}

Tensor<float>& PretrainingModel::head(const std::string& name) { return find(heads_, name); }

std::vector<zoo::NamedParameter> PretrainingModel::parameters() {
  auto out = encoder_.parameters();
  for (auto& p : named(heads_)) out.push_back(p);
  return out;
}

ad::Var<float> PretrainingModel::loss(ad::Graph<float>& g, const PretrainExample& ex, double* mlm, double* nsp,
                                      bool* mlm_skipped) {
  const auto hidden = encode_sequence(g, ex.ids, ex.segments, encoder_);

  const std::int32_t cls_row = 0;
  auto nsp_probs = ad::softmax(
      ad::dense(ad::embedding_lookup(std::span<const std::int32_t>(&cls_row, 1), hidden), g.parameter(head("nsp/kernel")),
                g.parameter(head("nsp/bias"))));
  Tensor<float> nsp_target(Shape{1, 2});
  nsp_target[ex.is_next ? 0 : 1] = 1.0f;
  auto total = ad::categorical_crossentropy(nsp_probs, nsp_target);
  if (nsp) *nsp = total.value()[0];

  const bool skip = ex.masked_positions.empty();
  if (mlm_skipped) *mlm_skipped = skip;
  if (mlm) *mlm = 0;
  if (skip) return total;

  std::vector<std::int32_t> rows(ex.masked_positions.begin(), ex.masked_positions.end());
  auto picked = ad::embedding_lookup(std::span<const std::int32_t>(rows), hidden);
  auto transformed = ad::layer_norm(
      ad::gelu(ad::affine(picked, g.parameter(head("mlm/transform/kernel")), g.parameter(head("mlm/transform/bias")))),
      g.parameter(head("mlm/norm/gamma")), g.parameter(head("mlm/norm/beta")));
  auto logits = ad::add_bias(ad::matmul(transformed, ad::transpose(g.parameter(encoder_.tensor("embeddings/token")))),
                             g.parameter(head("mlm/output_bias")));
  Tensor<float> targets(Shape{static_cast<Index>(rows.size()), encoder_.config().vocab_size});
  for (std::size_t i = 0; i < rows.size(); ++i) targets.matrix()(static_cast<Index>(i), ex.masked_originals[i]) = 1.0f;
  auto mlm_loss = ad::categorical_crossentropy(ad::softmax(logits), targets);
  if (mlm) *mlm = mlm_loss.value()[0];
  return ad::add(total, mlm_loss);
}

PretrainStepResult pretrain_step(PretrainingModel& model, std::span<const PretrainExample> batch,
                                 AdamState<float>& optimizer) {
  if (batch.empty()) throw ContractError("pretrain_step: empty batch");
  auto named_params = model.parameters();
  std::vector<Tensor<float>*> params;
  for (auto& p : named_params) {
    p.tensor->zero_grad();
    params.push_back(p.tensor);
  }
  PretrainStepResult result;
  const float weight = 1.0f / static_cast<float>(batch.size());
  for (const auto& ex : batch) {
    ad::Graph<float> g;
    double mlm = 0, nsp = 0;
    bool skipped = false;
    const auto loss = model.loss(g, ex, &mlm, &nsp, &skipped);
    g.backward(ad::scale(loss, weight));
    result.loss += loss.value()[0];
    result.mlm_loss += mlm;
    result.nsp_loss += nsp;
    if (skipped) ++result.skipped_mlm;
  }
  adam_step(optimizer, std::span<Tensor<float>* const>(params));
  for (auto* p : params) p->zero_grad();
  const double n = static_cast<double>(batch.size());
  result.loss /= n;
  result.mlm_loss /= n;
  result.nsp_loss /= n;
  return result;
}

TransformerClassifier::TransformerClassifier(TransformerConfig config, std::vector<std::string> vocabulary,
                                             double dropout)
    : encoder_(std::move(config)),
      vocabulary_(std::move(vocabulary)),
      dropout_(dropout),
      kernel_(init::parameter<float>({encoder_.config().hidden, 2})),
      bias_(init::parameter<float>({2})) {
  if (static_cast<Index>(vocabulary_.size()) != encoder_.config().vocab_size) {
    throw ConfigError("vocabulary has " + std::to_string(vocabulary_.size()) + " pieces but the encoder expects " +
                      std::to_string(encoder_.config().vocab_size));
  }
  if (dropout_ < 0 || dropout_ >= 1) throw ConfigError("dropout must lie in [0, 1)");
}

TransformerClassifier::TransformerClassifier(TransformerEncoder encoder, std::vector<std::string> vocabulary,
                                             double dropout, std::uint64_t seed)
    : TransformerClassifier(encoder.config(), std::move(vocabulary), dropout) {
  encoder_ = std::move(encoder);
  Rng rng(seed);
  init::glorot_uniform(kernel_, kernel_.dim(0), kernel_.dim(1), rng);
}

nlohmann::json TransformerClassifier::hyperparameters() const {
  auto j = encoder_.config().to_json();
  j["dropout"] = dropout_;
  return j;
}

std::vector<zoo::NamedParameter> TransformerClassifier::parameters() {
  auto out = encoder_.parameters();
  out.push_back({"classifier/kernel", &kernel_});
  out.push_back({"classifier/bias", &bias_});
  return out;
}

ad::Var<float> TransformerClassifier::forward(ad::Graph<float>& g, std::span<const zoo::TokenId> ids, bool training,
                                              Rng& rng) {
  // Trailing [PAD] keys are masked everywhere, so dropping them leaves the
  // [CLS] state unchanged.
  std::size_t n = ids.size();
  while (n > 1 && ids[n - 1] == SpecialTokens::pad) --n;
  const auto used = ids.first(n);
  const std::vector<std::int32_t> segments(n, 0);
  const auto hidden = encode_sequence(g, used, segments, encoder_);
  const std::int32_t cls_row = 0;
  auto pooled = ad::embedding_lookup(std::span<const std::int32_t>(&cls_row, 1), hidden);
  pooled = ad::dropout(pooled, dropout_, training, rng);
  auto probs = ad::softmax(ad::dense(pooled, g.parameter(kernel_), g.parameter(bias_)));
  return ad::reshape(probs, Shape{2});
}

std::vector<zoo::TokenId> encode_for_classification(std::string_view raw, const WordPieceVocab& vocab,
                                                    std::size_t length, const text::StopwordList* stoplist) {
  if (length < 3) throw ConfigError("classification length must leave room for [CLS], [SEP] and one piece");
  auto words = text::tokenize(text::normalize_text(raw));
  if (stoplist) words = text::remove_stopwords(words, *stoplist);
  if (words.empty()) throw ContractError("text is empty after cleaning");
  auto pieces = wordpiece_encode(words, vocab);
  if (pieces.size() > length - 2) pieces.resize(length - 2);
  std::vector<zoo::TokenId> ids{SpecialTokens::cls};
  ids.insert(ids.end(), pieces.begin(), pieces.end());
  ids.push_back(SpecialTokens::sep);
  ids.resize(length, SpecialTokens::pad);
  return ids;
}

std::unique_ptr<TransformerClassifier> fine_tune(const PretrainingModel& pretrained, const WordPieceVocab& vocab,
                                                 const harness::LabeledSet& train, const harness::TrainConfig& config,
                                                 const harness::EpochCallback& on_epoch) {
  if (vocab.pieces() != pretrained.vocabulary()) {
    throw ConfigError("fine-tuning vocabulary (" + std::to_string(vocab.size()) +
                      " pieces) differs from the pretraining vocabulary (" +
                      std::to_string(pretrained.vocabulary().size()) + " pieces)");
  }
  auto model = std::make_unique<TransformerClassifier>(pretrained.encoder(), vocab.pieces(), config.dropout,
                                                       config.seed ^ 0xc1a55ULL);
  harness::run_training(*model, train, config, on_epoch);
  return model;
}

std::array<float, 2> classify_with_transformer(TransformerClassifier& model, const WordPieceVocab& vocab,
                                               std::string_view raw, const text::StopwordList* stoplist) {
  const auto ids = encode_for_classification(raw, vocab, model.input_length(), stoplist);
  return model.predict(ids);
}

}  // namespace hoaxdet::tfm
