#include "hoaxdet/models/classifier.hpp"

#include "hoaxdet/core/init.hpp"
#include "hoaxdet/embed/word2vec.hpp"

namespace hoaxdet::zoo {

std::array<float, 2> Classifier::predict(std::span<const TokenId> ids) {
  Rng unused(0);
  return forward_classify(*this, ids, false, unused);
}

std::int64_t Classifier::parameter_count() {
  std::int64_t total = 0;
  for (const auto& p : parameters()) total += p.tensor->size();
  return total;
}

void Classifier::zero_grad() {
  for (const auto& p : parameters()) p.tensor->zero_grad();
}

std::array<float, 2> forward_classify(Classifier& model, std::span<const TokenId> ids, bool training, Rng& rng) {
  ad::Graph<float> graph(false);
  const auto probs = model.forward(graph, ids, training, rng);
  return {probs.value()[0], probs.value()[1]};
}

SequenceClassifier::SequenceClassifier(ModelArchitecture arch, std::vector<std::string> vocabulary)
    : arch_(arch), vocabulary_(std::move(vocabulary)) {
  if (arch_.kind == ModelKind::transformer) throw ConfigError("SequenceClassifier cannot host a transformer");
  if (!vocabulary_.empty() && static_cast<Index>(vocabulary_.size()) != arch_.vocab_size) {
    throw ShapeError("vocabulary has " + std::to_string(vocabulary_.size()) + " tokens but the model expects " +
                     std::to_string(arch_.vocab_size));
  }
  allocate();
}

SequenceClassifier::SequenceClassifier(ModelArchitecture arch, std::vector<std::string> vocabulary, std::uint64_t seed)
    : SequenceClassifier(arch, std::move(vocabulary)) {
  initialize(seed);
}

void SequenceClassifier::allocate() {
  const Index e = arch_.embed_dim, h = arch_.hidden;
  auto add = [&](std::string name, Shape shape) { params_.emplace_back(std::move(name), init::parameter<float>(std::move(shape))); };
  add("embedding", {arch_.vocab_size, e});
  Index features = e;
  if (arch_.kind != ModelKind::bilstm) {
    add("conv1d/kernel", {arch_.kernel_size, e, arch_.filters});
    add("conv1d/bias", {arch_.filters});
    features = arch_.filters;
  }
  if (arch_.kind != ModelKind::cnn) {
    for (const char* dir : {"forward", "backward"}) {
      const std::string prefix = std::string("bilstm/") + dir;
      add(prefix + "/input_kernel", {features, 4 * h});
      add(prefix + "/recurrent_kernel", {h, 4 * h});
      add(prefix + "/input_bias", {4 * h});
      add(prefix + "/recurrent_bias", {4 * h});
    }
    features = 2 * h;
  }
  add("dense/kernel", {features, arch_.classes});
  add("dense/bias", {arch_.classes});
}

void SequenceClassifier::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const Index h = arch_.hidden;
  for (auto& [name, t] : params_) {
    if (name == "embedding") {
      init::uniform(t, 0.05, rng);
    } else if (name == "conv1d/kernel") {
      init::glorot_uniform(t, arch_.kernel_size * t.dim(1), arch_.kernel_size * t.dim(2), rng);
    } else if (name.ends_with("input_kernel") || name == "dense/kernel") {
      init::glorot_uniform(t, t.dim(0), t.dim(1), rng);
    } else if (name.ends_with("recurrent_kernel")) {
      init::uniform(t, 0.05, rng);
    } else if (name.ends_with("/input_bias")) {
      t.matrix().setZero();
      t.matrix().middleCols(h, h).setOnes();
    } else {
      t.matrix().setZero();
    }
  }
}

Tensor<float>& SequenceClassifier::tensor(const std::string& name) {
  for (auto& [n, t] : params_) {
    if (n == name) return t;
  }
  throw ConfigError("model has no parameter '" + name + "'");
}

std::vector<NamedParameter> SequenceClassifier::parameters() {
  std::vector<NamedParameter> out;
  for (auto& [n, t] : params_) out.push_back({n, &t});
  return out;
}

nlohmann::json SequenceClassifier::hyperparameters() const {
  return {{"vocab_size", arch_.vocab_size}, {"seq_len", arch_.seq_len}, {"embed_dim", arch_.embed_dim},
          {"filters", arch_.filters},      {"kernel_size", arch_.kernel_size}, {"hidden", arch_.hidden},
          {"classes", arch_.classes},      {"dropout", arch_.dropout},
          {"embedding_source", embedding_source_ == EmbeddingSource::word2vec ? "word2vec" : "random"}};
}

ModelArchitecture SequenceClassifier::architecture_from_json(ModelKind kind, const nlohmann::json& hp) {
  ModelArchitecture arch = build_architecture(kind, hp.at("vocab_size").get<Index>(), hp.at("seq_len").get<Index>());
  arch.embed_dim = hp.at("embed_dim").get<Index>();
  arch.filters = hp.at("filters").get<Index>();
  arch.kernel_size = hp.at("kernel_size").get<Index>();
  arch.hidden = hp.at("hidden").get<Index>();
  arch.classes = hp.at("classes").get<Index>();
  arch.dropout = hp.at("dropout").get<double>();
  return arch;
}

ad::LstmWeights<float> SequenceClassifier::bind_lstm(ad::Graph<float>& g, const std::string& prefix) {
  return {g.parameter(tensor(prefix + "/input_kernel")), g.parameter(tensor(prefix + "/recurrent_kernel")),
          g.parameter(tensor(prefix + "/input_bias")), g.parameter(tensor(prefix + "/recurrent_bias"))};
}

ad::Var<float> SequenceClassifier::forward(ad::Graph<float>& g, std::span<const TokenId> ids, bool training, Rng& rng) {
  if (static_cast<Index>(ids.size()) != arch_.seq_len) {
    throw ShapeError("expected a sequence of " + std::to_string(arch_.seq_len) + " ids, got " +
                     std::to_string(ids.size()));
  }
  auto x = ad::embedding_lookup(ids, g.parameter(tensor("embedding")));
  if (arch_.kind != ModelKind::bilstm) {
    x = ad::conv1d_valid(x, g.parameter(tensor("conv1d/kernel")), g.parameter(tensor("conv1d/bias")));
    x = ad::dropout(x, arch_.dropout, training, rng);
  }
  if (arch_.kind == ModelKind::hybrid) x = ad::max_pool1d(x);
  if (arch_.kind != ModelKind::cnn) {
    x = ad::bilstm_forward(x, bind_lstm(g, "bilstm/forward"), bind_lstm(g, "bilstm/backward"));
  }
  x = ad::global_max_pool1d(x);
  if (arch_.kind != ModelKind::cnn) x = ad::dropout(x, arch_.dropout, training, rng);
  return ad::softmax(ad::dense(x, g.parameter(tensor("dense/kernel")), g.parameter(tensor("dense/bias"))));
}

void init_embedding_from_pretrained(SequenceClassifier& model, const w2v::EmbeddingMatrix& embeddings) {
  Tensor<float>& table = model.embedding();
  if (embeddings.table.dim(0) != table.dim(0) || embeddings.table.dim(1) != table.dim(1)) {
    throw ShapeError("pretrained embeddings " + shape_str(embeddings.table.shape()) + " do not match layer " +
                     shape_str(table.shape()));
  }
  table.matrix() = embeddings.table.matrix();
  model.set_embedding_source(EmbeddingSource::word2vec);
}

}  // namespace hoaxdet::zoo
