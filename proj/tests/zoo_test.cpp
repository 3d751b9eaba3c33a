#include <gtest/gtest.h>

#include <cstring>
#include <numeric>
#include <set>

#include "hoaxdet/core/ops.hpp"
#include "hoaxdet/embed/word2vec.hpp"
#include "hoaxdet/models/architecture.hpp"
#include "hoaxdet/models/classifier.hpp"

using namespace hoaxdet;
using namespace hoaxdet::zoo;

namespace {

constexpr Index kTableVocab = 43156;

std::vector<std::int64_t> counts_of(const ModelArchitecture& arch) {
  std::vector<std::int64_t> out;
  for (const auto& [name, n] : count_parameters(arch).per_layer) out.push_back(n);
  return out;
}

std::vector<Shape> shapes_of(const ModelArchitecture& arch) {
  std::vector<Shape> out;
  for (const auto& layer : arch.layers()) out.push_back(layer.output);
  return out;
}

std::vector<std::string> names(Index vocab) {
  std::vector<std::string> v{"<PAD>", "<OOV>"};
  for (Index i = 2; i < vocab; ++i) v.push_back("t" + std::to_string(i));
  return v;
}

std::vector<TokenId> random_ids(std::size_t n, Index vocab, Rng& rng) {
  std::vector<TokenId> ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(rng.uniform_int(static_cast<std::uint64_t>(vocab)));
  return ids;
}

}  // namespace

TEST(Architecture, CnnTable) {
  const auto arch = build_cnn(kTableVocab);
  EXPECT_EQ(counts_of(arch), (std::vector<std::int64_t>{2157800, 3232, 0, 0, 66}));
  EXPECT_EQ(count_parameters(arch).total, 2161098);
  EXPECT_EQ(shapes_of(arch), (std::vector<Shape>{{1000, 50}, {999, 32}, {999, 32}, {32}, {2}}));
}

TEST(Architecture, BiLstmTable) {
  const auto arch = build_bilstm(kTableVocab);
  EXPECT_EQ(counts_of(arch), (std::vector<std::int64_t>{2157800, 184320, 0, 0, 514}));
  EXPECT_EQ(count_parameters(arch).total, 2342634);
  EXPECT_EQ(arch.layers()[1].output, (Shape{1000, 256}));
}

TEST(Architecture, HybridTable) {
  const auto arch = build_hybrid(kTableVocab);
  EXPECT_EQ(counts_of(arch), (std::vector<std::int64_t>{2157800, 3232, 0, 0, 165888, 0, 0, 514}));
  EXPECT_EQ(count_parameters(arch).total, 2327434);
  const auto s = shapes_of(arch);
  EXPECT_EQ(s[1], (Shape{999, 32}));
  EXPECT_EQ(s[3], (Shape{499, 32}));
  EXPECT_EQ(s[4], (Shape{499, 256}));
}

TEST(Architecture, LayerNamesInTableOrder) {
  std::vector<std::string> got;
  for (const auto& [name, n] : count_parameters(build_hybrid(10)).per_layer) got.push_back(name);
  EXPECT_EQ(got, (std::vector<std::string>{"Embedding", "Conv1D", "Dropout", "MaxPool1D", "Bidirectional",
                                           "GlobalMaxPool1D", "Dropout", "Dense"}));
}

TEST(Architecture, OnlyEmbeddingDependsOnVocab) {
  Rng rng(3);
  for (auto kind : {ModelKind::cnn, ModelKind::bilstm, ModelKind::hybrid}) {
    const auto reference = counts_of(build_architecture(kind, kTableVocab));
    for (int trial = 0; trial < 10; ++trial) {
      const Index v = 2 + static_cast<Index>(rng.uniform_int(100000));
      auto counts = counts_of(build_architecture(kind, v));
      EXPECT_EQ(counts[0], 50 * v);
      for (std::size_t i = 1; i < counts.size(); ++i) EXPECT_EQ(counts[i], reference[i]);
    }
  }
}

TEST(Architecture, TinyVocabRejected) { EXPECT_THROW(build_cnn(1), ConfigError); }

TEST(Architecture, KindSpellings) {
  EXPECT_EQ(kind_name(ModelKind::hybrid), "HybridCnnBiLstm");
  EXPECT_EQ(parse_kind("BiLSTM"), ModelKind::bilstm);
  EXPECT_THROW(parse_kind("GRU"), VersionError);
}

TEST(Classifier, ParameterCountMatchesArchitecture) {
  for (auto kind : {ModelKind::cnn, ModelKind::bilstm, ModelKind::hybrid}) {
    const auto arch = build_architecture(kind, 57, 30);
    SequenceClassifier model(arch, names(57), 1);
    EXPECT_EQ(model.parameter_count(), count_parameters(arch).total) << kind_name(kind);
  }
}

TEST(Classifier, OutputSumsToOneAndIsDeterministic) {
  Rng rng(8);
  for (auto kind : {ModelKind::cnn, ModelKind::bilstm, ModelKind::hybrid}) {
    SequenceClassifier model(build_architecture(kind, 40, 25), names(40), 4);
    const auto ids = random_ids(25, 40, rng);
    const auto p = model.predict(ids);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-6);
    EXPECT_EQ(model.predict(ids), p);
    SequenceClassifier twin(build_architecture(kind, 40, 25), names(40), 4);
    EXPECT_EQ(twin.predict(ids), p);
  }
}

TEST(Classifier, BadInputsRejected) {
  SequenceClassifier model(build_cnn(10, 8), names(10), 0);
  EXPECT_THROW(model.predict(std::vector<TokenId>(8, 10)), OutOfRangeError);
  EXPECT_THROW(model.predict(std::vector<TokenId>(7, 1)), ShapeError);
  EXPECT_THROW(SequenceClassifier(build_cnn(10, 8), names(9), 0), ShapeError);
}

// Rebuilds the layer stack by hand from the model's own tensors and checks
// every intermediate shape against the symbolic description.
TEST(Classifier, RuntimeShapesMatchSymbolicShapes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Index vocab = 5 + static_cast<Index>(rng.uniform_int(60));
    const Index len = 6 + static_cast<Index>(rng.uniform_int(40));
    for (auto kind : {ModelKind::cnn, ModelKind::bilstm, ModelKind::hybrid}) {
      const auto arch = build_architecture(kind, vocab, len);
      SequenceClassifier model(arch, names(vocab), seed);
      const auto ids = random_ids(static_cast<std::size_t>(len), vocab, rng);
      ad::Graph<float> g(false);
      std::vector<Shape> runtime;
      auto x = ad::embedding_lookup<float>(ids, g.parameter(model.tensor("embedding")));
      runtime.push_back(x.shape());
      if (kind != ModelKind::bilstm) {
        x = ad::conv1d_valid(x, g.parameter(model.tensor("conv1d/kernel")), g.parameter(model.tensor("conv1d/bias")));
        runtime.push_back(x.shape());
        runtime.push_back(x.shape());
      }
      if (kind == ModelKind::hybrid) {
        x = ad::max_pool1d(x);
        runtime.push_back(x.shape());
      }
      if (kind != ModelKind::cnn) {
        auto bind = [&](const std::string& p) {
          return ad::LstmWeights<float>{g.parameter(model.tensor(p + "/input_kernel")),
                                        g.parameter(model.tensor(p + "/recurrent_kernel")),
                                        g.parameter(model.tensor(p + "/input_bias")),
                                        g.parameter(model.tensor(p + "/recurrent_bias"))};
        };
        x = ad::bilstm_forward(x, bind("bilstm/forward"), bind("bilstm/backward"));
        runtime.push_back(x.shape());
      }
      x = ad::global_max_pool1d(x);
      runtime.push_back(x.shape());
      if (kind != ModelKind::cnn) runtime.push_back(x.shape());
      x = ad::softmax(ad::dense(x, g.parameter(model.tensor("dense/kernel")), g.parameter(model.tensor("dense/bias"))));
      runtime.push_back(x.shape());
      EXPECT_EQ(runtime, shapes_of(arch)) << kind_name(kind) << " seed " << seed;
      const auto p = model.predict(ids);
      EXPECT_FLOAT_EQ(p[0], x.matrix()(0, 0));
    }
  }
}

TEST(Classifier, EmbeddingGradientOnlyOnLookedUpRows) {
  Rng rng(21);
  for (auto kind : {ModelKind::cnn, ModelKind::bilstm, ModelKind::hybrid}) {
    SequenceClassifier model(build_architecture(kind, 30, 12), names(30), 2);
    const auto ids = random_ids(12, 15, rng);
    const std::set<TokenId> used(ids.begin(), ids.end());
    model.zero_grad();
    ad::Graph<float> g;
    const auto probs = model.forward(g, ids, true, rng);
    g.backward(ad::categorical_crossentropy(probs, Tensor<float>::vector({0.0f, 1.0f})));
    const auto& grad = model.embedding().grad();
    bool any_used_nonzero = false;
    for (Index row = 0; row < grad.rows(); ++row) {
      const bool nonzero = grad.row(row).cwiseAbs().maxCoeff() > 0;
      if (!used.contains(static_cast<TokenId>(row))) {
        EXPECT_FALSE(nonzero) << "row " << row;
      } else {
        any_used_nonzero = any_used_nonzero || nonzero;
      }
    }
    EXPECT_TRUE(any_used_nonzero);
  }
}

TEST(Classifier, PretrainedEmbeddingCopy) {
  const Index vocab = 12;
  SequenceClassifier model(build_cnn(vocab, 10), names(vocab), 5);
  w2v::EmbeddingMatrix m;
  m.vocab = text::Vocabulary::from_tokens(names(vocab));
  m.table = Tensor<float>(Shape{vocab, 50});
  Rng rng(1);
  for (Index i = 50; i < m.table.size(); ++i) m.table[i] = static_cast<float>(rng.uniform(-1, 1));
  init_embedding_from_pretrained(model, m);
  EXPECT_EQ(model.embedding_source(), EmbeddingSource::word2vec);
  for (Index k = 0; k < vocab; ++k) {
    EXPECT_EQ(std::memcmp(model.embedding().data() + k * 50, m.row(static_cast<TokenId>(k)).data(), 50 * sizeof(float)), 0);
  }
  for (Index c = 0; c < 50; ++c) EXPECT_EQ(model.embedding().matrix()(0, c), 0.0f);
  EXPECT_TRUE(model.embedding().requires_grad());

  w2v::EmbeddingMatrix wrong;
  wrong.table = Tensor<float>(Shape{vocab + 1, 50});
  EXPECT_THROW(init_embedding_from_pretrained(model, wrong), ShapeError);
}
