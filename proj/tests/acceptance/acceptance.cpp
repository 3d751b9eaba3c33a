// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exits nonzero when any binding criterion fails.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hoaxdet/core/errors.hpp"
#include "hoaxdet/harness/checkpoint.hpp"
#include "hoaxdet/harness/encoding.hpp"
#include "hoaxdet/harness/io.hpp"
#include "hoaxdet/harness/metrics.hpp"
#include "hoaxdet/harness/training.hpp"
#include "hoaxdet/ingest/corpus.hpp"
#include "hoaxdet/ingest/scraper.hpp"
#include "hoaxdet/models/classifier.hpp"
#include "hoaxdet/transformer/attention.hpp"
#include "hoaxdet/transformer/model.hpp"
#include "hoaxdet/transformer/pretraining.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace {

using namespace hoaxdet;
using ad::Graph;
using ad::Var;
using hoaxdet::testing::check_gradients;
using hoaxdet::testing::Grid;
using hoaxdet::testing::random_tensor;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

const fs::path kData = HOAXDET_DATA_DIR;
const fs::path kFixtures = HOAXDET_FIXTURE_ROOT;
constexpr Index kTableVocab = 43156;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool informational = false;
  bool skipped = false;
};

// Collects failed sub-checks so one line can say what went wrong.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  template <typename A, typename B>
  void equal(const A& got, const B& want, const std::string& what) {
    if (!(got == want)) {
      std::ostringstream s;
      s << what << " (got " << got << ", want " << want << ")";
      failures_.push_back(s.str());
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s << what << " (got " << got << ", want " << want << " +- " << tol << ")";
      failures_.push_back(s.str());
    }
  }
  Outcome outcome(std::string detail) const {
    if (failures_.empty()) return {true, std::move(detail)};
    std::string joined;
    for (const auto& f : failures_) joined += (joined.empty() ? "" : "; ") + f;
    return {false, joined};
  }

 private:
  std::vector<std::string> failures_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string shape_list(const std::vector<Shape>& shapes) {
  std::string out;
  for (const auto& s : shapes) out += (out.empty() ? "" : " -> ") + shape_str(s);
  return out;
}

std::vector<std::int64_t> counts_of(const zoo::ModelArchitecture& arch) {
  std::vector<std::int64_t> out;
  for (const auto& [name, n] : zoo::count_parameters(arch).per_layer) out.push_back(n);
  return out;
}

std::vector<Shape> shapes_of(const zoo::ModelArchitecture& arch) {
  std::vector<Shape> out;
  for (const auto& layer : arch.layers()) out.push_back(layer.output);
  return out;
}

std::string join(const std::vector<std::int64_t>& v) {
  std::string out;
  for (const auto x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return "[" + out + "]";
}

// --- 1, 2: tables ---

Outcome parameter_counts() {
  const auto start = Clock::now();
  Checks c;
  const std::map<zoo::ModelKind, std::vector<std::int64_t>> want = {
      {zoo::ModelKind::cnn, {2157800, 3232, 0, 0, 66}},
      {zoo::ModelKind::bilstm, {2157800, 184320, 0, 0, 514}},
      {zoo::ModelKind::hybrid, {2157800, 3232, 0, 0, 165888, 0, 0, 514}},
  };
  for (const auto& [kind, counts] : want) {
    const auto got = counts_of(zoo::build_architecture(kind, kTableVocab, 1000));
    if (got != counts) c.expect(false, std::string(zoo::kind_name(kind)) + " counts " + join(got));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 1.0, "runtime " + fixed(elapsed) + " s");
  return c.outcome("three per-layer count lists exact, " + fixed(elapsed, 3) + " s");
}

Outcome shape_chains() {
  const auto start = Clock::now();
  Checks c;
  const std::map<zoo::ModelKind, std::vector<Shape>> want = {
      {zoo::ModelKind::cnn, {{1000, 50}, {999, 32}, {999, 32}, {32}, {2}}},
      {zoo::ModelKind::bilstm, {{1000, 50}, {1000, 256}, {256}, {256}, {2}}},
      {zoo::ModelKind::hybrid, {{1000, 50}, {999, 32}, {999, 32}, {499, 32}, {499, 256}, {256}, {256}, {2}}},
  };
  for (const auto& [kind, shapes] : want) {
    const auto got = shapes_of(zoo::build_architecture(kind, kTableVocab, 1000));
    if (got != shapes) c.expect(false, std::string(zoo::kind_name(kind)) + " chain " + shape_list(got));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 1.0, "runtime " + fixed(elapsed) + " s");
  return c.outcome("three output-size chains exact, " + fixed(elapsed, 3) + " s");
}

// --- 3: finite differences ---

ad::LstmWeights<double> lstm_weights(const std::vector<Var<double>>& v, std::size_t at) {
  return {v[at], v[at + 1], v[at + 2], v[at + 3]};
}

Outcome gradient_checks() {
  const auto start = Clock::now();
  Rng rng(2024);
  using Build = hoaxdet::testing::BuildFn;
  struct Case {
    std::string name;
    std::vector<Tensor<double>> inputs;
    Build build;
  };
  std::vector<Case> cases;
  cases.push_back({"matmul", {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::matmul(v[0], v[1]); }});
  cases.push_back({"conv1d",
                   {random_tensor({6, 3}, rng), random_tensor({2, 3, 4}, rng), random_tensor({4}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::conv1d_valid(v[0], v[1], v[2]); }});
  cases.push_back({"max_pool1d", {random_tensor({9, 4}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::max_pool1d(v[0]); }});
  cases.push_back({"global_max_pool1d", {random_tensor({8, 5}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::global_max_pool1d(v[0]); }});
  {
    std::vector<Tensor<double>> in{random_tensor({4, 2}, rng)};
    for (int dir = 0; dir < 2; ++dir) {
      in.push_back(random_tensor({2, 8}, rng));
      in.push_back(random_tensor({2, 8}, rng));
      in.push_back(random_tensor({8}, rng));
      in.push_back(random_tensor({8}, rng));
    }
    cases.push_back({"lstm", in, [](Graph<double>&, const std::vector<Var<double>>& v) {
                       return ad::bilstm_forward(v[0], lstm_weights(v, 1), lstm_weights(v, 5));
                     }});
  }
  cases.push_back({"dense", {random_tensor({6}, rng), random_tensor({6, 2}, rng), random_tensor({2}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::dense(v[0], v[1], v[2]); }});
  cases.push_back({"embedding", {random_tensor({5, 3}, rng)}, [](Graph<double>&, const std::vector<Var<double>>& v) {
                     static const std::vector<ad::TokenId> ids{4, 0, 4, 2};
                     return ad::embedding_lookup<double>(ids, v[0]);
                   }});
  cases.push_back({"softmax", {random_tensor({3, 5}, rng, -2, 2)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::softmax(v[0]); }});
  cases.push_back({"cross_entropy", {Tensor<double>::matrix({{0.2, 0.8}, {0.6, 0.4}})},
                   [](Graph<double>&, const std::vector<Var<double>>& v) {
                     return ad::categorical_crossentropy(v[0], Tensor<double>::matrix({{0, 1}, {1, 0}}));
                   }});
  cases.push_back({"softmax_cross_entropy", {random_tensor({2}, rng, -3, 3)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) {
                     return ad::categorical_crossentropy(ad::softmax(v[0]), Tensor<double>::vector({0, 1}));
                   }});
  cases.push_back({"attention", {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng), random_tensor({5, 2}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) {
                     return tfm::scaled_dot_product_attention(v[0], v[1], v[2], {false, true, false, false, true}).output;
                   }});
  {
    std::vector<Tensor<double>> in{random_tensor({3, 4}, rng)};
    for (int i = 0; i < 4; ++i) {
      in.push_back(random_tensor({4, 4}, rng, -0.5, 0.5));
      in.push_back(random_tensor({4}, rng, -0.5, 0.5));
    }
    cases.push_back({"multi_head_attention", in, [](Graph<double>&, const std::vector<Var<double>>& v) {
                       return tfm::multi_head_attention(
                           v[0], 2, tfm::AttentionWeights<double>{v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]},
                           {false, false, true});
                     }});
  }
  cases.push_back({"layer_norm", {random_tensor({3, 5}, rng, -2, 2), random_tensor({5}, rng), random_tensor({5}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::layer_norm(v[0], v[1], v[2]); }});
  cases.push_back({"feed_forward",
                   {random_tensor({3, 4}, rng), random_tensor({4, 6}, rng, -0.5, 0.5), random_tensor({6}, rng),
                    random_tensor({6, 4}, rng, -0.5, 0.5), random_tensor({4}, rng)},
                   [](Graph<double>&, const std::vector<Var<double>>& v) {
                     return tfm::feed_forward(v[0], tfm::FeedForwardWeights<double>{v[1], v[2], v[3], v[4]});
                   }});

  Checks c;
  double worst = 0;
  for (auto& test : cases) {
    for (const auto& t : test.inputs) c.expect(t.size() <= 64, test.name + " input larger than 64 elements");
    const auto r = check_gradients(test.inputs, test.build);
    worst = std::max(worst, r.max_relative_error);
    c.expect(r.max_relative_error < 1e-4, test.name + " relative error " + std::to_string(r.max_relative_error));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 60.0, "runtime " + fixed(elapsed) + " s");
  return c.outcome(std::to_string(cases.size()) + " primitives, worst relative error " + std::to_string(worst) + ", " +
                   fixed(elapsed, 2) + " s");
}

// --- 4: attention oracle ---

Grid to_grid(const RowMatrix<double>& m) {
  Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index col = 0; col < m.cols(); ++col) g[r][col] = m(r, col);
  return g;
}

Outcome attention_oracle() {
  Rng rng(4);
  Checks c;
  double worst_value = 0, worst_row = 0;
  for (int instance = 0; instance < 50; ++instance) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(8));
    const Index d = 1 + static_cast<Index>(rng.uniform_int(8));
    const Index dv = 1 + static_cast<Index>(rng.uniform_int(8));
    auto q = random_tensor({n, d}, rng, -2, 2), k = random_tensor({n, d}, rng, -2, 2), v = random_tensor({n, dv}, rng);
    std::vector<bool> mask(static_cast<std::size_t>(n));
    for (auto&& m : mask) m = rng.bernoulli(0.3);
    mask[rng.uniform_int(static_cast<std::uint64_t>(n))] = false;

    Graph<double> g(false);
    const auto got = tfm::scaled_dot_product_attention(g.constant(q), g.constant(k), g.constant(v), mask);
    Grid weights;
    const auto want = hoaxdet::testing::naive_attention(to_grid(q.matrix()), to_grid(k.matrix()), to_grid(v.matrix()),
                                                        mask, &weights);
    for (Index i = 0; i < n; ++i) {
      double row = 0;
      for (Index j = 0; j < n; ++j) {
        const double w = got.weights.matrix()(i, j);
        row += w;
        worst_value = std::max(worst_value, std::abs(w - weights[i][j]));
        if (mask[j]) c.expect(w < 1e-12, "masked key received weight");
      }
      worst_row = std::max(worst_row, std::abs(row - 1.0));
      for (Index col = 0; col < dv; ++col) {
        worst_value = std::max(worst_value, std::abs(got.output.matrix()(i, col) - want[i][col]));
      }
    }
  }
  c.expect(worst_value <= 1e-6, "max deviation " + std::to_string(worst_value));
  c.expect(worst_row <= 1e-6, "row-sum deviation " + std::to_string(worst_row));
  std::ostringstream s;
  s << "50 instances, max deviation " << worst_value << ", max row-sum deviation " << worst_row;
  return c.outcome(s.str());
}

// --- 5: split ---

Outcome split_reproduction() {
  Checks c;
  const auto a = ingest::train_test_split(2216, 7);
  const auto b = ingest::train_test_split(2216, 7);
  const auto other = ingest::train_test_split(2216, 8);
  c.equal(a.train.size(), 1772u, "train size");
  c.equal(a.test.size(), 444u, "test size");
  c.expect(a.train == b.train && a.test == b.test, "same seed gives a different split");
  c.expect(a.train != other.train, "different seeds give the same split");
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(2216);
  std::iota(expected.begin(), expected.end(), 0);
  c.expect(all == expected, "train and test do not partition 0..2215");
  return c.outcome("2216 -> 1772 train / 444 test, seeded and disjoint");
}

// --- 6: corpus counts ---

Outcome corpus_counts() {
  Checks c;
  const auto sources = kData / "sources";
  auto import = [&](const std::string& name) {
    return ingest::import_csv_dataset(sources / (name + ".csv"), *parse_source(name),
                                      ingest::ColumnMapping::load(sources / (name + ".mapping.json")));
  };
  const auto mendeley = import("mendeley");
  const auto github = import("github");
  const auto scraped_file = import("turnbackhoax");
  const auto m = ingest::CorpusManifest::describe(mendeley).totals;
  const auto g = ingest::CorpusManifest::describe(github).totals;
  const auto t = ingest::CorpusManifest::describe(scraped_file).totals;
  c.equal(m.total(), 600, "Mendeley total");
  c.equal(m.valid, 372, "Mendeley valid");
  c.equal(m.fake, 228, "Mendeley fake");
  c.equal(g.total(), 500, "GitHub total");
  c.equal(g.valid, 250, "GitHub valid");
  c.equal(g.fake, 250, "GitHub fake");
  c.equal(t.total(), 1116, "scraped-source total");
  c.equal(t.valid, 433, "scraped-source valid");
  c.equal(t.fake, 683, "scraped-source fake");

  ingest::SourceConfig config;
  config.fixture_dir = kFixtures;
  config.max_pages = 5;
  struct NoNetwork final : ingest::Fetcher {
    ingest::FetchResponse get(const std::string&, const std::string&) override {
      throw ForbiddenOperationError("network used in fixture mode");
    }
  } network;
  std::vector<ingest::DatasetRecord> fixtures;
  for (const auto& [category, label] : config.categories) {
    for (auto& r : ingest::scrape_category(config, category, network, [](std::chrono::milliseconds) {}).records) {
      c.expect(r.label == (category == "Benar" ? Label::valid : Label::fake), "fixture " + category + " mapped wrongly");
      fixtures.push_back(std::move(r));
    }
  }
  c.expect(!fixtures.empty(), "no fixture records");

  const std::vector<std::vector<ingest::DatasetRecord>> streams{mendeley, github, scraped_file};
  const auto merged = ingest::merge_and_dedupe(streams).manifest;
  c.equal(merged.totals.total(), 2216, "merged total");
  c.equal(merged.totals.valid, 1055, "merged valid");
  c.equal(merged.totals.fake, 1161, "merged fake");
  ingest::LabelCounts sum;
  for (const auto& [name, counts] : merged.per_source) {
    sum.valid += counts.valid;
    sum.fake += counts.fake;
  }
  c.expect(sum == merged.totals, "per-source counts do not add up to the totals");
  c.equal(static_cast<std::int64_t>(merged.duplicates_dropped) + merged.totals.total(), 2216,
          "kept plus dropped records");

  const std::vector<std::vector<ingest::DatasetRecord>> with_fixtures{mendeley, github, fixtures};
  const auto small = ingest::merge_and_dedupe(with_fixtures).manifest;
  c.equal(small.totals.total() + static_cast<std::int64_t>(small.duplicates_dropped),
          static_cast<std::int64_t>(1100 + fixtures.size()), "fixture merge accounting");
  return c.outcome("600 = 372/228, 500 = 250/250, fixtures Benar->valid Hoax->fake, merged 2216 = 1055/1161");
}

// --- 7: learning on the synthetic corpus ---

struct SyntheticData {
  std::vector<ingest::DatasetRecord> records;
  ingest::SplitIndices split;
};

const SyntheticData& synthetic() {
  static const SyntheticData data = [] {
    SyntheticData d;
    d.records = ingest::read_corpus(kData / "synthetic" / "corpus.csv");
    d.split = ingest::train_test_split(d.records.size(), 0);
    return d;
  }();
  return data;
}

std::vector<text::TokenList> word_documents(const SyntheticData& d, std::span<const std::size_t> indices) {
  const auto stopwords = text::StopwordList::bundled();
  std::vector<text::TokenList> docs;
  for (const auto i : indices) docs.push_back(text::preprocess(article_text(d.records[i]), stopwords));
  return docs;
}

struct WordModelRun {
  double accuracy = 0;
  int epochs = 0;
  std::string checkpoint;
  std::string report;
};

WordModelRun train_word_model(zoo::ModelKind kind, std::size_t seq_len, const harness::TrainConfig& config,
                              std::span<const std::size_t> train_idx, std::span<const std::size_t> test_idx) {
  const auto& d = synthetic();
  const auto vocab = text::Vocabulary::build(word_documents(d, train_idx), 1);
  auto arch = zoo::build_architecture(kind, static_cast<Index>(vocab.size()), static_cast<Index>(seq_len));
  arch.dropout = config.dropout;
  zoo::SequenceClassifier model(arch, vocab.tokens(), config.seed);
  const auto encoder = harness::ArticleEncoder::for_model(model);
  const auto logs = harness::run_training(model, harness::encode_records(encoder, d.records, train_idx), config);
  const auto eval = harness::evaluate_model(model, harness::encode_records(encoder, d.records, test_idx));
  return {eval.report.accuracy, static_cast<int>(logs.size()), harness::serialize_checkpoint(model),
          eval.report.to_json().dump()};
}

harness::TrainConfig desk_config(int epochs, double lr, double dropout, std::uint64_t seed) {
  harness::TrainConfig config;
  config.epochs = epochs;
  config.learning_rate = lr;
  config.dropout = dropout;
  config.seed = seed;
  return config;
}

Outcome word_model_learning() {
  const auto start = Clock::now();
  const auto& d = synthetic();
  Checks c;
  c.equal(d.records.size(), 2000u, "synthetic corpus size");
  c.equal(d.split.train.size(), 1600u, "synthetic train size");
  const auto cnn = train_word_model(zoo::ModelKind::cnn, 1000, desk_config(5, 1e-3, 0.5, 0), d.split.train,
                                    d.split.test);
  const auto bilstm = train_word_model(zoo::ModelKind::bilstm, 64, desk_config(5, 1e-3, 0.5, 0), d.split.train,
                                       d.split.test);
  const double elapsed = seconds_since(start);
  c.expect(cnn.epochs <= 10 && bilstm.epochs <= 10, "more than 10 epochs");
  c.expect(cnn.accuracy >= 0.95, "CNN test accuracy " + fixed(cnn.accuracy));
  c.expect(bilstm.accuracy >= 0.95, "BiLSTM test accuracy " + fixed(bilstm.accuracy));
  c.expect(elapsed < 600.0, "runtime " + fixed(elapsed, 1) + " s");
  return c.outcome("CNN " + fixed(cnn.accuracy) + " and BiLSTM " + fixed(bilstm.accuracy) + " test accuracy after " +
                   std::to_string(cnn.epochs) + " epochs, " + fixed(elapsed, 1) + " s");
}

struct TransformerRun {
  double accuracy = 0;
  int pretrain_steps = 0;
  double first_loss = 0;
  double last_loss = 0;
  std::string checkpoint;
  std::string report;
};

TransformerRun train_transformer(int steps, const harness::TrainConfig& finetune, std::span<const std::size_t> train_idx,
                                 std::span<const std::size_t> test_idx) {
  const auto& d = synthetic();
  std::vector<text::TokenList> words;
  for (const auto i : train_idx) words.push_back(text::tokenize(text::normalize_text(article_text(d.records[i]))));
  const auto vocab = tfm::train_wordpiece_vocab(words, 2000);
  const auto config = tfm::TransformerConfig::desk(static_cast<Index>(vocab.size()));

  std::vector<tfm::SentenceList> documents;
  for (const auto i : train_idx) {
    auto doc = tfm::prepare_document(d.records[i].body, vocab);
    if (!doc.empty()) documents.push_back(std::move(doc));
  }
  tfm::PretrainingModel pretrained(config, vocab.pieces(), finetune.seed);
  AdamState<float> adam;
  adam.options.learning_rate = 1e-4;
  Rng rng(finetune.seed ^ 0x9a1e5ULL);
  TransformerRun run;
  for (int step = 1; step <= steps; ++step) {
    std::vector<tfm::PretrainExample> batch;
    for (const auto& p : tfm::build_nsp_pairs(documents, 16, rng)) {
      batch.push_back(tfm::make_pretrain_example(p, static_cast<std::size_t>(config.max_seq), tfm::kMaskRate, rng));
    }
    const auto r = tfm::pretrain_step(pretrained, batch, adam);
    if (step == 1) run.first_loss = r.loss;
    run.last_loss = r.loss;
    run.pretrain_steps = step;
  }

  auto encode = [&](std::span<const std::size_t> indices) {
    harness::LabeledSet set;
    for (const auto i : indices) {
      set.push_back({tfm::encode_for_classification(article_text(d.records[i]), vocab,
                                                    static_cast<std::size_t>(config.max_seq)),
                     d.records[i].label});
    }
    return set;
  };
  auto model = tfm::fine_tune(pretrained, vocab, encode(train_idx), finetune);
  const auto eval = harness::evaluate_model(*model, encode(test_idx));
  run.accuracy = eval.report.accuracy;
  run.checkpoint = harness::serialize_checkpoint(*model);
  run.report = eval.report.to_json().dump();
  return run;
}

Outcome transformer_learning() {
  const auto start = Clock::now();
  const auto& d = synthetic();
  const auto run = train_transformer(200, desk_config(3, 1e-3, 0.1, 0), d.split.train, d.split.test);
  const double elapsed = seconds_since(start);
  Checks c;
  c.expect(run.pretrain_steps >= 200, "only " + std::to_string(run.pretrain_steps) + " pretraining steps");
  c.expect(run.last_loss < run.first_loss, "pretraining loss did not fall");
  c.expect(run.accuracy >= 0.90, "test accuracy " + fixed(run.accuracy));
  c.expect(elapsed < 1200.0, "runtime " + fixed(elapsed, 1) + " s");
  return c.outcome("desk transformer " + fixed(run.accuracy) + " test accuracy after " +
                   std::to_string(run.pretrain_steps) + " pretraining steps (loss " + fixed(run.first_loss, 2) + " -> " +
                   fixed(run.last_loss, 2) + "), " + fixed(elapsed, 1) + " s");
}

// --- 8: pretraining statistics ---

Outcome pretraining_statistics() {
  Checks c;
  Rng rng(8);
  // Each row frames 998 content ids with specials and padding; 1003 rows
  // give just over 10^6 eligible positions.
  tfm::IdList ids{tfm::SpecialTokens::cls};
  for (int i = 0; i < 499; ++i) ids.push_back(5 + i % 50);
  ids.push_back(tfm::SpecialTokens::sep);
  for (int i = 0; i < 499; ++i) ids.push_back(7 + i % 40);
  ids.push_back(tfm::SpecialTokens::sep);
  ids.push_back(tfm::SpecialTokens::pad);
  ids.push_back(tfm::SpecialTokens::unk);
  std::size_t eligible = 0, masked = 0;
  for (const auto id : ids) eligible += tfm::SpecialTokens::is_special(id) ? 0 : 1;
  c.equal(eligible, 998u, "eligible positions per row");
  for (int row = 0; row < 1003; ++row) {
    const auto m = tfm::mask_for_mlm(ids, tfm::kMaskRate, rng);
    for (const auto pos : m.positions) c.expect(!tfm::SpecialTokens::is_special(ids[pos]), "special token masked");
    masked += m.positions.size();
  }
  const double mask_rate = static_cast<double>(masked) / static_cast<double>(eligible * 1003);
  c.near(mask_rate, 0.15, 0.01, "masked fraction");

  std::vector<tfm::SentenceList> docs(30);
  std::map<tfm::IdList, std::pair<std::size_t, std::size_t>> where;
  std::int32_t next = 5;
  for (std::size_t doc = 0; doc < docs.size(); ++doc) {
    for (std::size_t s = 0; s < 2 + doc % 5; ++s) {
      docs[doc].push_back({next, next + 1});
      where[docs[doc].back()] = {doc, s};
      next += 2;
    }
  }
  const auto pairs = tfm::build_nsp_pairs(docs, 100000, rng);
  std::size_t is_next = 0;
  for (const auto& p : pairs) {
    const auto a = where.at(p.first), b = where.at(p.second);
    if (p.is_next) {
      ++is_next;
      c.expect(a.first == b.first && b.second == a.second + 1, "is-next pair is not a true successor");
    } else {
      c.expect(a.first != b.first, "random pair drawn from the same document");
    }
  }
  const double next_rate = static_cast<double>(is_next) / static_cast<double>(pairs.size());
  c.equal(pairs.size(), 100000u, "pair count");
  c.near(next_rate, 0.5, 0.01, "is-next fraction");
  return c.outcome("masked " + fixed(mask_rate) + " of " + std::to_string(eligible * 1003) + " positions, is-next " +
                   fixed(next_rate) + " of 100000 pairs, specials never masked");
}

// --- 9: metrics ---

Outcome metric_oracle() {
  Checks c;
  const auto r = harness::compute_metrics({40, 10, 5, 45});
  c.near(r.accuracy, 0.85, 1e-4, "accuracy");
  c.near(r.precision, 0.80, 1e-4, "precision");
  c.near(r.recall, 0.8889, 1e-4, "recall");
  c.near(r.f1, 0.8421, 1e-4, "F1");
  const auto perfect = harness::compute_metrics({30, 0, 0, 20});
  for (const double v : {perfect.accuracy, perfect.precision, perfect.recall, perfect.f1, perfect.macro_precision,
                         perfect.macro_recall, perfect.macro_f1}) {
    c.near(v, 1.0, 1e-12, "perfect classifier metric");
  }
  const auto never_fake = harness::compute_metrics({0, 0, 10, 10});
  c.near(never_fake.precision, 0.0, 0.0, "0/0 precision");
  c.near(never_fake.f1, 0.0, 0.0, "0/0 F1");
  c.near(never_fake.accuracy, 0.5, 1e-12, "degenerate accuracy");
  bool threw = false;
  try {
    harness::compute_metrics({0, 0, 0, 0});
  } catch (const ContractError&) {
    threw = true;
  }
  c.expect(threw, "empty matrix accepted");
  return c.outcome("accuracy " + fixed(r.accuracy) + ", precision " + fixed(r.precision) + ", recall " +
                   fixed(r.recall) + ", F1 " + fixed(r.f1) + "; perfect and 0/0 cases hold");
}

// --- 10: full corpus (informational) ---

Outcome full_corpus_check() {
  const char* path = std::getenv("HOAXDET_FULL_CORPUS");
  if (!path || !*path) {
    Outcome o;
    o.informational = o.skipped = true;
    o.detail = "set HOAXDET_FULL_CORPUS to a merged corpus CSV to run the full-scale comparison";
    return o;
  }
  const auto records = ingest::read_corpus(path);
  const auto split = ingest::train_test_split(records.size(), 0);
  const auto stopwords = text::StopwordList::bundled();
  std::vector<text::TokenList> docs;
  for (const auto i : split.train) docs.push_back(text::preprocess(article_text(records[i]), stopwords));
  const auto vocab = text::Vocabulary::build(docs, 1);
  const harness::TrainConfig config;  // table defaults
  std::ostringstream detail;
  bool pass = true;
  for (const auto& [kind, target] : {std::pair{zoo::ModelKind::cnn, 0.74}, std::pair{zoo::ModelKind::bilstm, 0.85}}) {
    zoo::SequenceClassifier model(zoo::build_architecture(kind, static_cast<Index>(vocab.size())), vocab.tokens(),
                                  config.seed);
    const auto encoder = harness::ArticleEncoder::for_model(model);
    harness::run_training(model, harness::encode_records(encoder, records, split.train), config);
    const double acc =
        harness::evaluate_model(model, harness::encode_records(encoder, records, split.test)).report.accuracy;
    pass = pass && std::abs(acc - target) <= 0.10;
    detail << zoo::kind_name(kind) << ' ' << fixed(acc) << " (reference " << target << ") ";
  }
  Outcome o{pass, detail.str()};
  o.informational = true;
  return o;
}

// --- 11: determinism ---

Outcome determinism() {
  const auto& d = synthetic();
  const std::vector<std::size_t> train(d.split.train.begin(), d.split.train.begin() + 300);
  const std::vector<std::size_t> test(d.split.test.begin(), d.split.test.begin() + 100);
  Checks c;
  for (const auto& [kind, seq_len] : {std::pair{zoo::ModelKind::cnn, std::size_t{200}},
                                      std::pair{zoo::ModelKind::bilstm, std::size_t{24}},
                                      std::pair{zoo::ModelKind::hybrid, std::size_t{24}}}) {
    const auto config = desk_config(2, 1e-3, 0.5, 17);
    const auto a = train_word_model(kind, seq_len, config, train, test);
    const auto b = train_word_model(kind, seq_len, config, train, test);
    const std::string name(zoo::kind_name(kind));
    c.expect(a.checkpoint == b.checkpoint, name + " checkpoints differ");
    c.expect(a.report == b.report, name + " reports differ");
  }
  const auto config = desk_config(1, 1e-3, 0.1, 17);
  const auto a = train_transformer(5, config, train, test);
  const auto b = train_transformer(5, config, train, test);
  c.expect(a.checkpoint == b.checkpoint, "transformer checkpoints differ");
  c.expect(a.report == b.report, "transformer reports differ");
  return c.outcome("CNN, BiLSTM, hybrid and transformer reruns give identical checkpoint bytes and reports");
}

// --- 12: scraper fixtures ---

Outcome scraper_fixtures() {
  struct CountingFetcher final : ingest::Fetcher {
    std::size_t calls = 0;
    ingest::FetchResponse get(const std::string&, const std::string&) override {
      ++calls;
      return {503, "", "offline"};
    }
  } network;
  std::size_t sleeps = 0;
  const ingest::Sleeper sleeper = [&sleeps](std::chrono::milliseconds) { ++sleeps; };

  Checks c;
  const auto expected = harness::read_json(kFixtures / "expected.json");
  std::size_t matched = 0;
  for (const auto& e : expected.at("articles")) {
    const auto parsed = ingest::parse_article_html(harness::read_file(kFixtures / e.at("file").get<std::string>()), {});
    const bool same = parsed.headline == e.at("headline").get<std::string>() &&
                      parsed.body == e.at("body").get<std::string>() &&
                      parsed.category == e.at("category").get<std::string>();
    c.expect(same, "parse mismatch for " + e.at("file").get<std::string>());
    matched += same ? 1 : 0;
  }

  ingest::SourceConfig config;
  config.fixture_dir = kFixtures;
  config.max_pages = 5;
  std::size_t records = 0;
  for (const auto& [category, label] : config.categories) {
    const auto result = ingest::scrape_category(config, category, network, sleeper);
    std::vector<const nlohmann::json*> wanted;
    for (const auto& e : expected.at("articles")) {
      if (e.at("category_dir") == category) wanted.push_back(&e);
    }
    c.equal(result.records.size(), wanted.size(), category + " record count");
    for (std::size_t i = 0; i < std::min(wanted.size(), result.records.size()); ++i) {
      const auto& r = result.records[i];
      c.expect(r.headline == wanted[i]->at("headline").get<std::string>() &&
                   r.body == wanted[i]->at("body").get<std::string>() &&
                   to_string(r.label) == wanted[i]->at("label").get<std::string>(),
               category + " record " + std::to_string(i) + " differs");
    }
    records += result.records.size();
    std::size_t expected_skips = 0;
    for (const auto& s : expected.at("skips")) {
      if (s.at("category_dir") != category) continue;
      ++expected_skips;
      const bool found = std::any_of(result.skips.begin(), result.skips.end(), [&](const ingest::SkipReport& r) {
        return ingest::url_slug(r.url) == s.at("slug").get<std::string>() &&
               r.reason.find(s.at("missing").get<std::string>()) != std::string::npos;
      });
      c.expect(found, "missing skip for " + s.at("slug").get<std::string>());
    }
    c.equal(result.skips.size(), expected_skips, category + " skip count");
  }
  c.equal(network.calls, 0u, "network calls");
  c.equal(sleeps, 0u, "sleeps");
  return c.outcome(std::to_string(matched) + " fixture pages and " + std::to_string(records) +
                   " scraped records match, 0 network calls");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"parameter counts", parameter_counts},
      {"shape chains", shape_chains},
      {"gradient checks", gradient_checks},
      {"attention oracle", attention_oracle},
      {"split reproduction", split_reproduction},
      {"corpus counts", corpus_counts},
      {"desk-scale learning (CNN, BiLSTM)", word_model_learning},
      {"desk-scale learning (transformer)", transformer_learning},
      {"masking and next-sentence statistics", pretraining_statistics},
      {"metric oracle", metric_oracle},
      {"full-corpus comparison", full_corpus_check},
      {"determinism", determinism},
      {"scraper fixtures", scraper_fixtures},
  };
  // Criterion 7 has two parts; both report under the same number.
  const std::vector<int> numbers = {1, 2, 3, 4, 5, 6, 7, 7, 8, 9, 10, 11, 12};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* status = o.skipped ? "SKIP" : o.pass ? "PASS" : o.informational ? "INFO" : "FAIL";
    if (!o.pass && !o.informational) ++failures;
    std::cout << status << ' ' << numbers[i] << ' ' << criteria[i].first << ": " << o.detail << " ["
              << fixed(seconds_since(start), 2) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all binding criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
