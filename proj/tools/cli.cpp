#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hoaxdet/embed/word2vec.hpp"
#include "hoaxdet/harness/checkpoint.hpp"
#include "hoaxdet/harness/encoding.hpp"
#include "hoaxdet/harness/io.hpp"
#include "hoaxdet/harness/metrics.hpp"
#include "hoaxdet/harness/training.hpp"
#include "hoaxdet/ingest/corpus.hpp"
#include "hoaxdet/ingest/scraper.hpp"
#include "hoaxdet/transformer/model.hpp"

namespace hoaxdet::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kFixtureEnv = "HOAXDET_FIXTURE_DIR";

// Config files mirror flag names: top-level keys are global flags, objects
// named after a verb hold that verb's flags.
class JsonConfig final : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        j[name] = opt->as<std::vector<std::string>>();
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void flatten(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else if (value.is_boolean()) {
        item.inputs.push_back(value.get<bool>() ? "true" : "false");
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const CorruptionError*>(&e)) return "corruption";
  if (dynamic_cast<const VersionError*>(&e)) return "version";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ResourceError*>(&e)) return "resource";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const ContractError*>(&e)) return "contract";
  if (dynamic_cast<const LengthError*>(&e)) return "length";
  if (dynamic_cast<const OutOfRangeError*>(&e)) return "out_of_range";
  if (dynamic_cast<const ForbiddenOperationError*>(&e)) return "forbidden";
  if (dynamic_cast<const json::exception*>(&e)) return "json";
  return "runtime";
}

struct Globals {
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct ScrapeOptions {
  std::string out;
  std::string source_config;
  std::string fixtures;
  std::vector<std::string> categories;
  int max_pages = 0;
  std::string skips;
};

struct ImportOptions {
  std::string source;
  std::string csv;
  std::string mapping;
  std::string out;
};

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string out;
  std::string manifest;
};

struct SplitOptions {
  std::string data;
  double ratio = 0.8;
  std::string out;
};

struct EmbedOptions {
  std::string data;
  std::string split;
  std::string out;
  std::string vocab_out;
  std::size_t dim = 50;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  std::size_t min_count = 1;
  double lr = 0.025;
};

struct TrainOptions {
  std::string arch;
  std::string data;
  std::string split;
  std::string out;
  std::string embeddings;
  std::string vocab;
  std::size_t seq_len = text::kSequenceLength;
  std::size_t min_count = 1;
  int epochs = 50;
  std::size_t batch_size = 16;
  double lr = 2e-5;
  double dropout = 0.5;
  int patience = 0;
  std::string log;
  std::string subword_vocab;
  std::size_t subword_size = 2000;
  std::string preset = "desk";
};

struct PretrainOptions {
  std::string data;
  std::string split;
  std::string out;
  std::string vocab_out;
  std::string subword_vocab;
  std::size_t subword_size = 2000;
  std::string preset = "desk";
  int steps = 200;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  std::string log;
};

struct FinetuneOptions {
  std::string pretrained;
  std::string data;
  std::string split;
  std::string out;
  std::string subword_vocab;
  int epochs = 50;
  std::size_t batch_size = 16;
  double lr = 2e-5;
  double dropout = 0.5;
  int patience = 0;
  std::string log;
};

struct EvalOptions {
  std::string model;
  std::string data;
  std::string split;
  std::string out;
  std::string manifest;
  std::string id;
};

struct CompareOptions {
  std::vector<std::string> reports;
  std::string json_out;
};

struct PredictOptions {
  std::string model;
  std::string text;
  std::string input;
};

std::vector<ingest::DatasetRecord> load_corpus(const std::string& path) { return ingest::read_corpus(path); }

std::optional<ingest::SplitIndices> load_split(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return ingest::SplitIndices::from_json(harness::read_json(path));
}

std::vector<std::size_t> indices_or_all(const std::optional<ingest::SplitIndices>& split, bool train,
                                        std::size_t n) {
  if (split) return train ? split->train : split->test;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return all;
}

std::vector<text::TokenList> word_documents(const std::vector<ingest::DatasetRecord>& records,
                                            const std::vector<std::size_t>& indices) {
  const auto stopwords = text::StopwordList::bundled();
  std::vector<text::TokenList> docs;
  docs.reserve(indices.size());
  for (const auto i : indices) {
    if (i >= records.size()) throw OutOfRangeError("split index " + std::to_string(i) + " outside the corpus");
    docs.push_back(text::preprocess(article_text(records[i]), stopwords));
  }
  return docs;
}

tfm::TransformerConfig preset_config(const std::string& preset, Index vocab_size) {
  if (preset == "desk") return tfm::TransformerConfig::desk(vocab_size);
  if (preset == "base") return tfm::TransformerConfig::base(vocab_size);
  throw ConfigError("unknown transformer preset '" + preset + "'");
}

tfm::WordPieceVocab subword_vocabulary(const std::string& path, std::size_t target,
                                       const std::vector<ingest::DatasetRecord>& records,
                                       const std::vector<std::size_t>& indices) {
  if (!path.empty()) return tfm::WordPieceVocab::load(path);
  std::vector<text::TokenList> words;
  for (const auto i : indices) words.push_back(text::tokenize(text::normalize_text(article_text(records[i]))));
  return tfm::train_wordpiece_vocab(words, target);
}

harness::TrainConfig train_config(int epochs, std::size_t batch, double lr, double dropout, int patience,
                                  std::uint64_t seed) {
  harness::TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.learning_rate = lr;
  c.dropout = dropout;
  c.seed = seed;
  if (patience > 0) c.patience = patience;
  c.validate();
  return c;
}

harness::EpochCallback epoch_printer(std::ostream& err, json& log) {
  return [&err, &log](const harness::EpochLog& e) {
    err << "epoch " << e.epoch << " loss " << e.mean_loss << " accuracy " << e.train_accuracy << '\n';
    log.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"train_accuracy", e.train_accuracy},
                   {"batches", e.batches}});
    return true;
  };
}

void write_log(const std::string& path, const json& log) {
  if (!path.empty()) harness::write_json_atomic(path, log);
}

int do_scrape(const ScrapeOptions& o, const Globals&, std::ostream& out, std::ostream& err) {
  ingest::SourceConfig config;
  if (!o.source_config.empty()) config = ingest::SourceConfig::from_json(harness::read_json(o.source_config));
  if (!o.fixtures.empty()) {
    config.fixture_dir = o.fixtures;
  } else if (const char* env = std::getenv(kFixtureEnv); env && *env) {
    config.fixture_dir = env;
  }
  if (o.max_pages > 0) config.max_pages = o.max_pages;
  config.validate();

  std::vector<std::string> categories = o.categories;
  if (categories.empty()) {
    for (const auto& [name, label] : config.categories) categories.push_back(name);
  }
  ingest::HttpFetcher fetcher;
  std::vector<ingest::DatasetRecord> records;
  json skips = json::array();
  for (const auto& category : categories) {
    auto result = ingest::scrape_category(config, category, fetcher, ingest::real_sleeper());
    for (auto& r : result.records) records.push_back(std::move(r));
    for (const auto& s : result.skips) {
      skips.push_back({{"category", category}, {"url", s.url}, {"reason", s.reason}, {"attempts", s.attempts}});
      err << "skipped " << s.url << ": " << s.reason << '\n';
    }
  }
  ingest::write_corpus(o.out, records);
  if (!o.skips.empty()) harness::write_json_atomic(o.skips, skips);
  out << json{{"records", records.size()}, {"skipped", skips.size()}}.dump() << '\n';
  return kExitOk;
}

int do_import(const ImportOptions& o, const Globals&, std::ostream& out, std::ostream&) {
  const auto source = parse_source(o.source);
  if (!source) throw ConfigError("unknown source '" + o.source + "'");
  const auto mapping = o.mapping.empty() ? ingest::ColumnMapping{} : ingest::ColumnMapping::load(o.mapping);
  const auto records = ingest::import_csv_dataset(o.csv, *source, mapping);
  ingest::write_corpus(o.out, records);
  out << ingest::CorpusManifest::describe(records).to_json(false).dump() << '\n';
  return kExitOk;
}

int do_merge(const MergeOptions& o, const Globals&, std::ostream& out, std::ostream&) {
  std::vector<std::vector<ingest::DatasetRecord>> streams;
  for (const auto& path : o.inputs) streams.push_back(ingest::read_corpus(path));
  const auto merged = ingest::merge_and_dedupe(streams);
  ingest::write_corpus(o.out, merged.records);
  const std::string manifest_path = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;
  harness::write_json_atomic(manifest_path, merged.manifest.to_json());
  out << merged.manifest.to_json(false).dump() << '\n';
  return kExitOk;
}

int do_split(const SplitOptions& o, const Globals& g, std::ostream& out, std::ostream&) {
  const auto records = load_corpus(o.data);
  const auto split = ingest::train_test_split(records.size(), g.seed, o.ratio);
  harness::write_json_atomic(o.out, split.to_json());
  out << json{{"train", split.train.size()}, {"test", split.test.size()}, {"seed", g.seed}}.dump() << '\n';
  return kExitOk;
}

int do_embed(const EmbedOptions& o, const Globals& g, std::ostream& out, std::ostream&) {
  const auto records = load_corpus(o.data);
  const auto split = load_split(o.split);
  const auto docs = word_documents(records, indices_or_all(split, true, records.size()));
  const auto vocab = text::Vocabulary::build(docs, o.min_count);
  w2v::SkipGramConfig config;
  config.dim = o.dim;
  config.window = o.window;
  config.negatives = o.negatives;
  config.epochs = o.epochs;
  config.learning_rate = o.lr;
  config.seed = g.seed;
  const auto matrix = w2v::train_skipgram(docs, vocab, config);
  harness::write_file_atomic(o.out, w2v::serialize_embeddings(matrix));
  harness::write_file_atomic(o.vocab_out, vocab.serialize());
  out << json{{"vocab_size", vocab.size()}, {"dim", o.dim}}.dump() << '\n';
  return kExitOk;
}

int do_train(const TrainOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto kind = zoo::parse_kind(o.arch == "cnn"         ? "CNN"
                                    : o.arch == "bilstm"    ? "BiLSTM"
                                    : o.arch == "hybrid"    ? "HybridCnnBiLstm"
                                    : o.arch == "transformer" ? "MiniTransformer"
                                                              : o.arch);
  const auto config = train_config(o.epochs, o.batch_size, o.lr, o.dropout, o.patience, g.seed);
  const auto records = load_corpus(o.data);
  const auto split = load_split(o.split);
  const auto train_idx = indices_or_all(split, true, records.size());

  std::unique_ptr<zoo::Classifier> model;
  if (kind == zoo::ModelKind::transformer) {
    const auto vocab = subword_vocabulary(o.subword_vocab, o.subword_size, records, train_idx);
    auto encoder = tfm::TransformerEncoder(preset_config(o.preset, static_cast<Index>(vocab.size())), g.seed);
    model = std::make_unique<tfm::TransformerClassifier>(std::move(encoder), vocab.pieces(), o.dropout, g.seed);
  } else {
    std::optional<w2v::EmbeddingMatrix> embeddings;
    text::Vocabulary vocab;
    if (!o.embeddings.empty()) {
      embeddings = w2v::load_embeddings(o.embeddings);
      vocab = embeddings->vocab;
    } else if (!o.vocab.empty()) {
      vocab = text::Vocabulary::load(o.vocab);
    } else {
      vocab = text::Vocabulary::build(word_documents(records, train_idx), o.min_count);
    }
    auto arch = zoo::build_architecture(kind, static_cast<Index>(vocab.size()), static_cast<Index>(o.seq_len));
    arch.dropout = o.dropout;
    if (embeddings) arch.embed_dim = embeddings->table.dim(1);
    auto seq = std::make_unique<zoo::SequenceClassifier>(arch, vocab.tokens(), g.seed);
    if (embeddings) zoo::init_embedding_from_pretrained(*seq, *embeddings);
    model = std::move(seq);
  }

  const auto encoder = harness::ArticleEncoder::for_model(*model);
  const auto train = harness::encode_records(encoder, records, train_idx);
  json log = json::array();
  harness::run_training(*model, train, config, epoch_printer(err, log));
  harness::save_checkpoint(*model, o.out);
  write_log(o.log, log);
  out << json{{"model", zoo::kind_name(model->kind())}, {"parameters", model->parameter_count()},
              {"epochs", log.size()}}
             .dump()
      << '\n';
  return kExitOk;
}

int do_pretrain(const PretrainOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
  if (o.steps < 1) throw ConfigError("steps must be at least 1");
  if (o.batch_size < 1) throw ConfigError("batch size must be at least 1");
  const auto records = load_corpus(o.data);
  const auto split = load_split(o.split);
  const auto train_idx = indices_or_all(split, true, records.size());
  const auto vocab = subword_vocabulary(o.subword_vocab, o.subword_size, records, train_idx);
  const auto config = preset_config(o.preset, static_cast<Index>(vocab.size()));

  std::vector<tfm::SentenceList> documents;
  for (const auto i : train_idx) {
    auto doc = tfm::prepare_document(records[i].body, vocab);
    if (!doc.empty()) documents.push_back(std::move(doc));
  }

  tfm::PretrainingModel model(config, vocab.pieces(), g.seed);
  AdamState<float> adam;
  adam.options.learning_rate = o.lr;
  Rng rng(g.seed ^ 0x9a1e5ULL);
  json log = json::array();
  for (int step = 1; step <= o.steps; ++step) {
    const auto pairs = tfm::build_nsp_pairs(documents, o.batch_size, rng);
    std::vector<tfm::PretrainExample> batch;
    for (const auto& p : pairs) {
      batch.push_back(tfm::make_pretrain_example(p, static_cast<std::size_t>(config.max_seq), tfm::kMaskRate, rng));
    }
    const auto r = tfm::pretrain_step(model, batch, adam);
    if (r.skipped_mlm > 0) err << "warning: step " << step << " skipped the MLM term for " << r.skipped_mlm << " examples\n";
    log.push_back({{"step", step}, {"loss", r.loss}, {"mlm", r.mlm_loss}, {"nsp", r.nsp_loss}});
    if (step % 10 == 0 || step == o.steps) {
      err << "step " << step << " loss " << r.loss << " mlm " << r.mlm_loss << " nsp " << r.nsp_loss << '\n';
    }
  }
  harness::save_pretraining_checkpoint(model, o.out);
  harness::write_file_atomic(o.vocab_out, vocab.serialize());
  write_log(o.log, log);
  out << json{{"steps", o.steps}, {"vocab_size", vocab.size()}, {"documents", documents.size()}}.dump() << '\n';
  return kExitOk;
}

int do_finetune(const FinetuneOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto config = train_config(o.epochs, o.batch_size, o.lr, o.dropout, o.patience, g.seed);
  const auto pretrained = harness::load_pretraining_checkpoint(o.pretrained);
  const auto vocab = o.subword_vocab.empty() ? tfm::WordPieceVocab::from_pieces(pretrained->vocabulary())
                                             : tfm::WordPieceVocab::load(o.subword_vocab);
  const auto records = load_corpus(o.data);
  const auto split = load_split(o.split);
  const auto train_idx = indices_or_all(split, true, records.size());

  std::vector<harness::LabeledExample> train;
  const auto length = static_cast<std::size_t>(pretrained->encoder().config().max_seq);
  for (const auto i : train_idx) {
    if (i >= records.size()) throw OutOfRangeError("split index " + std::to_string(i) + " outside the corpus");
    train.push_back({tfm::encode_for_classification(article_text(records[i]), vocab, length), records[i].label});
  }
  json log = json::array();
  auto model = tfm::fine_tune(*pretrained, vocab, train, config, epoch_printer(err, log));
  harness::save_checkpoint(*model, o.out);
  write_log(o.log, log);
  out << json{{"model", zoo::kind_name(model->kind())}, {"epochs", log.size()}}.dump() << '\n';
  return kExitOk;
}

int do_eval(const EvalOptions& o, const Globals&, std::ostream& out, std::ostream&) {
  auto model = harness::load_checkpoint(o.model);
  const auto records = load_corpus(o.data);
  const auto split = load_split(o.split);
  const auto test_idx = indices_or_all(split, false, records.size());
  const auto encoder = harness::ArticleEncoder::for_model(*model);
  const auto test = harness::encode_records(encoder, records, test_idx);
  auto evaluation = harness::evaluate_model(*model, test, o.id);
  if (!o.manifest.empty()) {
    evaluation.report.manifest_hash =
        ingest::CorpusManifest::from_json(harness::read_json(o.manifest)).content_hash();
  }
  const auto report = evaluation.report.to_json();
  if (!o.out.empty()) harness::write_json_atomic(o.out, report);
  out << report.dump(2) << '\n';
  return kExitOk;
}

int do_compare(const CompareOptions& o, const Globals&, std::ostream& out, std::ostream&) {
  std::vector<harness::MetricsReport> reports;
  for (const auto& path : o.reports) {
    const auto j = harness::read_json(path);
    if (j.is_array()) {
      for (const auto& r : j) reports.push_back(harness::MetricsReport::from_json(r));
    } else {
      reports.push_back(harness::MetricsReport::from_json(j));
    }
  }
  const auto table = harness::compare_models(reports);
  if (!o.json_out.empty()) harness::write_json_atomic(o.json_out, table.json);
  out << table.text;
  return kExitOk;
}

int do_predict(const PredictOptions& o, const Globals&, std::ostream& out, std::ostream&) {
  auto model = harness::load_checkpoint(o.model);
  const std::string raw = o.input.empty() ? o.text : harness::read_file(o.input);
  const auto encoder = harness::ArticleEncoder::for_model(*model);
  const auto p = model->predict(encoder.encode(raw));
  out << json{{"label", to_string(p[1] > p[0] ? Label::fake : Label::valid)},
              {"probabilities", {{"valid", p[0]}, {"fake", p[1]}}}}
             .dump()
      << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Indonesian fake-news corpus building, training and evaluation", "hoaxdet"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with flag values (flags on the command line win)");
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Print extra progress details");

  ScrapeOptions scrape;
  auto* s = app.add_subcommand("scrape", "Crawl the fact-check site, or its saved fixture pages");
  s->add_option("--out", scrape.out, "Corpus CSV to write")->required();
  s->add_option("--source-config", scrape.source_config, "JSON source configuration");
  s->add_option("--fixtures", scrape.fixtures, std::string("Fixture directory (also ") + kFixtureEnv + ")");
  s->add_option("--category", scrape.categories, "Category to crawl (repeatable; default all mapped)");
  s->add_option("--max-pages", scrape.max_pages, "Index pages per category");
  s->add_option("--skips", scrape.skips, "JSON file for the skip report");

  ImportOptions import;
  auto* im = app.add_subcommand("import", "Convert an external CSV dataset into the corpus format");
  im->add_option("--source", import.source, "mendeley, github or turnbackhoax")
      ->required()
      ->check(CLI::IsMember({"mendeley", "github", "turnbackhoax"}));
  im->add_option("--csv", import.csv, "Input CSV")->required()->check(CLI::ExistingFile);
  im->add_option("--mapping", import.mapping, "JSON column and label mapping");
  im->add_option("--out", import.out, "Corpus CSV to write")->required();

  MergeOptions merge;
  auto* m = app.add_subcommand("merge", "Concatenate corpora and drop exact duplicates");
  m->add_option("inputs", merge.inputs, "Corpus CSV files")->required()->check(CLI::ExistingFile);
  m->add_option("--out", merge.out, "Merged corpus CSV")->required();
  m->add_option("--manifest", merge.manifest, "Manifest JSON (default <out>.manifest.json)");

  SplitOptions split;
  auto* sp = app.add_subcommand("split", "Seeded train/test split");
  sp->add_option("--data", split.data, "Corpus CSV")->required()->check(CLI::ExistingFile);
  sp->add_option("--ratio", split.ratio, "Training fraction")->capture_default_str();
  sp->add_option("--out", split.out, "Split JSON")->required();

  EmbedOptions embed;
  auto* e = app.add_subcommand("embed", "Train skip-gram embeddings on the training documents");
  e->add_option("--data", embed.data, "Corpus CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--split", embed.split, "Split JSON (training part is used)");
  e->add_option("--out", embed.out, "Embedding text file")->required();
  e->add_option("--vocab-out", embed.vocab_out, "Vocabulary file")->required();
  e->add_option("--dim", embed.dim, "Vector size")->capture_default_str();
  e->add_option("--window", embed.window, "Context window")->capture_default_str();
  e->add_option("--negatives", embed.negatives, "Negative samples")->capture_default_str();
  e->add_option("--epochs", embed.epochs, "Passes over the corpus")->capture_default_str();
  e->add_option("--min-count", embed.min_count, "Minimum token frequency")->capture_default_str();
  e->add_option("--lr", embed.lr, "Initial learning rate")->capture_default_str();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train a classifier");
  t->add_option("--arch", train.arch, "cnn, bilstm, hybrid or transformer")
      ->required()
      ->check(CLI::IsMember({"cnn", "bilstm", "hybrid", "transformer"}));
  t->add_option("--data", train.data, "Corpus CSV")->required()->check(CLI::ExistingFile);
  t->add_option("--split", train.split, "Split JSON");
  t->add_option("--out", train.out, "Checkpoint to write")->required();
  t->add_option("--embeddings", train.embeddings, "Pretrained embedding file (fixes the vocabulary)");
  t->add_option("--vocab", train.vocab, "Vocabulary file");
  t->add_option("--seq-len", train.seq_len, "Input length for word-level models")->capture_default_str();
  t->add_option("--min-count", train.min_count, "Minimum token frequency")->capture_default_str();
  t->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
  t->add_option("--batch-size", train.batch_size, "Batch size")->capture_default_str();
  t->add_option("--lr", train.lr, "Adam learning rate")->capture_default_str();
  t->add_option("--dropout", train.dropout, "Dropout rate")->capture_default_str();
  t->add_option("--patience", train.patience, "Stop after this many epochs without a lower loss (0 = off)");
  t->add_option("--log", train.log, "Per-epoch log JSON");
  t->add_option("--subword-vocab", train.subword_vocab, "Subword vocabulary (transformer)");
  t->add_option("--subword-size", train.subword_size, "Subword vocabulary size when training one")
      ->capture_default_str();
  t->add_option("--preset", train.preset, "Transformer preset: desk or base")->capture_default_str();

  PretrainOptions pretrain;
  auto* pt = app.add_subcommand("pretrain", "Masked-token and next-sentence pretraining of the transformer");
  pt->add_option("--data", pretrain.data, "Corpus CSV")->required()->check(CLI::ExistingFile);
  pt->add_option("--split", pretrain.split, "Split JSON (training part is used)");
  pt->add_option("--out", pretrain.out, "Pretraining checkpoint")->required();
  pt->add_option("--vocab-out", pretrain.vocab_out, "Subword vocabulary to write")->required();
  pt->add_option("--subword-vocab", pretrain.subword_vocab, "Existing subword vocabulary");
  pt->add_option("--subword-size", pretrain.subword_size, "Subword vocabulary size")->capture_default_str();
  pt->add_option("--preset", pretrain.preset, "desk or base")->capture_default_str();
  pt->add_option("--steps", pretrain.steps, "Optimizer steps")->capture_default_str();
  pt->add_option("--batch-size", pretrain.batch_size, "Sentence pairs per step")->capture_default_str();
  pt->add_option("--lr", pretrain.lr, "Adam learning rate")->capture_default_str();
  pt->add_option("--log", pretrain.log, "Per-step log JSON");

  FinetuneOptions finetune;
  auto* ft = app.add_subcommand("finetune", "Fine-tune a pretrained transformer for classification");
  ft->add_option("--pretrained", finetune.pretrained, "Pretraining checkpoint")->required()->check(CLI::ExistingFile);
  ft->add_option("--data", finetune.data, "Corpus CSV")->required()->check(CLI::ExistingFile);
  ft->add_option("--split", finetune.split, "Split JSON");
  ft->add_option("--out", finetune.out, "Classifier checkpoint")->required();
  ft->add_option("--subword-vocab", finetune.subword_vocab, "Subword vocabulary (must match pretraining)");
  ft->add_option("--epochs", finetune.epochs, "Epochs")->capture_default_str();
  ft->add_option("--batch-size", finetune.batch_size, "Batch size")->capture_default_str();
  ft->add_option("--lr", finetune.lr, "Adam learning rate")->capture_default_str();
  ft->add_option("--dropout", finetune.dropout, "Dropout on the pooled vector")->capture_default_str();
  ft->add_option("--patience", finetune.patience, "Early-stop patience (0 = off)");
  ft->add_option("--log", finetune.log, "Per-epoch log JSON");

  EvalOptions eval;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the test part of a split");
  ev->add_option("--model", eval.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", eval.data, "Corpus CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", eval.split, "Split JSON (test part is used; default all records)");
  ev->add_option("--out", eval.out, "Report JSON");
  ev->add_option("--manifest", eval.manifest, "Corpus manifest to reference");
  ev->add_option("--id", eval.id, "Model name in the report");

  CompareOptions compare;
  auto* c = app.add_subcommand("compare", "Tabulate metric reports side by side");
  c->add_option("reports", compare.reports, "Report JSON files")->required()->check(CLI::ExistingFile);
  c->add_option("--json-out", compare.json_out, "Write the JSON array here");

  PredictOptions predict;
  auto* p = app.add_subcommand("predict", "Classify one text");
  p->add_option("--model", predict.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  auto* text_opt = p->add_option("--text", predict.text, "Text to classify");
  auto* input_opt = p->add_option("--input", predict.input, "File holding the text")->check(CLI::ExistingFile);
  text_opt->excludes(input_opt);
  p->callback([&] {
    if (text_opt->count() == 0 && input_opt->count() == 0) throw CLI::RequiredError("--text or --input");
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& error) {
    if (error.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(error, out, err);
      return kExitOk;
    }
    err << error.what() << '\n';
    err << "Run with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) return do_scrape(scrape, g, out, err);
    if (im->parsed()) return do_import(import, g, out, err);
    if (m->parsed()) return do_merge(merge, g, out, err);
    if (sp->parsed()) return do_split(split, g, out, err);
    if (e->parsed()) return do_embed(embed, g, out, err);
    if (t->parsed()) return do_train(train, g, out, err);
    if (pt->parsed()) return do_pretrain(pretrain, g, out, err);
    if (ft->parsed()) return do_finetune(finetune, g, out, err);
    if (ev->parsed()) return do_eval(eval, g, out, err);
    if (c->parsed()) return do_compare(compare, g, out, err);
    if (p->parsed()) return do_predict(predict, g, out, err);
  } catch (const std::exception& ex) {
    err << json{{"error", error_kind(ex)}, {"message", ex.what()}}.dump() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace hoaxdet::cli
