#include "hoaxdet/harness/checkpoint.hpp"

#include <bit>
#include <map>

#include "hoaxdet/harness/io.hpp"
#include "hoaxdet/transformer/model.hpp"

namespace hoaxdet::harness {

namespace {

constexpr const char* kFormat = "hoaxdet-checkpoint";
constexpr int kVersion = 1;
constexpr const char* kPretrainingStage = "pretraining";

void put_le(std::string& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i, bits >>= 8) out.push_back(static_cast<char>(bits & 0xFF));
}

float get_le(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<float>(bits);
}

std::unique_ptr<zoo::Classifier> instantiate(zoo::ModelKind kind, const nlohmann::json& hp,
                                             std::vector<std::string> vocabulary) {
  if (kind == zoo::ModelKind::transformer) {
    return std::make_unique<tfm::TransformerClassifier>(tfm::TransformerConfig::from_json(hp), std::move(vocabulary),
                                                        hp.at("dropout").get<double>());
  }
  auto model = std::make_unique<zoo::SequenceClassifier>(zoo::SequenceClassifier::architecture_from_json(kind, hp),
                                                         std::move(vocabulary));
  if (hp.value("embedding_source", "random") == "word2vec") model->set_embedding_source(zoo::EmbeddingSource::word2vec);
  return model;
}

std::vector<std::string> header_vocabulary(const nlohmann::json& header) {
  auto vocabulary = header.at("vocabulary").get<std::vector<std::string>>();
  if (vocabulary.size() != header.at("vocab_size").get<std::size_t>()) {
    throw CorruptionError("vocabulary length differs from the declared vocab size");
  }
  return vocabulary;
}

}  // namespace

std::string encode_checkpoint(std::string_view kind, const nlohmann::json& hyperparameters,
                              const std::vector<std::string>& vocabulary, std::span<const zoo::NamedParameter> params) {
  nlohmann::json layers = nlohmann::json::array();
  std::string blob;
  for (const auto& p : params) {
    const std::size_t offset = blob.size();
    const float* data = p.tensor->data();
    for (Index i = 0; i < p.tensor->size(); ++i) put_le(blob, data[i]);
    layers.push_back({{"name", p.name}, {"shape", p.tensor->shape()}, {"offset", offset}, {"length", blob.size() - offset}});
  }
  const nlohmann::json header = {{"format", kFormat},
                                 {"version", kVersion},
                                 {"kind", std::string(kind)},
                                 {"hyperparameters", hyperparameters},
                                 {"vocab_size", vocabulary.size()},
                                 {"vocabulary", vocabulary},
                                 {"layers", layers},
                                 {"blob_bytes", blob.size()}};
  return header.dump() + "\n" + blob;
}

DecodedCheckpoint decode_checkpoint(const std::string& bytes) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw CorruptionError("checkpoint header is not terminated");
  DecodedCheckpoint out;
  try {
    out.header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptionError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (!out.header.is_object() || out.header.value("format", "") != kFormat) {
    throw CorruptionError("not a checkpoint file");
  }
  if (out.header.value("version", 0) != kVersion) {
    throw VersionError("unsupported checkpoint version " + out.header.value("version", nlohmann::json()).dump());
  }
  out.blob = std::string_view(bytes.data() + newline + 1, bytes.size() - newline - 1);
  try {
    if (out.header.at("blob_bytes").get<std::size_t>() != out.blob.size()) {
      throw CorruptionError("checkpoint blob holds " + std::to_string(out.blob.size()) + " bytes, header declares " +
                            out.header.at("blob_bytes").dump());
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint header is incomplete: ") + e.what());
  }
  return out;
}

void restore_parameters(const DecodedCheckpoint& checkpoint, std::span<const zoo::NamedParameter> params) {
  std::map<std::string, nlohmann::json> declared;
  try {
    for (const auto& layer : checkpoint.header.at("layers")) declared[layer.at("name").get<std::string>()] = layer;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint layer table is malformed: ") + e.what());
  }
  for (const auto& p : params) {
    if (!declared.contains(p.name)) throw CorruptionError("checkpoint lacks layer '" + p.name + "'");
  }
  if (declared.size() != params.size()) {
    for (const auto& [name, layer] : declared) {
      const bool known = std::any_of(params.begin(), params.end(), [&](const auto& p) { return p.name == name; });
      if (!known) throw CorruptionError("checkpoint declares layer '" + name + "' that the model does not have");
    }
  }
  const auto& blob = checkpoint.blob;
  for (const auto& p : params) {
    const auto& layer = declared.at(p.name);
    Shape shape;
    std::size_t offset = 0, length = 0;
    try {
      shape = layer.at("shape").get<Shape>();
      offset = layer.at("offset").get<std::size_t>();
      length = layer.at("length").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw CorruptionError("layer '" + p.name + "' entry is malformed: " + e.what());
    }
    if (shape != p.tensor->shape()) {
      throw CorruptionError("layer '" + p.name + "' has shape " + shape_str(shape) + ", expected " +
                            shape_str(p.tensor->shape()));
    }
    if (length != static_cast<std::size_t>(p.tensor->size()) * 4) {
      throw CorruptionError("layer '" + p.name + "' declares " + std::to_string(length) + " bytes");
    }
    if (offset > blob.size() || length > blob.size() - offset) {
      throw CorruptionError("layer '" + p.name + "' lies outside the blob");
    }
    float* data = p.tensor->data();
    for (Index i = 0; i < p.tensor->size(); ++i) data[i] = get_le(blob.data() + offset + 4 * static_cast<std::size_t>(i));
  }
}

std::string serialize_checkpoint(zoo::Classifier& model) {
  const auto params = model.parameters();
  return encode_checkpoint(zoo::kind_name(model.kind()), model.hyperparameters(), model.vocabulary_tokens(), params);
}

void save_checkpoint(zoo::Classifier& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(model));
}

std::unique_ptr<zoo::Classifier> deserialize_checkpoint(const std::string& bytes) {
  const auto checkpoint = decode_checkpoint(bytes);
  const auto& header = checkpoint.header;
  std::unique_ptr<zoo::Classifier> model;
  try {
    const auto kind = zoo::parse_kind(header.at("kind").get<std::string>());
    const auto& hp = header.at("hyperparameters");
    if (hp.value("stage", "") == kPretrainingStage) {
      throw ContractError("this is a pretraining checkpoint; fine-tune it before classifying");
    }
    model = instantiate(kind, hp, header_vocabulary(header));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint header is incomplete: ") + e.what());
  }
  restore_parameters(checkpoint, model->parameters());
  return model;
}

std::unique_ptr<zoo::Classifier> load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

void save_pretraining_checkpoint(tfm::PretrainingModel& model, const std::filesystem::path& path) {
  auto hp = model.encoder().config().to_json();
  hp["stage"] = kPretrainingStage;
  const auto params = model.parameters();
  write_file_atomic(path, encode_checkpoint(zoo::kind_name(zoo::ModelKind::transformer), hp, model.vocabulary(), params));
}

std::unique_ptr<tfm::PretrainingModel> load_pretraining_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto checkpoint = decode_checkpoint(bytes);
  const auto& header = checkpoint.header;
  std::unique_ptr<tfm::PretrainingModel> model;
  try {
    if (zoo::parse_kind(header.at("kind").get<std::string>()) != zoo::ModelKind::transformer ||
        header.at("hyperparameters").value("stage", "") != kPretrainingStage) {
      throw ContractError(path.string() + " is not a pretraining checkpoint");
    }
    model = std::make_unique<tfm::PretrainingModel>(tfm::TransformerConfig::from_json(header.at("hyperparameters")),
                                                    header_vocabulary(header), 0);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint header is incomplete: ") + e.what());
  }
  restore_parameters(checkpoint, model->parameters());
  return model;
}

}  // namespace hoaxdet::harness
