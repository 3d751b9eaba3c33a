#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "hoaxdet/harness/dataset.hpp"
#include "hoaxdet/models/classifier.hpp"

namespace hoaxdet::harness {

struct TrainConfig {
  double learning_rate = 2e-5;
  int epochs = 50;
  std::size_t batch_size = 16;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  std::optional<int> patience;  // epochs without a lower mean loss before stopping

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double mean_loss = 0;
  double train_accuracy = 0;
  std::size_t batches = 0;
};

/// Called after each epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochLog&)>;

/// Mini-batch Adam on categorical cross-entropy. Each epoch reshuffles with
/// a stream derived from the seed; the trailing partial batch is kept.
/// Throws ContractError on an empty set.
std::vector<EpochLog> run_training(zoo::Classifier& model, const LabeledSet& train, const TrainConfig& config,
                                   const EpochCallback& on_epoch = {});

}  // namespace hoaxdet::harness
