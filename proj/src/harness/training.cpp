#include "hoaxdet/harness/training.hpp"

#include <numeric>

#include "hoaxdet/core/adam.hpp"

namespace hoaxdet::harness {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must lie in [0, 1)");
  if (patience && *patience < 1) throw ConfigError("patience must be at least 1");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"loss", "categorical_crossentropy"},
                      {"optimizer", "adam"},
                      {"learning_rate", learning_rate},
                      {"epochs", epochs},
                      {"batch_size", batch_size},
                      {"dropout", dropout},
                      {"seed", seed}};
  j["patience"] = patience ? nlohmann::json(*patience) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.dropout = j.value("dropout", c.dropout);
  c.seed = j.value("seed", c.seed);
  if (j.contains("patience") && !j["patience"].is_null()) c.patience = j["patience"].get<int>();
  c.validate();
  return c;
}

std::vector<EpochLog> run_training(zoo::Classifier& model, const LabeledSet& train, const TrainConfig& config,
                                   const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw ContractError("run_training: empty training set");

  auto named = model.parameters();
  std::vector<Tensor<float>*> params;
  for (const auto& p : named) params.push_back(p.tensor);

  AdamState<float> adam;
  adam.options.learning_rate = config.learning_rate;
  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ 0x5deece66dULL);

  std::vector<std::size_t> order(train.size());
  std::vector<EpochLog> log;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;

  model.zero_grad();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    EpochLog entry;
    entry.epoch = epoch;
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const float weight = 1.0f / static_cast<float>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train[order[k]];
        ad::Graph<float> graph;
        const auto probs = model.forward(graph, ex.ids, true, dropout_rng);
        Tensor<float> target(probs.shape());
        target[class_index(ex.label)] = 1.0f;
        const auto loss = ad::scale(ad::categorical_crossentropy(probs, target), weight);
        graph.backward(loss);
        loss_sum += static_cast<double>(loss.value()[0]) / weight;
        const int predicted = probs.value()[1] > probs.value()[0] ? 1 : 0;
        if (predicted == class_index(ex.label)) ++correct;
      }
      adam_step(adam, std::span<Tensor<float>* const>(params));
      model.zero_grad();
      ++entry.batches;
    }
    entry.mean_loss = loss_sum / static_cast<double>(train.size());
    entry.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    log.push_back(entry);

    if (on_epoch && !on_epoch(entry)) break;
    if (config.patience) {
      if (entry.mean_loss < best_loss) {
        best_loss = entry.mean_loss;
        stale = 0;
      } else if (++stale >= *config.patience) {
        break;
      }
    }
  }
  return log;
}

}  // namespace hoaxdet::harness
