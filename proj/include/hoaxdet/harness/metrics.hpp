#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoaxdet/harness/dataset.hpp"
#include "hoaxdet/models/classifier.hpp"

namespace hoaxdet::harness {

/// Binary confusion counts with "fake" as the positive class.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  void add(Label truth, Label predicted);

  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  std::string model_id;
  ConfusionMatrix matrix;
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  double precision = 0;  // fake class
  double recall = 0;
  double f1 = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string manifest_hash;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

/// 0/0 ratios are reported as 0. Throws ContractError on an empty matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct Evaluation {
  ConfusionMatrix matrix;
  MetricsReport report;
};

/// Argmax decisions in inference mode, in example order.
Evaluation evaluate_model(zoo::Classifier& model, const LabeledSet& test, std::string model_id = {});

/// Row labels in display order.
inline constexpr const char* kMetricRows[] = {"Accuracy",  "Macro Precision", "Macro Recall", "Macro F1-Score",
                                              "Precision", "Recall",          "F1-Score"};

struct ComparisonTable {
  nlohmann::json json;  // array of report objects
  std::string text;     // aligned, integer percentages
};

ComparisonTable compare_models(std::span<const MetricsReport> reports);

/// Renders the text table from a JSON array produced by compare_models.
std::string render_comparison(const nlohmann::json& reports);

}  // namespace hoaxdet::harness
