#include "hoaxdet/harness/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace hoaxdet::harness {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

const char* kMetricKeys[] = {"accuracy", "macro_precision", "macro_recall", "macro_f1", "precision", "recall", "f1"};

}  // namespace

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (truth == Label::fake) {
    ++(predicted == Label::fake ? tp : fn);
  } else {
    ++(predicted == Label::fake ? fp : tn);
  }
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fp < 0 || cm.fn < 0 || cm.tn < 0) throw ContractError("confusion counts must be non-negative");
  if (cm.total() == 0) throw ContractError("compute_metrics: empty confusion matrix");
  MetricsReport r;
  r.matrix = cm;
  r.accuracy = ratio(cm.tp + cm.tn, cm.total());
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.recall = ratio(cm.tp, cm.tp + cm.fn);
  r.f1 = harmonic(r.precision, r.recall);
  const double valid_precision = ratio(cm.tn, cm.tn + cm.fn);
  const double valid_recall = ratio(cm.tn, cm.tn + cm.fp);
  r.macro_precision = (r.precision + valid_precision) / 2;
  r.macro_recall = (r.recall + valid_recall) / 2;
  r.macro_f1 = (r.f1 + harmonic(valid_precision, valid_recall)) / 2;
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = {{"model", model_id},
                      {"confusion_matrix", {{"tp", matrix.tp}, {"fp", matrix.fp}, {"fn", matrix.fn}, {"tn", matrix.tn}}},
                      {"accuracy", accuracy},
                      {"macro_precision", macro_precision},
                      {"macro_recall", macro_recall},
                      {"macro_f1", macro_f1},
                      {"precision", precision},
                      {"recall", recall},
                      {"f1", f1},
                      {"config", config},
                      {"manifest_hash", manifest_hash}};
  return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.model_id = j.value("model", "");
  const auto& cm = j.at("confusion_matrix");
  r.matrix = {cm.at("tp").get<std::int64_t>(), cm.at("fp").get<std::int64_t>(), cm.at("fn").get<std::int64_t>(),
              cm.at("tn").get<std::int64_t>()};
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_precision = j.at("macro_precision").get<double>();
  r.macro_recall = j.at("macro_recall").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.config = j.value("config", nlohmann::json::object());
  r.manifest_hash = j.value("manifest_hash", "");
  return r;
}

Evaluation evaluate_model(zoo::Classifier& model, const LabeledSet& test, std::string model_id) {
  if (test.empty()) throw ContractError("evaluate_model: empty test set");
  Evaluation out;
  for (const auto& ex : test) {
    const auto p = model.predict(ex.ids);
    out.matrix.add(ex.label, p[1] > p[0] ? Label::fake : Label::valid);
  }
  out.report = compute_metrics(out.matrix);
  out.report.model_id = model_id.empty() ? std::string(zoo::kind_name(model.kind())) : std::move(model_id);
  out.report.config = model.hyperparameters();
  return out;
}

std::string render_comparison(const nlohmann::json& reports) {
  std::vector<std::string> header{"Performance (%)"};
  for (const auto& r : reports) header.push_back(r.value("model", "model"));
  std::vector<std::vector<std::string>> rows{header};
  for (std::size_t m = 0; m < std::size(kMetricRows); ++m) {
    std::vector<std::string> row{kMetricRows[m]};
    for (const auto& r : reports) {
      row.push_back(std::to_string(static_cast<long>(std::lround(r.at(kMetricKeys[m]).get<double>() * 100))) + "%");
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

ComparisonTable compare_models(std::span<const MetricsReport> reports) {
  ComparisonTable table;
  table.json = nlohmann::json::array();
  for (const auto& r : reports) table.json.push_back(r.to_json());
  table.text = render_comparison(table.json);
  return table;
}

}  // namespace hoaxdet::harness
