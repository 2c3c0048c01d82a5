#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netadv/attacks.hpp"
#include "netadv/metrics.hpp"

namespace netadv {

struct RobustnessMetrics {
  std::size_t attempted = 0;
  std::size_t succeeded = 0;  // attack success criterion met on this model
  double misclassification_ratio = 0.0;
  double recall_before = 0.0;  // source-class recall over the attempted samples
  double recall_after = 0.0;
  double inference_stability = 0.0;  // mean bits over attempted samples
  std::vector<std::optional<double>> stability_per_class;
  AccuracyVariance accuracy_variance;
};

struct Evaluation {
  std::string name;   // undefended, defended, defended-adaptive
  std::string model;  // short description of the scored classifier
  ClassificationReport before;
  // Test set with every attacked row replaced by its adversarial version.
  std::optional<ClassificationReport> after;
  std::optional<RobustnessMetrics> robustness;
};

struct TransferSummary {
  std::string source_model;
  std::string target_model;
  TransferResult result;
};

struct ChecklistItem {
  std::string id;
  std::string description;
  bool exercised = false;
};

struct EvaluationReport {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::string> class_names;
  std::vector<Evaluation> evaluations;
  std::optional<TransferSummary> transfer;
  std::vector<ChecklistItem> checklist;
};

// Scores `model` on the clean test set and, when `examples` is given, on the
// attacked test set. Example predictions are recomputed against `model`.
Evaluation evaluate_model(std::string name, std::string description, const Classifier& model, const Dataset& test,
                          const std::vector<AdversarialExample>* examples, const AttackSpec* spec,
                          std::size_t workers = 1);

struct ChecklistContext {
  const AttackSpec* attack = nullptr;
  bool defended = false;
  bool adaptive = false;
  bool transfer = false;
};

std::vector<ChecklistItem> defense_checklist(const ChecklistContext& ctx);

nlohmann::json to_json(const ClassificationReport& r, const std::vector<std::string>& class_names);
ClassificationReport classification_report_from_json(const nlohmann::json& j, std::size_t num_classes);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport evaluation_report_from_json(const nlohmann::json& j);

// Rows are true classes, columns predictions.
void write_confusion_csv(std::ostream& out, const ClassificationReport& r, const std::vector<std::string>& class_names);
// Overall accuracy and macro precision/recall/F1 per evaluation and phase.
void write_chart_csv(std::ostream& out, const EvaluationReport& report);
void write_per_class_csv(std::ostream& out, const EvaluationReport& report);
// Markdown rendering of the checklist section.
void write_checklist_markdown(std::ostream& out, const EvaluationReport& report);

}  // namespace netadv
