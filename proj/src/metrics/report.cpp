#include <ostream>

#include "netadv/error.hpp"
#include "netadv/parallel.hpp"
#include "netadv/report.hpp"
#include "netadv/text.hpp"

namespace netadv {
namespace {

using nlohmann::json;

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v) { return text::format_double(v); }

json robustness_to_json(const RobustnessMetrics& m, const std::vector<std::string>& class_names) {
  json per_class = json::object();
  for (std::size_t c = 0; c < m.stability_per_class.size(); ++c) {
    per_class[class_names.at(c)] = optional_to_json(m.stability_per_class[c]);
  }
  return {{"attempted", m.attempted},
          {"succeeded", m.succeeded},
          {"misclassification_ratio", m.misclassification_ratio},
          {"source_recall_before", m.recall_before},
          {"source_recall_after", m.recall_after},
          {"inference_stability_bits", m.inference_stability},
          {"inference_stability_per_class", per_class},
          {"accuracy_variance",
           {{"mean_before", m.accuracy_variance.mean_before},
            {"mean_after", m.accuracy_variance.mean_after},
            {"difference", m.accuracy_variance.difference},
            {"variance_before", m.accuracy_variance.variance_before},
            {"variance_after", m.accuracy_variance.variance_after}}}};
}

RobustnessMetrics robustness_from_json(const json& j, const std::vector<std::string>& class_names) {
  RobustnessMetrics m;
  m.attempted = j.at("attempted").get<std::size_t>();
  m.succeeded = j.at("succeeded").get<std::size_t>();
  m.misclassification_ratio = j.at("misclassification_ratio").get<double>();
  m.recall_before = j.at("source_recall_before").get<double>();
  m.recall_after = j.at("source_recall_after").get<double>();
  m.inference_stability = j.at("inference_stability_bits").get<double>();
  for (const auto& name : class_names) {
    const auto& v = j.at("inference_stability_per_class").at(name);
    m.stability_per_class.push_back(v.is_null() ? std::nullopt : std::optional(v.get<double>()));
  }
  const auto& av = j.at("accuracy_variance");
  m.accuracy_variance = {av.at("mean_before").get<double>(), av.at("mean_after").get<double>(),
                         av.at("difference").get<double>(), av.at("variance_before").get<double>(),
                         av.at("variance_after").get<double>()};
  return m;
}

void chart_rows(std::ostream& out, const std::string& evaluation, const char* phase, const ClassificationReport& r) {
  out << evaluation << ',' << phase << ",accuracy," << fmt(r.accuracy) << '\n';
  out << evaluation << ',' << phase << ",precision," << fmt(r.macro_precision) << '\n';
  out << evaluation << ',' << phase << ",recall," << fmt(r.macro_recall) << '\n';
  out << evaluation << ',' << phase << ",f1," << fmt(r.macro_f1) << '\n';
}

void per_class_rows(std::ostream& out, const std::string& evaluation, const char* phase,
                    const ClassificationReport& r, const std::vector<std::string>& class_names) {
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    out << evaluation << ',' << phase << ',' << text::csv_escape(class_names[c]) << ',' << m.support << ','
        << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.f1) << '\n';
  }
}

}  // namespace

Evaluation evaluate_model(std::string name, std::string description, const Classifier& model, const Dataset& test,
                          const std::vector<AdversarialExample>* examples, const AttackSpec* spec,
                          std::size_t workers) {
  Evaluation ev;
  ev.name = std::move(name);
  ev.model = std::move(description);
  const auto clean = model.predict_all(test.matrix, workers);
  ev.before = classification_report(clean, test.labels, test.num_classes());
  if (!examples) return ev;
  if (!spec) throw ValidationError("attack", "attacked evaluation needs the attack spec");

  Matrix attacked = test.matrix;
  const auto d = static_cast<std::size_t>(test.dim());
  for (const auto& ex : *examples) {
    if (ex.source_index >= test.rows() || ex.perturbed.size() != d) {
      throw ValidationError("examples", "example does not belong to the evaluation set");
    }
    attacked.row(static_cast<Eigen::Index>(ex.source_index)) =
        Eigen::Map<const Eigen::RowVectorXd>(ex.perturbed.data(), static_cast<Eigen::Index>(d));
  }
  const auto after = model.predict_all(attacked, workers);
  ev.after = classification_report(after, test.labels, test.num_classes());
  if (examples->empty()) return ev;

  // Re-score every example against this model.
  const auto n = static_cast<Eigen::Index>(examples->size());
  Matrix originals(n, static_cast<Eigen::Index>(d));
  Matrix perturbed(n, static_cast<Eigen::Index>(d));
  std::vector<std::size_t> labels(examples->size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& ex = (*examples)[static_cast<std::size_t>(k)];
    originals.row(k) = test.matrix.row(static_cast<Eigen::Index>(ex.source_index));
    perturbed.row(k) = Eigen::Map<const Eigen::RowVectorXd>(ex.perturbed.data(), static_cast<Eigen::Index>(d));
    labels[static_cast<std::size_t>(k)] = ex.source_class;
  }
  const auto pred_before = model.predict_all(originals, workers);
  const auto pred_after = model.predict_all(perturbed, workers);
  std::vector<AdversarialExample> rescored;
  rescored.reserve(examples->size());
  RobustnessMetrics m;
  m.attempted = examples->size();
  for (std::size_t k = 0; k < examples->size(); ++k) {
    AdversarialExample ex;
    ex.source_class = labels[k];
    ex.predicted_before = pred_before[k];
    ex.predicted_after = pred_after[k];
    ex.succeeded = attack_succeeded(*spec, ex.source_class, ex.predicted_after);
    m.succeeded += ex.succeeded;
    rescored.push_back(std::move(ex));
  }
  m.misclassification_ratio = misclassification_ratio(rescored);
  m.recall_before = attempted_recall(rescored, false);
  m.recall_after = attempted_recall(rescored, true);
  const auto stability = inference_stability(model.distribution_all(originals, workers),
                                             model.distribution_all(perturbed, workers), labels, test.num_classes());
  m.inference_stability = stability.mean;
  m.stability_per_class = stability.per_class;
  const double acc_before[] = {ev.before.accuracy};
  const double acc_after[] = {ev.after->accuracy};
  m.accuracy_variance = accuracy_variance(acc_before, acc_after);
  ev.robustness = std::move(m);
  return ev;
}

std::vector<ChecklistItem> defense_checklist(const ChecklistContext& ctx) {
  const bool attacked = ctx.attack != nullptr;
  const bool gradient = attacked && ctx.attack->kind != AttackKind::kMiL1;
  const bool iterative = attacked && ctx.attack->kind != AttackKind::kFgsm;
  return {
      {"threat-model", "Adversary knowledge, attack phase and specificity are recorded with the run", attacked},
      {"adaptive-adversary", "Examples were re-crafted against the defended model itself",
       ctx.defended && ctx.adaptive},
      {"gradient-attack", "The model was probed with a gradient-based attack (FGSM, BIM or JSMA)", gradient},
      {"multiple-metrics", "Standard and robustness metrics are reported side by side", attacked},
      {"iterative-attack", "An iterative attack was used rather than a single gradient step", iterative},
      {"out-of-distribution", "Inputs drawn from outside the training distribution were evaluated", false},
      {"transferability", "Examples crafted on one model were scored on a second model", ctx.transfer},
  };
}

json to_json(const ClassificationReport& r, const std::vector<std::string>& class_names) {
  json per_class = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    per_class.push_back({{"class", class_names.at(c)},
                         {"support", m.support},
                         {"predicted", m.predicted},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"precision_undefined", m.precision_undefined},
                         {"recall_undefined", m.recall_undefined},
                         {"f1_undefined", m.f1_undefined}});
  }
  return {{"total", r.total},
          {"accuracy", r.accuracy},
          {"macro_precision", r.macro_precision},
          {"macro_recall", r.macro_recall},
          {"macro_f1", r.macro_f1},
          {"confusion", r.confusion},
          {"per_class", per_class}};
}

ClassificationReport classification_report_from_json(const json& j, std::size_t num_classes) {
  ClassificationReport r;
  r.total = j.at("total").get<std::size_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_precision = j.at("macro_precision").get<double>();
  r.macro_recall = j.at("macro_recall").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  if (r.confusion.size() != num_classes) throw ValidationError("report.confusion", "wrong number of rows");
  for (const auto& m : j.at("per_class")) {
    ClassMetrics cm;
    cm.support = m.at("support").get<std::size_t>();
    cm.predicted = m.at("predicted").get<std::size_t>();
    cm.precision = m.at("precision").get<double>();
    cm.recall = m.at("recall").get<double>();
    cm.f1 = m.at("f1").get<double>();
    cm.precision_undefined = m.at("precision_undefined").get<bool>();
    cm.recall_undefined = m.at("recall_undefined").get<bool>();
    cm.f1_undefined = m.at("f1_undefined").get<bool>();
    r.per_class.push_back(cm);
  }
  if (r.per_class.size() != num_classes) throw ValidationError("report.per_class", "wrong number of classes");
  return r;
}

json to_json(const EvaluationReport& report) {
  json evaluations = json::array();
  for (const auto& ev : report.evaluations) {
    json e = {{"name", ev.name}, {"model", ev.model}, {"before", to_json(ev.before, report.class_names)}};
    e["after"] = ev.after ? to_json(*ev.after, report.class_names) : json(nullptr);
    e["robustness"] = ev.robustness ? robustness_to_json(*ev.robustness, report.class_names) : json(nullptr);
    evaluations.push_back(std::move(e));
  }
  json checklist = json::array();
  for (const auto& item : report.checklist) {
    checklist.push_back({{"id", item.id}, {"description", item.description}, {"exercised", item.exercised}});
  }
  json j = {{"format", "netadv-report"},
            {"version", 1},
            {"metadata", report.metadata},
            {"class_names", report.class_names},
            {"evaluations", evaluations},
            {"checklist", checklist}};
  if (report.transfer) {
    const auto& t = *report.transfer;
    j["transfer"] = {{"source_model", t.source_model},
                     {"target_model", t.target_model},
                     {"attempted", t.result.attempted},
                     {"fooled", t.result.fooled},
                     {"succeeded_on_source", t.result.succeeded_on_source},
                     {"fooled_given_success", t.result.fooled_given_success}};
  } else {
    j["transfer"] = nullptr;
  }
  return j;
}

EvaluationReport evaluation_report_from_json(const json& j) {
  try {
    if (j.at("format") != "netadv-report") throw ValidationError("report.format", "not a netadv report");
    EvaluationReport r;
    r.metadata = j.at("metadata");
    r.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& e : j.at("evaluations")) {
      Evaluation ev;
      ev.name = e.at("name").get<std::string>();
      ev.model = e.at("model").get<std::string>();
      ev.before = classification_report_from_json(e.at("before"), r.class_names.size());
      if (!e.at("after").is_null()) ev.after = classification_report_from_json(e.at("after"), r.class_names.size());
      if (!e.at("robustness").is_null()) ev.robustness = robustness_from_json(e.at("robustness"), r.class_names);
      r.evaluations.push_back(std::move(ev));
    }
    for (const auto& item : j.at("checklist")) {
      r.checklist.push_back({item.at("id").get<std::string>(), item.at("description").get<std::string>(),
                             item.at("exercised").get<bool>()});
    }
    if (!j.at("transfer").is_null()) {
      const auto& t = j.at("transfer");
      TransferSummary s;
      s.source_model = t.at("source_model").get<std::string>();
      s.target_model = t.at("target_model").get<std::string>();
      s.result.attempted = t.at("attempted").get<std::size_t>();
      s.result.fooled = t.at("fooled").get<std::size_t>();
      s.result.succeeded_on_source = t.at("succeeded_on_source").get<std::size_t>();
      s.result.fooled_given_success = t.at("fooled_given_success").get<std::size_t>();
      r.transfer = s;
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError("report", e.what());
  }
}

void write_confusion_csv(std::ostream& out, const ClassificationReport& r, const std::vector<std::string>& class_names) {
  out << "true\\predicted";
  for (const auto& name : class_names) out << ',' << text::csv_escape(name);
  out << '\n';
  for (std::size_t t = 0; t < r.confusion.size(); ++t) {
    out << text::csv_escape(class_names.at(t));
    for (std::size_t count : r.confusion[t]) out << ',' << count;
    out << '\n';
  }
}

void write_chart_csv(std::ostream& out, const EvaluationReport& report) {
  out << "evaluation,phase,metric,value\n";
  for (const auto& ev : report.evaluations) {
    chart_rows(out, ev.name, "before", ev.before);
    if (ev.after) chart_rows(out, ev.name, "after", *ev.after);
  }
}

void write_per_class_csv(std::ostream& out, const EvaluationReport& report) {
  out << "evaluation,phase,class,support,precision,recall,f1\n";
  for (const auto& ev : report.evaluations) {
    per_class_rows(out, ev.name, "before", ev.before, report.class_names);
    if (ev.after) per_class_rows(out, ev.name, "after", *ev.after, report.class_names);
  }
}

void write_checklist_markdown(std::ostream& out, const EvaluationReport& report) {
  out << "# Defense evaluation checklist\n\n";
  for (const auto& item : report.checklist) {
    out << "- [" << (item.exercised ? 'x' : ' ') << "] `" << item.id << "` " << item.description << '\n';
  }
}

}  // namespace netadv
