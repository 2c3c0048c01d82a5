#include <fstream>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "netadv/error.hpp"
#include "netadv/stages.hpp"

namespace py = pybind11;
using namespace netadv;

namespace {

Dataset make_dataset(const Matrix& x, std::vector<std::size_t> y, std::vector<std::string> class_names,
                     std::vector<std::string> feature_names) {
  Dataset d;
  d.matrix = x;
  d.labels = std::move(y);
  d.class_names = std::move(class_names);
  if (feature_names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) feature_names.push_back("f" + std::to_string(j));
  }
  d.feature_names = std::move(feature_names);
  d.validate();
  return d;
}

py::dict report_dict(const ClassificationReport& r) {
  py::dict out;
  out["confusion"] = r.confusion;
  out["accuracy"] = r.accuracy;
  out["macro_precision"] = r.macro_precision;
  out["macro_recall"] = r.macro_recall;
  out["macro_f1"] = r.macro_f1;
  py::list per_class;
  for (const auto& m : r.per_class) {
    py::dict c;
    c["support"] = m.support;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["precision_undefined"] = m.precision_undefined;
    c["recall_undefined"] = m.recall_undefined;
    per_class.append(c);
  }
  out["per_class"] = per_class;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adversarial attacks, defenses and robustness metrics for network traffic classifiers.";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<UnsupportedAttackError>(m, "UnsupportedAttackError", PyExc_RuntimeError);
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", PyExc_FileNotFoundError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("x"), py::arg("y"), py::arg("class_names"),
           py::arg("feature_names") = std::vector<std::string>{})
      .def_readonly("matrix", &Dataset::matrix)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("feature_names", &Dataset::feature_names)
      .def_readonly("class_names", &Dataset::class_names)
      .def_property_readonly("rows", &Dataset::rows)
      .def_property_readonly("dim", &Dataset::dim);

  m.def("load_dataset_csv", [](const std::string& path, std::vector<std::string> class_names) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path);
    return read_dataset_csv(in, std::move(class_names));
  });
  m.def("parse_nslkdd", [](const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> labels;
    for (const auto& r : parse_nslkdd(in)) labels.push_back(r.label);
    return labels;
  }, "Parses NSL-KDD text and returns the record labels.");

  py::class_<Classifier>(m, "Classifier")
      .def_property_readonly("input_dim", &Classifier::input_dim)
      .def_property_readonly("num_classes", &Classifier::num_classes)
      .def("scores", [](const Classifier& c, const std::vector<double>& x) { return c.scores(x); })
      .def("predict", [](const Classifier& c, const std::vector<double>& x) { return c.predict(x); })
      .def("predict_all", &Classifier::predict_all, py::arg("rows"), py::arg("workers") = 1);

  py::class_<MlpModel, Classifier>(m, "MlpModel")
      .def("predict_proba", [](const MlpModel& mlp, const std::vector<double>& x) { return mlp.predict_proba(x); })
      .def("input_gradient",
           [](const MlpModel& mlp, const std::vector<double>& x, std::size_t target) {
             return mlp.input_gradient(x, target);
           })
      .def("__eq__", &MlpModel::operator==);
  py::class_<SvmModel, Classifier>(m, "SvmModel").def_property_readonly("gamma", &SvmModel::gamma);

  m.def("train_mlp",
        [](const Dataset& train, std::size_t epochs, std::size_t batch_size, double learning_rate,
           std::uint64_t seed, std::vector<std::size_t> hidden) {
          return train_mlp(train, {epochs, batch_size, learning_rate, seed, std::move(hidden)}).model;
        },
        py::arg("train"), py::arg("epochs") = 20, py::arg("batch_size") = 64, py::arg("learning_rate") = 0.01,
        py::arg("seed") = 0, py::arg("hidden") = std::vector<std::size_t>{100, 100, 100, 100},
        py::call_guard<py::gil_scoped_release>());
  m.def("train_svm",
        [](const Dataset& train, double c, std::optional<double> gamma, double tolerance) {
          SvmConfig cfg;
          cfg.c = c;
          cfg.gamma = gamma;
          cfg.tolerance = tolerance;
          return train_svm_rbf(train, cfg);
        },
        py::arg("train"), py::arg("C") = 1.0, py::arg("gamma") = std::nullopt, py::arg("tolerance") = 1e-3,
        py::call_guard<py::gil_scoped_release>());

  py::class_<AttackSpec>(m, "AttackSpec")
      .def(py::init([](const std::string& kind, double epsilon, std::optional<std::size_t> max_features,
                       std::optional<std::size_t> target, std::optional<std::size_t> source,
                       const std::string& specificity) {
             AttackSpec s;
             s.kind = parse_attack_kind(kind);
             s.epsilon = epsilon;
             s.max_features = max_features;
             s.target_class = target;
             s.source_class = source;
             s.specificity = parse_specificity(specificity);
             return s;
           }),
           py::arg("kind") = "mi-l1", py::arg("epsilon") = 1e-2, py::arg("max_features") = 2,
           py::arg("target") = std::nullopt, py::arg("source") = std::nullopt, py::arg("specificity") = "targeted")
      .def_readwrite("epsilon", &AttackSpec::epsilon)
      .def_readwrite("max_features", &AttackSpec::max_features)
      .def_readwrite("target", &AttackSpec::target_class)
      .def_readwrite("source", &AttackSpec::source_class)
      .def_readwrite("iterations", &AttackSpec::iterations)
      .def_readwrite("step_size", &AttackSpec::step_size)
      .def_readwrite("theta", &AttackSpec::theta);

  py::class_<ClassProfile>(m, "ClassProfile")
      .def_readonly("feature_indices", &ClassProfile::feature_indices)
      .def_readonly("values", &ClassProfile::values);

  py::class_<AdversarialExample>(m, "AdversarialExample")
      .def_readonly("source_index", &AdversarialExample::source_index)
      .def_readonly("original", &AdversarialExample::original)
      .def_readonly("perturbed", &AdversarialExample::perturbed)
      .def_readonly("delta_indices", &AdversarialExample::delta_indices)
      .def_readonly("delta_values", &AdversarialExample::delta_values)
      .def_readonly("source_class", &AdversarialExample::source_class)
      .def_readonly("predicted_before", &AdversarialExample::predicted_before)
      .def_readonly("predicted_after", &AdversarialExample::predicted_after)
      .def_readonly("succeeded", &AdversarialExample::succeeded);

  m.def("mutual_information_scores",
        [](const Dataset& train, std::size_t bins) { return mutual_information_scores(train, std::nullopt, bins); },
        py::arg("train"), py::arg("bins") = 10);
  m.def("select_discriminant", [](const std::vector<double>& scores, std::size_t k) {
    return select_discriminant(scores, k);
  });
  m.def("build_profile", &build_profile);
  m.def("craft_batch",
        [](const Classifier& model, const Dataset& data, const std::vector<std::size_t>& rows, const AttackSpec& spec,
           std::optional<ClassProfile> profile, std::size_t workers) {
          return craft_batch(model, data, rows, spec, profile ? &*profile : nullptr, workers);
        },
        py::arg("model"), py::arg("data"), py::arg("rows"), py::arg("spec"), py::arg("profile") = std::nullopt,
        py::arg("workers") = 1);
  m.def("attack_candidates", &attack_candidates);

  m.def("feature_squeeze", [](const std::vector<double>& x, unsigned bits) { return feature_squeeze(x, bits); });
  m.def("js_divergence", [](const std::vector<double>& p, const std::vector<double>& q) {
    return js_divergence(p, q);
  });
  m.def("classification_report",
        [](const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& labels, std::size_t classes) {
          return report_dict(classification_report(predictions, labels, classes));
        });
  m.def("misclassification_ratio",
        [](const std::vector<AdversarialExample>& examples) { return misclassification_ratio(examples); });

  m.def("config_reference", &config_reference_markdown);
  m.def("run_experiment",
        [](const std::string& config, std::optional<std::string> out, std::optional<std::size_t> workers) {
          auto cfg = load_config(config);
          if (workers) cfg.workers = *workers;
          run_experiment(cfg, out ? std::filesystem::path(*out) : resolve_output_dir(cfg));
        },
        py::arg("config"), py::arg("out") = std::nullopt, py::arg("workers") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("report", [](const std::string& dir) { report_stage(dir); });
}
