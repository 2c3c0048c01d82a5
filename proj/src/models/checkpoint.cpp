#include <istream>
#include <ostream>

#include "netadv/checkpoint.hpp"
#include "netadv/error.hpp"
#include "netadv/hash.hpp"
#include "netadv/text.hpp"

namespace netadv {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "netadv-checkpoint";
constexpr int kVersion = 1;

template <typename Mat>
json matrix_to_json(const Mat& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

template <typename Mat>
Mat matrix_from_json(const json& j, const std::string& field) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw ValidationError(field, "stored shape does not match the number of values");
  }
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++];
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> vector_to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

const Classifier& as_classifier(const Model& model) {
  return std::visit([](const auto& m) -> const Classifier& { return m; }, model);
}

Model train_model(const Dataset& train, const TrainConfig& cfg) {
  if (const auto* mlp = std::get_if<MlpConfig>(&cfg)) return train_mlp(train, *mlp).model;
  return train_svm_rbf(train, std::get<SvmConfig>(cfg));
}

std::string model_kind(const Model& model) {
  return std::holds_alternative<MlpModel>(model) ? "mlp" : "svm";
}

std::string norm_fingerprint(const NormParams& params) {
  std::string canonical;
  for (std::size_t j = 0; j < params.min.size(); ++j) {
    canonical += text::format_double(params.min[j]);
    canonical += ':';
    canonical += text::format_double(params.max[j]);
    canonical += ';';
  }
  return sha256_hex(canonical);
}

json to_json(const MlpConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"seed", cfg.seed},
          {"hidden", cfg.hidden}};
}

json to_json(const SvmConfig& cfg) {
  json j = {{"C", cfg.c},
            {"tolerance", cfg.tolerance},
            {"cache_mb", cfg.cache_mb},
            {"max_iterations", cfg.max_iterations}};
  j["gamma"] = cfg.gamma ? json(*cfg.gamma) : json(nullptr);
  return j;
}

json to_json(const TrainConfig& cfg) {
  return std::visit([](const auto& c) { return to_json(c); }, cfg);
}

TrainConfig train_config_from_json(const json& j, const std::string& kind) {
  try {
    if (kind == "mlp") {
      MlpConfig c;
      c.epochs = j.at("epochs").get<std::size_t>();
      c.batch_size = j.at("batch_size").get<std::size_t>();
      c.learning_rate = j.at("learning_rate").get<double>();
      c.seed = j.at("seed").get<std::uint64_t>();
      c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
      return c;
    }
    if (kind == "svm") {
      SvmConfig c;
      c.c = j.at("C").get<double>();
      c.tolerance = j.at("tolerance").get<double>();
      c.cache_mb = j.at("cache_mb").get<std::size_t>();
      c.max_iterations = j.at("max_iterations").get<std::size_t>();
      if (!j.at("gamma").is_null()) c.gamma = j.at("gamma").get<double>();
      return c;
    }
  } catch (const json::exception& e) {
    throw ValidationError("train_config", e.what());
  }
  throw ValidationError("model.kind", "unknown model kind '" + kind + "'");
}

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  const Classifier& clf = as_classifier(checkpoint.model);
  json j = {{"format", kFormat},
            {"version", kVersion},
            {"kind", model_kind(checkpoint.model)},
            {"input_dim", clf.input_dim()},
            {"num_classes", clf.num_classes()},
            {"class_names", checkpoint.class_names},
            {"norm_fingerprint", checkpoint.norm_fingerprint},
            {"train_config", checkpoint.train_config}};
  if (const auto* mlp = std::get_if<MlpModel>(&checkpoint.model)) {
    json layers = json::array();
    for (const auto& layer : mlp->layers()) {
      layers.push_back({{"weights", matrix_to_json(layer.weights)}, {"bias", vector_to_std(layer.bias)}});
    }
    j["layers"] = std::move(layers);
  } else {
    const auto& svm = std::get<SvmModel>(checkpoint.model);
    j["gamma"] = svm.gamma();
    j["C"] = svm.c();
    j["support_vectors"] = matrix_to_json(svm.support_vectors());
    j["coefficients"] = matrix_to_json(svm.coefficients());
    j["bias"] = vector_to_std(svm.bias());
    json machines = json::array();
    for (const auto& m : svm.machines()) {
      machines.push_back({{"support_count", m.support_count},
                          {"iterations", m.iterations},
                          {"kkt_gap", m.kkt_gap},
                          {"converged", m.converged}});
    }
    j["machines"] = std::move(machines);
  }
  out << j.dump(1) << '\n';
}

Checkpoint load_checkpoint(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint", std::string("not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw ValidationError("checkpoint.format", "not a netadv checkpoint");
    if (j.at("version") != kVersion) throw ValidationError("checkpoint.version", "unsupported version");
    const auto input_dim = j.at("input_dim").get<std::size_t>();
    const auto num_classes = j.at("num_classes").get<std::size_t>();
    Checkpoint cp;
    cp.class_names = j.at("class_names").get<std::vector<std::string>>();
    cp.norm_fingerprint = j.at("norm_fingerprint").get<std::string>();
    cp.train_config = j.at("train_config");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "mlp") {
      std::vector<DenseLayer> layers;
      for (const auto& layer : j.at("layers")) {
        layers.push_back({matrix_from_json<Eigen::MatrixXd>(layer.at("weights"), "checkpoint.layers"),
                          vector_from_json(layer.at("bias"))});
      }
      cp.model = MlpModel(std::move(layers));
    } else if (kind == "svm") {
      std::vector<MachineInfo> machines;
      for (const auto& m : j.at("machines")) {
        machines.push_back({m.at("support_count").get<std::size_t>(), m.at("iterations").get<std::size_t>(),
                            m.at("kkt_gap").get<double>(), m.at("converged").get<bool>()});
      }
      cp.model = SvmModel(j.at("gamma").get<double>(), j.at("C").get<double>(),
                          matrix_from_json<Matrix>(j.at("support_vectors"), "checkpoint.support_vectors"),
                          matrix_from_json<Eigen::MatrixXd>(j.at("coefficients"), "checkpoint.coefficients"),
                          vector_from_json(j.at("bias")), std::move(machines));
    } else {
      throw ValidationError("checkpoint.kind", "unknown model kind '" + kind + "'");
    }
    const Classifier& clf = as_classifier(cp.model);
    if (clf.input_dim() != input_dim) throw ValidationError("checkpoint.input_dim", "does not match parameters");
    if (clf.num_classes() != num_classes || cp.class_names.size() != num_classes) {
      throw ValidationError("checkpoint.num_classes", "does not match parameters or class names");
    }
    return cp;
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint", e.what());
  }
}

}  // namespace netadv
