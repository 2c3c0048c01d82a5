#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "netadv/dataset.hpp"
#include "netadv/error.hpp"
#include "netadv/stats.hpp"
#include "netadv/text.hpp"

namespace netadv {

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.matrix.resize(static_cast<Eigen::Index>(indices.size()), matrix.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.matrix.row(static_cast<Eigen::Index>(r)) = matrix.row(static_cast<Eigen::Index>(indices[r]));
    out.labels.push_back(labels.at(indices[r]));
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.norm_params = norm_params;
  return out;
}

void Dataset::validate() const {
  if (feature_names.size() != dim()) {
    throw ValidationError("feature_names", std::to_string(feature_names.size()) +
                                               " names for " + std::to_string(dim()) + " columns");
  }
  if (labels.size() != rows()) {
    throw ValidationError("labels", std::to_string(labels.size()) + " labels for " +
                                        std::to_string(rows()) + " rows");
  }
  for (std::size_t label : labels) {
    if (label >= num_classes()) {
      throw ValidationError("labels", "label index " + std::to_string(label) + " >= " +
                                          std::to_string(num_classes()) + " classes");
    }
  }
  if (norm_params) {
    if (norm_params->min.size() != dim() || norm_params->max.size() != dim()) {
      throw ValidationError("norm_params", "width does not match the feature count");
    }
    if (rows() > 0 && dim() > 0 && (matrix.minCoeff() < 0.0 || matrix.maxCoeff() > 1.0)) {
      throw ValidationError("matrix", "normalized entries must lie in [0, 1]");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (std::size_t label : labels) ++counts.at(label);
  return counts;
}

std::size_t Dataset::class_index(const std::string& name) const {
  const auto it = std::find(class_names.begin(), class_names.end(), name);
  if (it == class_names.end()) throw ValidationError("class", "unknown class '" + name + "'");
  return static_cast<std::size_t>(it - class_names.begin());
}

// ---------------------------------------------------------------------------
// One-hot encoding

OneHotEncoder::OneHotEncoder(std::vector<Column> columns, std::vector<std::string> class_names)
    : columns_(std::move(columns)), class_names_(std::move(class_names)) {}

OneHotEncoder OneHotEncoder::fit(const Schema& schema, std::span<const RawRecord> training,
                                 std::vector<std::string> class_names) {
  std::vector<Column> columns(schema.attributes.size());
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const Attribute& attr = schema.attributes[a];
    Column& col = columns[a];
    col.name = attr.name;
    col.kind = attr.kind;
    if (attr.kind == AttributeKind::kCategorical) {
      for (const auto& rec : training) {
        const auto* token = std::get_if<std::string>(&rec.features.at(a));
        if (token && std::find(col.vocabulary.begin(), col.vocabulary.end(), *token) ==
                         col.vocabulary.end()) {
          col.vocabulary.push_back(*token);
        }
      }
    } else {
      std::vector<double> seen;
      seen.reserve(training.size());
      for (const auto& rec : training) {
        if (const auto* v = std::get_if<double>(&rec.features.at(a))) seen.push_back(*v);
      }
      col.median = seen.empty() ? 0.0 : median(std::move(seen));
    }
  }
  return OneHotEncoder(std::move(columns), std::move(class_names));
}

std::size_t OneHotEncoder::output_dim() const {
  std::size_t d = 0;
  for (const auto& col : columns_) {
    d += col.kind == AttributeKind::kCategorical ? col.vocabulary.size() + 1 : 1;
  }
  return d;
}

std::vector<std::string> OneHotEncoder::feature_names() const {
  std::vector<std::string> names;
  names.reserve(output_dim());
  for (const auto& col : columns_) {
    if (col.kind == AttributeKind::kNumeric) {
      names.push_back(col.name);
      continue;
    }
    for (const auto& value : col.vocabulary) names.push_back(col.name + "=" + value);
    names.push_back(col.name + "=<unseen>");
  }
  return names;
}

Dataset OneHotEncoder::transform(std::span<const RawRecord> records) const {
  std::vector<std::unordered_map<std::string, std::size_t>> lookup(columns_.size());
  std::vector<std::size_t> offsets(columns_.size());
  std::size_t offset = 0;
  for (std::size_t a = 0; a < columns_.size(); ++a) {
    offsets[a] = offset;
    const auto& col = columns_[a];
    if (col.kind == AttributeKind::kCategorical) {
      for (std::size_t v = 0; v < col.vocabulary.size(); ++v) lookup[a].emplace(col.vocabulary[v], v);
      offset += col.vocabulary.size() + 1;
    } else {
      offset += 1;
    }
  }
  std::unordered_map<std::string, std::size_t> class_lookup;
  for (std::size_t c = 0; c < class_names_.size(); ++c) class_lookup.emplace(class_names_[c], c);

  Dataset out;
  out.matrix = Matrix::Zero(static_cast<Eigen::Index>(records.size()),
                            static_cast<Eigen::Index>(offset));
  out.labels.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const RawRecord& rec = records[r];
    if (rec.features.size() != columns_.size()) {
      throw ValidationError("record", "row " + std::to_string(r) + " has " +
                                          std::to_string(rec.features.size()) + " values, schema has " +
                                          std::to_string(columns_.size()));
    }
    auto row = out.matrix.row(static_cast<Eigen::Index>(r));
    for (std::size_t a = 0; a < columns_.size(); ++a) {
      const auto& col = columns_[a];
      const auto& value = rec.features[a];
      const auto base = static_cast<Eigen::Index>(offsets[a]);
      if (col.kind == AttributeKind::kNumeric) {
        if (const auto* v = std::get_if<double>(&value)) {
          row(base) = *v;
        } else if (std::holds_alternative<Missing>(value)) {
          row(base) = col.median;
        } else {
          throw ValidationError(col.name, "categorical token in a numeric column");
        }
        continue;
      }
      std::size_t slot = col.vocabulary.size();  // unseen
      std::string token;
      if (const auto* s = std::get_if<std::string>(&value)) {
        token = *s;
      } else if (const auto* v = std::get_if<double>(&value)) {
        token = text::format_double(*v);
      }
      if (!std::holds_alternative<Missing>(value)) {
        if (const auto it = lookup[a].find(token); it != lookup[a].end()) slot = it->second;
      }
      row(base + static_cast<Eigen::Index>(slot)) = 1.0;
    }
    const auto it = class_lookup.find(rec.label);
    if (it == class_lookup.end()) {
      throw ValidationError("label", "row " + std::to_string(r) + " has unknown class '" + rec.label + "'");
    }
    out.labels.push_back(it->second);
  }
  out.feature_names = feature_names();
  out.class_names = class_names_;
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

NormParams fit_norm_params(const Dataset& train) {
  NormParams params;
  params.min.assign(train.dim(), 0.0);
  params.max.assign(train.dim(), 0.0);
  if (train.rows() == 0) return params;
  for (std::size_t j = 0; j < train.dim(); ++j) {
    const auto col = train.matrix.col(static_cast<Eigen::Index>(j));
    params.min[j] = col.minCoeff();
    params.max[j] = col.maxCoeff();
  }
  return params;
}

Dataset normalize(Dataset data, const NormParams& params) {
  if (params.min.size() != data.dim() || params.max.size() != data.dim()) {
    throw DimensionError(data.dim(), params.min.size());
  }
  for (std::size_t j = 0; j < data.dim(); ++j) {
    const double lo = params.min[j];
    const double range = params.max[j] - lo;
    auto col = data.matrix.col(static_cast<Eigen::Index>(j));
    if (!(range > 0.0)) {
      col.setZero();
      continue;
    }
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      col(i) = std::clamp((col(i) - lo) / range, 0.0, 1.0);
    }
  }
  data.norm_params = params;
  return data;
}

// ---------------------------------------------------------------------------
// Splitting

Partition stratified_partition(std::span<const std::size_t> labels, std::size_t num_classes,
                               const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw ValidationError("split.train_fraction", "must lie in (0, 1]");
  }
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw ValidationError("labels", "label index out of range");
    by_class[labels[i]].push_back(i);
  }
  std::mt19937_64 rng(spec.seed);
  Partition part;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (spec.train_fraction < 1.0 && members.size() < 2) {
      throw ValidationError("split", "class " + std::to_string(c) + " has fewer than 2 samples");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(members.size())));
    part.train.insert(part.train.end(), members.begin(),
                      members.begin() + static_cast<std::ptrdiff_t>(n_train));
    part.test.insert(part.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                     members.end());
  }
  std::sort(part.train.begin(), part.train.end());
  std::sort(part.test.begin(), part.test.end());
  return part;
}

SplitResult split(const Dataset& data, const SplitSpec& spec) {
  SplitResult result;
  result.indices = stratified_partition(data.labels, data.num_classes(), spec);
  result.train = data.subset(result.indices.train);
  result.test = data.subset(result.indices.test);
  return result;
}

// ---------------------------------------------------------------------------
// CSV persistence

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (const auto& name : data.feature_names) out << text::csv_escape(name) << ',';
  out << "label\n";
  std::string line;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    line.clear();
    for (double v : data.row(i)) {
      line += text::format_double(v);
      line += ',';
    }
    line += text::csv_escape(data.class_names.at(data.labels[i]));
    line += '\n';
    out << line;
  }
}

Dataset read_dataset_csv(std::istream& in, std::vector<std::string> class_names) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  auto header = text::split_csv(line);
  if (header.empty() || header.back() != "label") throw ParseError(1, "last column must be 'label'");
  header.pop_back();

  Dataset out;
  out.feature_names = std::move(header);
  out.class_names = std::move(class_names);
  std::unordered_map<std::string, std::size_t> class_lookup;
  for (std::size_t c = 0; c < out.class_names.size(); ++c) class_lookup.emplace(out.class_names[c], c);

  const std::size_t d = out.feature_names.size();
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split_csv(line);
    if (fields.size() != d + 1) {
      throw ParseError(line_no, "expected " + std::to_string(d + 1) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = text::parse_double(fields[j]);
      if (!v) throw ParseError(line_no, "non-numeric value '" + fields[j] + "'");
      values.push_back(*v);
    }
    const auto it = class_lookup.find(fields.back());
    if (it == class_lookup.end()) throw ParseError(line_no, "unknown class '" + fields.back() + "'");
    out.labels.push_back(it->second);
  }
  out.matrix = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(out.labels.size()),
                                  static_cast<Eigen::Index>(d));
  return out;
}

}  // namespace netadv
