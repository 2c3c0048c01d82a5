#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace netadv {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Placeholder for an ARFF "?" token.
struct Missing {
  bool operator==(const Missing&) const = default;
};

using RawValue = std::variant<double, std::string, Missing>;

struct RawRecord {
  std::vector<RawValue> features;
  std::string label;

  bool operator==(const RawRecord&) const = default;
};

enum class AttributeKind { kNumeric, kCategorical };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;
  // Nominal values as declared in the source header (empty for NSL-KDD).
  std::vector<std::string> declared_values;
};

struct Schema {
  std::vector<Attribute> attributes;
  std::vector<std::string> label_vocabulary;
};

// ---------------------------------------------------------------------------
// NSL-KDD

// The 41 NSL-KDD connection features; positions 1-3 are categorical.
const Schema& nslkdd_schema();

// Attack category of an NSL-KDD label: "normal", "dos", "probe", "r2l" or
// "u2r". Throws std::out_of_range for labels outside the vocabulary.
const std::string& nslkdd_category(const std::string& label);

// Labels whose category is "dos".
std::set<std::string> nslkdd_dos_labels();

// One record per nonempty line. Accepts 42 fields (features + label) or 43
// (plus trailing difficulty score, which is discarded). A trailing '.' on the
// label, as in the original KDD'99 files, is stripped.
std::vector<RawRecord> parse_nslkdd(std::istream& in);

struct BinaryFilterResult {
  std::vector<RawRecord> records;
  std::size_t excluded = 0;
};

inline const std::string kNormalClass = "Normal";
inline const std::string kDosClass = "DoS";

// Keeps records whose label is in one of the two sets and relabels them to
// "Normal" / "DoS". Throws std::invalid_argument when the sets overlap.
BinaryFilterResult filter_binary(std::span<const RawRecord> records,
                                 const std::set<std::string>& normal_names,
                                 const std::set<std::string>& dos_names);

// ---------------------------------------------------------------------------
// Moore traffic dataset (ARFF)

struct ArffData {
  std::string relation;
  Schema schema;  // class attribute excluded; its values form label_vocabulary
  std::vector<RawRecord> records;
};

ArffData parse_moore(std::istream& in);

// The ten application classes, in reporting order.
const std::vector<std::string>& moore_classes();

// Maps a raw Moore class token (e.g. "FTP-DATA", "DATABASE") to one of
// moore_classes(). Tokens already naming a class map to themselves.
// Throws std::out_of_range for unknown tokens.
const std::string& moore_category(const std::string& raw_label);

// ---------------------------------------------------------------------------
// Encoded datasets

struct NormParams {
  std::vector<double> min;
  std::vector<double> max;

  bool operator==(const NormParams&) const = default;
};

struct Dataset {
  Matrix matrix;
  std::vector<std::size_t> labels;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::optional<NormParams> norm_params;

  std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix.cols()); }
  std::size_t num_classes() const { return class_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return {matrix.row(static_cast<Eigen::Index>(i)).data(), dim()};
  }

  // Rows in the given order, with labels, names and norm params carried over.
  Dataset subset(std::span<const std::size_t> indices) const;

  // Throws ValidationError when the shape invariants do not hold.
  void validate() const;

  std::vector<std::size_t> class_counts() const;
  std::size_t class_index(const std::string& name) const;
};

// Width the reference IDS preprocessing reports for the Normal/DoS subset.
inline constexpr std::size_t kReferenceIdsWidth = 118;

// One-hot encoder fitted on training records. Each categorical attribute
// expands to one indicator per category seen in training (first-appearance
// order) plus a trailing "<unseen>" indicator; numeric attributes pass through
// with missing values replaced by the training median.
class OneHotEncoder {
 public:
  struct Column {
    std::string name;
    AttributeKind kind = AttributeKind::kNumeric;
    std::vector<std::string> vocabulary;  // categorical only
    double median = 0.0;                  // numeric only
  };

  OneHotEncoder() = default;
  OneHotEncoder(std::vector<Column> columns, std::vector<std::string> class_names);

  static OneHotEncoder fit(const Schema& schema, std::span<const RawRecord> training,
                           std::vector<std::string> class_names);

  Dataset transform(std::span<const RawRecord> records) const;

  std::size_t output_dim() const;
  std::vector<std::string> feature_names() const;
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  std::vector<Column> columns_;
  std::vector<std::string> class_names_;
};

NormParams fit_norm_params(const Dataset& train);

// (v - min) / (max - min), clipped to [0, 1]; constant features map to 0.
// The returned dataset carries `params`.
Dataset normalize(Dataset data, const NormParams& params);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Partition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified partition of sample indices: per class, round(fraction * n_c)
// indices go to train after a seeded shuffle. Both index lists are returned in
// ascending order. Throws ValidationError for a fraction outside (0, 1] and
// when a class has fewer than 2 samples while fraction < 1.
Partition stratified_partition(std::span<const std::size_t> labels, std::size_t num_classes,
                               const SplitSpec& spec);

struct SplitResult {
  Dataset train;
  Dataset test;
  Partition indices;
};

SplitResult split(const Dataset& data, const SplitSpec& spec);

// Columnar CSV: header of feature names followed by "label"; the label column
// holds class names. Values are written in shortest round-trip form.
void write_dataset_csv(std::ostream& out, const Dataset& data);

// Reads a dataset written by write_dataset_csv. Labels are resolved against
// `class_names`; an unknown label is a ParseError.
Dataset read_dataset_csv(std::istream& in, std::vector<std::string> class_names);

}  // namespace netadv
