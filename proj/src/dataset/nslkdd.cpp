#include <algorithm>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>

#include "netadv/dataset.hpp"
#include "netadv/error.hpp"
#include "netadv/text.hpp"

namespace netadv {
namespace {

constexpr std::size_t kNslKddFeatures = 41;

const std::map<std::string, std::string>& category_table() {
  // worm is counted with DoS.
  static const std::map<std::string, std::string> table = {
      {"normal", "normal"},
      {"back", "dos"},          {"land", "dos"},
      {"neptune", "dos"},       {"pod", "dos"},
      {"smurf", "dos"},         {"teardrop", "dos"},
      {"apache2", "dos"},       {"udpstorm", "dos"},
      {"processtable", "dos"},  {"mailbomb", "dos"},
      {"worm", "dos"},
      {"ipsweep", "probe"},     {"nmap", "probe"},
      {"portsweep", "probe"},   {"satan", "probe"},
      {"mscan", "probe"},       {"saint", "probe"},
      {"ftp_write", "r2l"},     {"guess_passwd", "r2l"},
      {"imap", "r2l"},          {"multihop", "r2l"},
      {"phf", "r2l"},           {"spy", "r2l"},
      {"warezclient", "r2l"},   {"warezmaster", "r2l"},
      {"named", "r2l"},         {"sendmail", "r2l"},
      {"snmpgetattack", "r2l"}, {"snmpguess", "r2l"},
      {"xlock", "r2l"},         {"xsnoop", "r2l"},
      {"buffer_overflow", "u2r"}, {"loadmodule", "u2r"},
      {"perl", "u2r"},          {"rootkit", "u2r"},
      {"httptunnel", "u2r"},    {"ps", "u2r"},
      {"sqlattack", "u2r"},     {"xterm", "u2r"},
  };
  return table;
}

Schema build_schema() {
  static const char* const names[kNslKddFeatures] = {
      "duration",
      "protocol_type",
      "service",
      "flag",
      "src_bytes",
      "dst_bytes",
      "land",
      "wrong_fragment",
      "urgent",
      "hot",
      "num_failed_logins",
      "logged_in",
      "num_compromised",
      "root_shell",
      "su_attempted",
      "num_root",
      "num_file_creations",
      "num_shells",
      "num_access_files",
      "num_outbound_cmds",
      "is_host_login",
      "is_guest_login",
      "count",
      "srv_count",
      "serror_rate",
      "srv_serror_rate",
      "rerror_rate",
      "srv_rerror_rate",
      "same_srv_rate",
      "diff_srv_rate",
      "srv_diff_host_rate",
      "dst_host_count",
      "dst_host_srv_count",
      "dst_host_same_srv_rate",
      "dst_host_diff_srv_rate",
      "dst_host_same_src_port_rate",
      "dst_host_srv_diff_host_rate",
      "dst_host_serror_rate",
      "dst_host_srv_serror_rate",
      "dst_host_rerror_rate",
      "dst_host_srv_rerror_rate",
  };
  Schema schema;
  for (std::size_t i = 0; i < kNslKddFeatures; ++i) {
    Attribute a;
    a.name = names[i];
    a.kind = (i >= 1 && i <= 3) ? AttributeKind::kCategorical : AttributeKind::kNumeric;
    schema.attributes.push_back(std::move(a));
  }
  for (const auto& [label, _] : category_table()) schema.label_vocabulary.push_back(label);
  return schema;
}

}  // namespace

const Schema& nslkdd_schema() {
  static const Schema schema = build_schema();
  return schema;
}

const std::string& nslkdd_category(const std::string& label) {
  return category_table().at(label);
}

std::set<std::string> nslkdd_dos_labels() {
  std::set<std::string> out;
  for (const auto& [label, category] : category_table()) {
    if (category == "dos") out.insert(label);
  }
  return out;
}

std::vector<RawRecord> parse_nslkdd(std::istream& in) {
  const Schema& schema = nslkdd_schema();
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != kNslKddFeatures + 1 && fields.size() != kNslKddFeatures + 2) {
      throw ParseError(line_no, "expected 42 or 43 fields, found " + std::to_string(fields.size()));
    }
    RawRecord rec;
    rec.features.reserve(kNslKddFeatures);
    for (std::size_t i = 0; i < kNslKddFeatures; ++i) {
      if (schema.attributes[i].kind == AttributeKind::kCategorical) {
        rec.features.emplace_back(std::string(fields[i]));
        continue;
      }
      const auto value = text::parse_double(fields[i]);
      if (!value) {
        throw ParseError(line_no, "non-numeric value '" + std::string(fields[i]) +
                                      "' for " + schema.attributes[i].name);
      }
      rec.features.emplace_back(*value);
    }
    std::string_view label = fields[kNslKddFeatures];
    if (!label.empty() && label.back() == '.') label.remove_suffix(1);
    rec.label = std::string(label);
    if (!category_table().contains(rec.label)) {
      throw ParseError(line_no, "unknown label '" + rec.label + "'");
    }
    if (fields.size() == kNslKddFeatures + 2 && !text::parse_double(fields.back())) {
      throw ParseError(line_no, "non-numeric difficulty field '" + std::string(fields.back()) + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

BinaryFilterResult filter_binary(std::span<const RawRecord> records,
                                 const std::set<std::string>& normal_names,
                                 const std::set<std::string>& dos_names) {
  for (const auto& name : normal_names) {
    if (dos_names.contains(name)) {
      throw std::invalid_argument("label '" + name + "' is in both the Normal and DoS sets");
    }
  }
  BinaryFilterResult result;
  for (const auto& rec : records) {
    if (normal_names.contains(rec.label)) {
      result.records.push_back(rec);
      result.records.back().label = kNormalClass;
    } else if (dos_names.contains(rec.label)) {
      result.records.push_back(rec);
      result.records.back().label = kDosClass;
    } else {
      ++result.excluded;
    }
  }
  return result;
}

}  // namespace netadv
