#include <istream>
#include <ostream>
#include <string>

#include "netadv/attacks.hpp"
#include "netadv/error.hpp"
#include "netadv/text.hpp"

namespace netadv {
namespace {

constexpr std::size_t kFixedColumns = 7;

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += fmt(values[i]);
  }
  return out;
}

std::size_t parse_index(const std::string& s, std::size_t line) {
  const auto v = text::parse_double(s);
  if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
    throw ParseError(line, "expected a row index, found '" + s + "'");
  }
  return static_cast<std::size_t>(*v);
}

}  // namespace

void write_examples_csv(std::ostream& out, const std::vector<AdversarialExample>& examples, const Dataset& source) {
  out << "source_index,source_class,predicted_before,predicted_after,succeeded,support,delta";
  for (const auto& name : source.feature_names) out << ',' << text::csv_escape(name);
  out << '\n';
  std::string line;
  for (const auto& ex : examples) {
    line = std::to_string(ex.source_index);
    line += ',' + text::csv_escape(source.class_names.at(ex.source_class));
    line += ',' + text::csv_escape(source.class_names.at(ex.predicted_before));
    line += ',' + text::csv_escape(source.class_names.at(ex.predicted_after));
    line += ex.succeeded ? ",1" : ",0";
    line += ',' + join(ex.delta_indices, [](std::size_t i) { return std::to_string(i); });
    line += ',' + join(ex.delta_values, [](double v) { return text::format_double(v); });
    for (double v : ex.perturbed) line += ',' + text::format_double(v);
    line += '\n';
    out << line;
  }
}

std::vector<AdversarialExample> read_examples_csv(std::istream& in, const Dataset& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = text::split_csv(line);
  const std::size_t d = source.dim();
  if (header.size() != kFixedColumns + d) {
    throw ParseError(1, "expected " + std::to_string(kFixedColumns + d) + " columns, found " +
                            std::to_string(header.size()));
  }
  std::vector<AdversarialExample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv(line);
    if (f.size() != kFixedColumns + d) throw ParseError(line_no, "wrong field count");
    AdversarialExample ex;
    ex.source_index = parse_index(f[0], line_no);
    if (ex.source_index >= source.rows()) throw ParseError(line_no, "source index out of range");
    try {
      ex.source_class = source.class_index(f[1]);
      ex.predicted_before = source.class_index(f[2]);
      ex.predicted_after = source.class_index(f[3]);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (f[4] != "0" && f[4] != "1") throw ParseError(line_no, "succeeded must be 0 or 1");
    ex.succeeded = f[4] == "1";
    if (!f[5].empty()) {
      for (auto tok : text::split(f[5], ';')) ex.delta_indices.push_back(parse_index(std::string(tok), line_no));
    }
    if (!f[6].empty()) {
      for (auto tok : text::split(f[6], ';')) {
        const auto v = text::parse_double(tok);
        if (!v) throw ParseError(line_no, "non-numeric delta value");
        ex.delta_values.push_back(*v);
      }
    }
    if (ex.delta_indices.size() != ex.delta_values.size()) {
      throw ParseError(line_no, "support and delta lists differ in length");
    }
    const auto x = source.row(ex.source_index);
    ex.original.assign(x.begin(), x.end());
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = text::parse_double(f[kFixedColumns + j]);
      if (!v) throw ParseError(line_no, "non-numeric feature value");
      ex.perturbed.push_back(*v);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace netadv
