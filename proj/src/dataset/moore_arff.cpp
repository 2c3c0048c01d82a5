#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <string>

#include "netadv/dataset.hpp"
#include "netadv/error.hpp"
#include "netadv/text.hpp"

namespace netadv {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string unquote(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

// Comma split that respects single and double quotes.
std::vector<std::string> split_quoted(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  char quote = 0;
  for (char c : line) {
    if (quote) {
      current.push_back(c);
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
      current.push_back(c);
    } else if (c == ',') {
      out.push_back(unquote(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(unquote(current));
  return out;
}

struct Declaration {
  std::string name;
  std::string type;  // lower-cased scalar type, or empty for nominal
  std::vector<std::string> values;
};

Declaration parse_attribute(std::string_view rest, std::size_t line_no) {
  rest = text::trim(rest);
  Declaration decl;
  std::string_view type_part;
  if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
    const auto close = rest.find(rest.front(), 1);
    if (close == std::string_view::npos) throw ParseError(line_no, "unterminated attribute name");
    decl.name = std::string(rest.substr(1, close - 1));
    type_part = text::trim(rest.substr(close + 1));
  } else if (const auto brace = rest.find('{'); brace != std::string_view::npos) {
    decl.name = std::string(text::trim(rest.substr(0, brace)));
    type_part = rest.substr(brace);
  } else {
    // Unquoted names may contain spaces; the type is the final token.
    const auto last_space = rest.find_last_of(" \t");
    if (last_space == std::string_view::npos) throw ParseError(line_no, "attribute without a type");
    decl.name = std::string(text::trim(rest.substr(0, last_space)));
    type_part = text::trim(rest.substr(last_space + 1));
  }
  if (decl.name.empty()) throw ParseError(line_no, "attribute without a name");
  if (!type_part.empty() && type_part.front() == '{') {
    const auto close = type_part.rfind('}');
    if (close == std::string_view::npos) throw ParseError(line_no, "unterminated nominal list");
    for (auto& v : split_quoted(type_part.substr(1, close - 1))) {
      if (!v.empty()) decl.values.push_back(std::move(v));
    }
    return decl;
  }
  decl.type = lower(type_part);
  if (decl.type != "numeric" && decl.type != "real" && decl.type != "integer" &&
      decl.type != "string") {
    throw ParseError(line_no, "unsupported attribute type '" + std::string(type_part) + "'");
  }
  return decl;
}

}  // namespace

const std::vector<std::string>& moore_classes() {
  static const std::vector<std::string> classes = {"WWW", "MAIL",   "BULK",   "SERV",   "DB",
                                                   "INT", "P2P",    "ATTACK", "MMEDIA", "GAMES"};
  return classes;
}

const std::string& moore_category(const std::string& raw_label) {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> t = {
        {"FTP-CONTROL", "BULK"}, {"FTP-PASV", "BULK"},      {"FTP-DATA", "BULK"},
        {"DATABASE", "DB"},      {"SERVICES", "SERV"},      {"INTERACTIVE", "INT"},
        {"MULTIMEDIA", "MMEDIA"},
    };
    for (const auto& c : moore_classes()) t.emplace(c, c);
    return t;
  }();
  return table.at(raw_label);
}

ArffData parse_moore(std::istream& in) {
  ArffData data;
  std::vector<Declaration> decls;
  bool in_data = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '%') continue;

    if (!in_data) {
      if (trimmed.front() != '@') throw ParseError(line_no, "expected a header declaration");
      const auto space = trimmed.find_first_of(" \t");
      const std::string keyword = lower(trimmed.substr(0, space));
      const auto rest = space == std::string_view::npos ? std::string_view{} : trimmed.substr(space);
      if (keyword == "@relation") {
        data.relation = unquote(rest);
      } else if (keyword == "@attribute") {
        decls.push_back(parse_attribute(rest, line_no));
      } else if (keyword == "@data") {
        if (decls.size() < 2) throw ParseError(line_no, "need at least one feature and a class attribute");
        in_data = true;
        for (std::size_t i = 0; i + 1 < decls.size(); ++i) {
          Attribute a;
          a.name = decls[i].name;
          a.kind = decls[i].type == "numeric" || decls[i].type == "real" || decls[i].type == "integer"
                       ? AttributeKind::kNumeric
                       : AttributeKind::kCategorical;
          a.declared_values = decls[i].values;
          data.schema.attributes.push_back(std::move(a));
        }
        data.schema.label_vocabulary = decls.back().values;
      } else {
        throw ParseError(line_no, "unknown declaration '" + std::string(keyword) + "'");
      }
      continue;
    }

    if (trimmed.front() == '{') throw ParseError(line_no, "sparse ARFF rows are not supported");
    const auto fields = split_quoted(trimmed);
    if (fields.size() != decls.size()) {
      throw ParseError(line_no, "expected " + std::to_string(decls.size()) + " values, found " +
                                    std::to_string(fields.size()));
    }
    RawRecord rec;
    rec.features.reserve(decls.size() - 1);
    for (std::size_t i = 0; i + 1 < decls.size(); ++i) {
      const std::string& token = fields[i];
      if (token == "?") {
        rec.features.emplace_back(Missing{});
      } else if (data.schema.attributes[i].kind == AttributeKind::kNumeric) {
        const auto value = text::parse_double(token);
        if (!value) {
          throw ParseError(line_no, "non-numeric value '" + token + "' for attribute '" +
                                        decls[i].name + "'");
        }
        rec.features.emplace_back(*value);
      } else {
        rec.features.emplace_back(token);
      }
    }
    rec.label = fields.back();
    if (rec.label == "?") throw ParseError(line_no, "missing class value");
    const auto& vocab = data.schema.label_vocabulary;
    if (!vocab.empty() && std::find(vocab.begin(), vocab.end(), rec.label) == vocab.end()) {
      throw ParseError(line_no, "class value '" + rec.label + "' is not declared");
    }
    data.records.push_back(std::move(rec));
  }
  if (!in_data) throw ParseError(line_no, "no @data section");
  return data;
}

}  // namespace netadv
