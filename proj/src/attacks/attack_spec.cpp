#include <algorithm>
#include <cmath>

#include "netadv/attacks.hpp"
#include "netadv/error.hpp"

namespace netadv {
namespace {

using nlohmann::json;

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<Enum, const char*> (&table)[N], const char* field) {
  for (const auto& [value, name] : table) {
    if (s == name) return value;
  }
  std::string allowed;
  for (const auto& [value, name] : table) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  throw ValidationError(field, "unknown value '" + std::string(s) + "' (expected one of: " + allowed + ")");
}

template <typename Enum, std::size_t N>
std::string enum_name(Enum v, const std::pair<Enum, const char*> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::pair<AttackKind, const char*> kKinds[] = {
    {AttackKind::kMiL1, "mi-l1"}, {AttackKind::kFgsm, "fgsm"}, {AttackKind::kBim, "bim"}, {AttackKind::kJsma, "jsma"}};
constexpr std::pair<Knowledge, const char*> kKnowledge[] = {{Knowledge::kWhiteBox, "white-box"},
                                                            {Knowledge::kBlackBoxQuery, "black-box-query"},
                                                            {Knowledge::kBlackBoxZeroQuery, "black-box-zero-query"}};
constexpr std::pair<Phase, const char*> kPhases[] = {{Phase::kEvasion, "evasion"}, {Phase::kPoisoning, "poisoning"}};
constexpr std::pair<Specificity, const char*> kSpecificity[] = {{Specificity::kTargeted, "targeted"},
                                                                {Specificity::kNonTargeted, "non-targeted"}};

json class_or_null(const std::optional<std::size_t>& c, const std::vector<std::string>& names) {
  if (!c) return nullptr;
  return c < names.size() ? json(names[*c]) : json(*c);
}

std::optional<std::size_t> class_from_json(const json& j, const std::vector<std::string>& names,
                                           const char* field) {
  if (j.is_null()) return std::nullopt;
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  const auto name = j.get<std::string>();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError(field, "unknown class '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::string to_string(AttackKind kind) { return enum_name(kind, kKinds); }
std::string to_string(Knowledge knowledge) { return enum_name(knowledge, kKnowledge); }
std::string to_string(Phase phase) { return enum_name(phase, kPhases); }
std::string to_string(Specificity specificity) { return enum_name(specificity, kSpecificity); }

AttackKind parse_attack_kind(std::string_view s) { return parse_enum(s, kKinds, "attack.kind"); }
Knowledge parse_knowledge(std::string_view s) { return parse_enum(s, kKnowledge, "attack.knowledge"); }
Phase parse_phase(std::string_view s) { return parse_enum(s, kPhases, "attack.phase"); }
Specificity parse_specificity(std::string_view s) { return parse_enum(s, kSpecificity, "attack.specificity"); }

void validate(const AttackSpec& spec, std::size_t dim, std::size_t num_classes) {
  if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon)) {
    throw ValidationError("attack.epsilon", "must be a positive finite number");
  }
  if (spec.max_features && (*spec.max_features == 0 || *spec.max_features > dim)) {
    throw ValidationError("attack.max_features", "must lie in [1, " + std::to_string(dim) + "]");
  }
  if (spec.specificity == Specificity::kTargeted && !spec.target_class) {
    throw ValidationError("attack.target", "targeted attacks need a target class");
  }
  if (num_classes > 0) {
    if (spec.target_class && *spec.target_class >= num_classes) {
      throw ValidationError("attack.target", "class index out of range");
    }
    if (spec.source_class && *spec.source_class >= num_classes) {
      throw ValidationError("attack.source", "class index out of range");
    }
  }
  if (spec.source_class && spec.target_class && *spec.source_class == *spec.target_class &&
      spec.specificity == Specificity::kTargeted) {
    throw ValidationError("attack.target", "target class equals the source class");
  }
  if (spec.mi_bins == 0) throw ValidationError("attack.mi_bins", "must be positive");
  if (spec.kind == AttackKind::kBim) {
    if (spec.iterations == 0) throw ValidationError("attack.iterations", "must be at least 1");
    if (!(spec.step_size > 0.0) || spec.step_size > spec.epsilon) {
      throw ValidationError("attack.step_size", "must lie in (0, epsilon]");
    }
  }
  if (spec.kind == AttackKind::kJsma) {
    if (spec.specificity != Specificity::kTargeted) {
      throw ValidationError("attack.specificity", "JSMA is a targeted attack");
    }
    if (!(spec.theta > 0.0)) throw ValidationError("attack.theta", "must be positive");
    if (spec.iterations == 0) throw ValidationError("attack.iterations", "must be at least 1");
  }
}

void require_executable(const AttackSpec& spec) {
  if (spec.knowledge != Knowledge::kWhiteBox) {
    throw UnsupportedAttackError("only white-box attacks are executable, got " + to_string(spec.knowledge));
  }
  if (spec.phase != Phase::kEvasion) {
    throw UnsupportedAttackError("only evasion attacks are executable, got " + to_string(spec.phase));
  }
}

bool attack_succeeded(const AttackSpec& spec, std::size_t source_class, std::size_t predicted) {
  if (spec.specificity == Specificity::kTargeted) return spec.target_class && predicted == *spec.target_class;
  return predicted != source_class;
}

json to_json(const AttackSpec& spec, const std::vector<std::string>& class_names) {
  json j = {{"kind", to_string(spec.kind)},
            {"epsilon", spec.epsilon},
            {"iterations", spec.iterations},
            {"step_size", spec.step_size},
            {"theta", spec.theta},
            {"mi_bins", spec.mi_bins},
            {"knowledge", to_string(spec.knowledge)},
            {"phase", to_string(spec.phase)},
            {"specificity", to_string(spec.specificity)}};
  j["max_features"] = spec.max_features ? json(*spec.max_features) : json(nullptr);
  j["target"] = class_or_null(spec.target_class, class_names);
  j["source"] = class_or_null(spec.source_class, class_names);
  return j;
}

AttackSpec attack_spec_from_json(const json& j, const std::vector<std::string>& class_names) {
  try {
    AttackSpec spec;
    spec.kind = parse_attack_kind(j.at("kind").get<std::string>());
    spec.epsilon = j.at("epsilon").get<double>();
    spec.max_features = j.at("max_features").is_null() ? std::nullopt
                                                       : std::optional(j.at("max_features").get<std::size_t>());
    spec.target_class = class_from_json(j.at("target"), class_names, "attack.target");
    spec.source_class = class_from_json(j.at("source"), class_names, "attack.source");
    spec.iterations = j.at("iterations").get<std::size_t>();
    spec.step_size = j.at("step_size").get<double>();
    spec.theta = j.at("theta").get<double>();
    spec.mi_bins = j.at("mi_bins").get<std::size_t>();
    spec.knowledge = parse_knowledge(j.at("knowledge").get<std::string>());
    spec.phase = parse_phase(j.at("phase").get<std::string>());
    spec.specificity = parse_specificity(j.at("specificity").get<std::string>());
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError("attack", e.what());
  }
}

}  // namespace netadv
