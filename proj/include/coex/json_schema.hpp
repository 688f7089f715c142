#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace coex {

/// Validator for the subset of JSON Schema used by the files in schemas/:
/// type, properties, required, additionalProperties, items, minItems,
/// maxItems, minProperties, minimum, maximum, enum.
class JsonSchema {
 public:
  enum class Mode {
    /// Every keyword is enforced.
    Strict,
    /// Shape and types only: numeric bounds are skipped and "integer" accepts
    /// any number. Used on LLM replies, whose ranges are clamped by coercion
    /// instead of being rejected.
    Structural,
  };

  explicit JsonSchema(nlohmann::json schema);
  static JsonSchema parse(std::string_view text);

  /// Violations as "<json pointer>: <message>"; empty when valid.
  std::vector<std::string> validate(const nlohmann::json& doc, Mode mode = Mode::Strict) const;

  const nlohmann::json& document() const noexcept { return schema_; }

 private:
  nlohmann::json schema_;
};

}  // namespace coex
