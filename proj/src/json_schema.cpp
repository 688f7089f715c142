#include "coex/json_schema.hpp"

#include <cmath>

namespace coex {
namespace {

using json = nlohmann::json;
using Mode = JsonSchema::Mode;

bool matches_type(const json& v, const std::string& type, Mode mode) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return mode == Mode::Structural || (std::isfinite(d) && std::floor(d) == d);
  }
  return false;
}

void check(const json& schema, const json& v, const std::string& path, Mode mode, std::vector<std::string>& errs) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) errs.push_back(path + ": no value allowed here");
    return;
  }
  if (!schema.is_object()) return;

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = matches_type(v, it->get<std::string>(), mode);
    } else if (it->is_array()) {
      for (const auto& t : *it) ok = ok || matches_type(v, t.get<std::string>(), mode);
    }
    if (!ok) {
      errs.push_back(path + ": expected type " + it->dump() + ", got " + v.type_name());
      return;
    }
  }

  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& option : *it) found = found || option == v;
    if (!found) errs.push_back(path + ": value " + v.dump() + " not in enum " + it->dump());
  }

  if (v.is_number() && mode == Mode::Strict) {
    const double d = v.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && d < it->get<double>()) {
      errs.push_back(path + ": " + v.dump() + " below minimum " + it->dump());
    }
    if (auto it = schema.find("maximum"); it != schema.end() && d > it->get<double>()) {
      errs.push_back(path + ": " + v.dump() + " above maximum " + it->dump());
    }
  }

  if (v.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        if (!v.contains(key.get<std::string>())) errs.push_back(path + ": missing required key \"" + key.get<std::string>() + "\"");
      }
    }
    if (auto it = schema.find("minProperties"); it != schema.end() && v.size() < it->get<std::size_t>()) {
      errs.push_back(path + ": fewer than " + it->dump() + " properties");
    }
    const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
    const json* extra = schema.contains("additionalProperties") ? &schema["additionalProperties"] : nullptr;
    for (const auto& [key, value] : v.items()) {
      const std::string child = path + "/" + key;
      if (props && props->contains(key)) {
        check((*props)[key], value, child, mode, errs);
      } else if (extra) {
        check(*extra, value, child, mode, errs);
      }
    }
  }

  if (v.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>()) {
      errs.push_back(path + ": fewer than " + it->dump() + " items");
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>()) {
      errs.push_back(path + ": more than " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) check(*it, v[i], path + "/" + std::to_string(i), mode, errs);
    }
  }
}

}  // namespace

JsonSchema::JsonSchema(nlohmann::json schema) : schema_(std::move(schema)) {}

JsonSchema JsonSchema::parse(std::string_view text) {
  return JsonSchema(nlohmann::json::parse(text));
}

std::vector<std::string> JsonSchema::validate(const nlohmann::json& doc, Mode mode) const {
  std::vector<std::string> errs;
  check(schema_, doc, "", mode, errs);
  for (auto& e : errs) {
    if (e.starts_with(":")) e = "/" + e;
  }
  return errs;
}

}  // namespace coex
