#include "coex/types.hpp"

#include <string>

namespace coex {

double PolicyKnobs::cap(int channel_id, Stack s) const {
  auto it = duty_caps.find(channel_id);
  if (it == duty_caps.end()) {
    throw std::out_of_range("no duty cap for channel " + std::to_string(channel_id));
  }
  return it->second[s];
}

std::string_view to_string(Stack s) noexcept {
  return s == Stack::WiFi ? "wifi" : "nru";
}

std::string_view to_string(PriorityClass p) noexcept {
  switch (p) {
    case PriorityClass::Emergency: return "emergency";
    case PriorityClass::High: return "high";
    case PriorityClass::Normal: return "normal";
    case PriorityClass::Bulk: return "bulk";
  }
  return "normal";
}

std::string_view to_string(PowerMode m) noexcept {
  switch (m) {
    case PowerMode::Low: return "low";
    case PowerMode::Med: return "med";
    case PowerMode::High: return "high";
  }
  return "med";
}

std::optional<Stack> parse_stack(std::string_view s) noexcept {
  for (Stack v : kStacks) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<PriorityClass> parse_priority(std::string_view s) noexcept {
  for (PriorityClass v : kPriorityClasses) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<PowerMode> parse_power_mode(std::string_view s) noexcept {
  for (PowerMode v : kPowerModes) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

}  // namespace coex
