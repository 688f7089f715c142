#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coex {

enum class Stack { WiFi = 0, NrU = 1 };
inline constexpr std::array<Stack, 2> kStacks{Stack::WiFi, Stack::NrU};

/// Declaration order is the priority order: Emergency ranks highest.
enum class PriorityClass { Emergency = 0, High = 1, Normal = 2, Bulk = 3 };
inline constexpr std::array<PriorityClass, 4> kPriorityClasses{
    PriorityClass::Emergency, PriorityClass::High, PriorityClass::Normal, PriorityClass::Bulk};

enum class PowerMode { Low = 0, Med = 1, High = 2 };
inline constexpr std::array<PowerMode, 3> kPowerModes{PowerMode::Low, PowerMode::Med, PowerMode::High};

/// True when `a` outranks `b`.
constexpr bool outranks(PriorityClass a, PriorityClass b) noexcept {
  return static_cast<int>(a) < static_cast<int>(b);
}

/// Fixed-size table indexed by an enum; the enum values are dense from zero.
template <typename Enum, std::size_t N, typename T>
struct EnumTable {
  std::array<T, N> values{};

  constexpr T& operator[](Enum e) noexcept { return values[static_cast<std::size_t>(e)]; }
  constexpr const T& operator[](Enum e) const noexcept { return values[static_cast<std::size_t>(e)]; }
  friend constexpr bool operator==(const EnumTable&, const EnumTable&) = default;
};

template <typename T>
using PerStack = EnumTable<Stack, 2, T>;
template <typename T>
using PerClass = EnumTable<PriorityClass, 4, T>;
template <typename T>
using PerPowerMode = EnumTable<PowerMode, 3, T>;

struct UserState {
  int id = 0;
  Stack stack = Stack::WiFi;
  int cqi = 0;                      // 0..15
  double battery = 1.0;             // [0,1]
  double backlog_bits = 0.0;        // >= 0
  double latency_target_ms = 100.0; // > 0
  PriorityClass priority = PriorityClass::Normal;
  PowerMode power_mode = PowerMode::Med;

  friend bool operator==(const UserState&, const UserState&) = default;
};

struct ChannelState {
  int id = 0;
  double bandwidth_hz = 160e6;
  PerStack<double> busy{};
  PerStack<double> lbt_fail_base{};

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

/// The epoch control triple handed from the policy layer to the optimizer.
struct PolicyKnobs {
  int alpha = 0;
  std::map<int, PerStack<double>> duty_caps;  // keyed by channel id
  PerClass<double> class_weights{};

  double cap(int channel_id, Stack s) const;

  friend bool operator==(const PolicyKnobs&, const PolicyKnobs&) = default;
};

inline constexpr double kMinClassWeight = 0.1;
inline constexpr double kMaxClassWeight = 10.0;

std::string_view to_string(Stack s) noexcept;
std::string_view to_string(PriorityClass p) noexcept;
std::string_view to_string(PowerMode m) noexcept;

// Parsers accept the lowercase wire names ("wifi", "nru", "emergency", "med", ...).
std::optional<Stack> parse_stack(std::string_view s) noexcept;
std::optional<PriorityClass> parse_priority(std::string_view s) noexcept;
std::optional<PowerMode> parse_power_mode(std::string_view s) noexcept;

}  // namespace coex
