#include "coex/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coex/rng.hpp"

namespace coex {
namespace {

// Stream tag separating scenario generation from the run's own RNG stream.
constexpr std::uint64_t kScenarioStream = 0x5ce7a210;

template <typename T, std::size_t N>
T weighted_pick(SeededRng& rng, const std::array<T, N>& items, const std::array<double, N>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < weights[i]) return items[i];
    u -= weights[i];
  }
  return items[N - 1];
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

double SimConfig::mean_arrival_bits() const {
  if (users.empty()) return 0.0;
  return offered_load_bps * epoch_seconds / static_cast<double>(users.size());
}

SimConfig default_scenario(double load_bps, std::uint64_t seed) {
  SimConfig cfg;
  cfg.offered_load_bps = load_bps;
  cfg.seed = seed;

  SeededRng rng(seed, kScenarioStream);

  for (int c = 0; c < 2; ++c) {
    ChannelState ch;
    ch.id = c;
    ch.bandwidth_hz = 160e6;
    for (Stack s : kStacks) ch.busy[s] = rng.uniform(0.2, 0.5);
    for (Stack s : kStacks) ch.lbt_fail_base[s] = rng.uniform(0.02, 0.10);
    cfg.channels.push_back(ch);
  }

  constexpr int kWifiUsers = 16;
  constexpr int kNruUsers = 12;
  const double mean_arrival = load_bps * cfg.epoch_seconds / (kWifiUsers + kNruUsers);
  constexpr std::array<double, 4> kLatencies{20.0, 50.0, 100.0, 500.0};
  constexpr std::array<double, 4> kLatencyWeights{0.15, 0.25, 0.40, 0.20};
  constexpr std::array<double, 4> kPriorityWeights{0.05, 0.20, 0.55, 0.20};

  for (int i = 0; i < kWifiUsers + kNruUsers; ++i) {
    UserState u;
    u.id = i;
    u.stack = i < kWifiUsers ? Stack::WiFi : Stack::NrU;
    u.cqi = rng.uniform_int(3, 15);
    u.battery = rng.uniform(0.15, 1.0);
    u.backlog_bits = rng.uniform(0.5, 4.0) * mean_arrival;
    u.latency_target_ms = weighted_pick(rng, kLatencies, kLatencyWeights);
    u.priority = weighted_pick(rng, kPriorityClasses, kPriorityWeights);
    u.power_mode = kPowerModes[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    cfg.users.push_back(u);
  }
  return cfg;
}

std::vector<ConfigViolation> validate_config(const SimConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto add = [&out](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };

  if (!(cfg.epoch_seconds > 0.0)) add("epoch_seconds", "epoch_seconds must be > 0");
  if (cfg.num_epochs <= 0) add("num_epochs", "num_epochs must be a positive integer");
  if (!(cfg.offered_load_bps >= 0.0)) add("offered_load_bps", "offered_load_bps must be >= 0");
  if (!(cfg.arrival_cv >= 0.0)) add("arrival_cv", "arrival_cv must be >= 0");
  if (!(cfg.jitter_sigma_busy >= 0.0)) add("jitter_sigma_busy", "jitter_sigma_busy must be >= 0");
  if (!(cfg.jitter_sigma_fail >= 0.0)) add("jitter_sigma_fail", "jitter_sigma_fail must be >= 0");
  if (!(cfg.headroom_gamma > 0.0 && cfg.headroom_gamma < 1.0)) {
    add("headroom_gamma", "headroom_gamma out of (0,1)");
  }
  if (!(cfg.probe_duty > 0.0 && cfg.probe_duty <= 1.0)) add("probe_duty", "probe_duty out of (0,1]");
  if (!(cfg.epsilon_served > 0.0)) add("epsilon_served", "epsilon_served must be > 0");

  if (cfg.channels.empty()) add("channels", "at least one channel is required");
  std::set<int> channel_ids;
  for (std::size_t k = 0; k < cfg.channels.size(); ++k) {
    const auto& c = cfg.channels[k];
    const std::string base = "channels[" + std::to_string(k) + "]";
    if (!channel_ids.insert(c.id).second) add(base + ".id", "duplicate channel id " + std::to_string(c.id));
    if (!(c.bandwidth_hz > 0.0)) add(base + ".bandwidth_hz", "bandwidth_hz must be > 0");
    for (Stack s : kStacks) {
      const std::string sn(to_string(s));
      if (!in_unit(c.busy[s])) add(base + ".busy." + sn, "busy fraction out of [0,1]");
      if (!in_unit(c.lbt_fail_base[s])) add(base + ".lbt_fail_base." + sn, "lbt_fail_base out of [0,1]");
    }
  }

  std::set<int> user_ids;
  for (std::size_t k = 0; k < cfg.users.size(); ++k) {
    const auto& u = cfg.users[k];
    const std::string base = "users[" + std::to_string(k) + "]";
    const std::string who = " (user id " + std::to_string(u.id) + ")";
    if (!user_ids.insert(u.id).second) add(base + ".id", "duplicate user id" + who);
    if (u.cqi < 0 || u.cqi > 15) add(base + ".cqi", "cqi out of {0..15}" + who);
    if (!in_unit(u.battery)) add(base + ".battery", "battery out of [0,1]" + who);
    if (!(u.backlog_bits >= 0.0)) add(base + ".backlog_bits", "backlog_bits must be >= 0" + who);
    if (!(u.latency_target_ms > 0.0)) add(base + ".latency_target_ms", "latency_target_ms must be > 0" + who);
  }

  const auto& se = cfg.se_table.se_by_cqi;
  if (se[0] != 0.0) add("se_table[0]", "se_table[0] must be 0");
  for (std::size_t q = 1; q < se.size(); ++q) {
    if (!(se[q] >= se[q - 1])) add("se_table[" + std::to_string(q) + "]", "se_table must be nondecreasing");
  }
  for (PowerMode m : kPowerModes) {
    const std::string mn(to_string(m));
    if (!(cfg.power_profile.tx_power_w[m] > 0.0)) add("power_profile.tx_power_w." + mn, "tx power must be > 0");
    if (!(cfg.power_profile.se_scale[m] > 0.0)) add("power_profile.se_scale." + mn, "se_scale must be > 0");
  }
  const auto& eta = cfg.power_profile.se_scale;
  if (!(eta[PowerMode::High] >= eta[PowerMode::Med] && eta[PowerMode::Med] >= eta[PowerMode::Low])) {
    add("power_profile.se_scale", "se_scale must be nondecreasing low <= med <= high");
  }
  return out;
}

std::string format_violation(const ConfigViolation& v) {
  return v.field + ": " + v.message;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const ChannelState& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["busy"] = {{"wifi", c.busy[Stack::WiFi]}, {"nru", c.busy[Stack::NrU]}};
  j["lbt_fail_base"] = {{"wifi", c.lbt_fail_base[Stack::WiFi]}, {"nru", c.lbt_fail_base[Stack::NrU]}};
  return j;
}

nlohmann::ordered_json to_json(const UserState& u) {
  nlohmann::ordered_json j;
  j["id"] = u.id;
  j["stack"] = to_string(u.stack);
  j["cqi"] = u.cqi;
  j["battery"] = u.battery;
  j["backlog_bits"] = u.backlog_bits;
  j["latency_target_ms"] = u.latency_target_ms;
  j["priority"] = to_string(u.priority);
  j["power_mode"] = to_string(u.power_mode);
  return j;
}

nlohmann::ordered_json to_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["epoch_seconds"] = cfg.epoch_seconds;
  j["num_epochs"] = cfg.num_epochs;
  j["seed"] = cfg.seed;
  j["offered_load_bps"] = cfg.offered_load_bps;
  j["arrival_cv"] = cfg.arrival_cv;
  j["jitter_sigma_busy"] = cfg.jitter_sigma_busy;
  j["jitter_sigma_fail"] = cfg.jitter_sigma_fail;
  j["headroom_gamma"] = cfg.headroom_gamma;
  j["probe_duty"] = cfg.probe_duty;
  j["epsilon_served"] = cfg.epsilon_served;
  j["channels"] = nlohmann::ordered_json::array();
  for (const auto& c : cfg.channels) j["channels"].push_back(to_json(c));
  j["users"] = nlohmann::ordered_json::array();
  for (const auto& u : cfg.users) j["users"].push_back(to_json(u));
  j["se_table"] = cfg.se_table.se_by_cqi;
  nlohmann::ordered_json pp;
  for (PowerMode m : kPowerModes) pp["tx_power_w"][std::string(to_string(m))] = cfg.power_profile.tx_power_w[m];
  for (PowerMode m : kPowerModes) pp["se_scale"][std::string(to_string(m))] = cfg.power_profile.se_scale[m];
  j["power_profile"] = pp;
  return j;
}

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

PerStack<double> read_per_stack(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object with wifi/nru keys");
  PerStack<double> out{};
  for (Stack s : kStacks) out[s] = get_field<double>(j, std::string(to_string(s)), where);
  return out;
}

template <typename Enum, typename Parser>
Enum read_enum(const nlohmann::json& j, const char* key, const std::string& where, Parser parse) {
  const auto text = get_field<std::string>(j, key, where);
  if (auto v = parse(text)) return *v;
  throw ConfigError(where + "." + key + ": unknown value \"" + text + "\"");
}

}  // namespace

SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config document must be a JSON object");
  SimConfig cfg;
  read_opt(j, "epoch_seconds", cfg.epoch_seconds);
  read_opt(j, "num_epochs", cfg.num_epochs);
  read_opt(j, "seed", cfg.seed);
  read_opt(j, "offered_load_bps", cfg.offered_load_bps);
  read_opt(j, "arrival_cv", cfg.arrival_cv);
  read_opt(j, "jitter_sigma_busy", cfg.jitter_sigma_busy);
  read_opt(j, "jitter_sigma_fail", cfg.jitter_sigma_fail);
  read_opt(j, "headroom_gamma", cfg.headroom_gamma);
  read_opt(j, "probe_duty", cfg.probe_duty);
  read_opt(j, "epsilon_served", cfg.epsilon_served);

  if (!j.contains("channels") || !j["channels"].is_array()) throw ConfigError("channels: required array");
  if (!j.contains("users") || !j["users"].is_array()) throw ConfigError("users: required array");

  for (std::size_t k = 0; k < j["channels"].size(); ++k) {
    const auto& jc = j["channels"][k];
    const std::string where = "channels[" + std::to_string(k) + "]";
    ChannelState c;
    c.id = get_field<int>(jc, "id", where);
    c.bandwidth_hz = get_field<double>(jc, "bandwidth_hz", where);
    if (!jc.contains("busy") || !jc.contains("lbt_fail_base")) {
      throw ConfigError(where + ": busy and lbt_fail_base are required");
    }
    c.busy = read_per_stack(jc["busy"], where + ".busy");
    c.lbt_fail_base = read_per_stack(jc["lbt_fail_base"], where + ".lbt_fail_base");
    cfg.channels.push_back(c);
  }

  for (std::size_t k = 0; k < j["users"].size(); ++k) {
    const auto& ju = j["users"][k];
    const std::string where = "users[" + std::to_string(k) + "]";
    UserState u;
    u.id = get_field<int>(ju, "id", where);
    u.stack = read_enum<Stack>(ju, "stack", where, parse_stack);
    u.cqi = get_field<int>(ju, "cqi", where);
    u.battery = get_field<double>(ju, "battery", where);
    u.backlog_bits = get_field<double>(ju, "backlog_bits", where);
    u.latency_target_ms = get_field<double>(ju, "latency_target_ms", where);
    u.priority = read_enum<PriorityClass>(ju, "priority", where, parse_priority);
    u.power_mode = read_enum<PowerMode>(ju, "power_mode", where, parse_power_mode);
    cfg.users.push_back(u);
  }

  if (j.contains("se_table")) {
    const auto& t = j["se_table"];
    if (!t.is_array() || t.size() != 16) throw ConfigError("se_table: expected an array of 16 numbers");
    for (std::size_t q = 0; q < 16; ++q) {
      if (!t[q].is_number()) throw ConfigError("se_table[" + std::to_string(q) + "]: expected a number");
      cfg.se_table.se_by_cqi[q] = t[q].get<double>();
    }
  }
  if (j.contains("power_profile")) {
    const auto& pp = j["power_profile"];
    for (const char* table : {"tx_power_w", "se_scale"}) {
      if (!pp.contains(table)) continue;
      auto& dst = std::string_view(table) == "tx_power_w" ? cfg.power_profile.tx_power_w
                                                          : cfg.power_profile.se_scale;
      for (PowerMode m : kPowerModes) {
        const std::string mn(to_string(m));
        if (pp[table].contains(mn)) dst[m] = get_field<double>(pp[table], mn, std::string("power_profile.") + table);
      }
    }
  }
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return sim_config_from_json(j);
}

}  // namespace coex
