#pragma once

// Canonical run artifacts: run.jsonl (one EpochRecord per line), run.csv
// (flat columns) and manifest.json, plus readers and the compare summary.
//
// CSV columns, in order:
//   epoch, policy_source, alpha, served_bits, energy_j, sla_hit_rate,
//   sla_hit_rate_backlogged, cum_bits, cum_energy_j, cum_bits_per_joule,
//   cap_c<id>_wifi, cap_c<id>_nru (per channel, ascending id),
//   w_emergency, w_high, w_normal, w_bulk, fault, rationale
// Reals use 17 significant digits. fault/rationale are empty when absent
// and double-quoted otherwise.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coex/json_schema.hpp"
#include "coex/runner.hpp"

namespace coex {

inline constexpr const char* kEpochRecordSchemaVersion = "1";
inline constexpr const char* kStateSchemaVersion = "1";
inline constexpr const char* kPolicySchemaVersion = "1";

struct RunManifest {
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  PolicyMode policy_mode = PolicyMode::Rule;
  std::optional<LlmEndpointConfig> endpoint;
  std::string started_at;
  std::string finished_at;
  std::string code_version;
};

RunManifest make_manifest(const SimConfig& cfg, PolicyMode mode, const std::optional<LlmEndpointConfig>& endpoint);
nlohmann::ordered_json to_json(const RunManifest& m);
/// Current UTC time as ISO-8601 with a trailing Z.
std::string utc_timestamp();
std::string code_version();

class LogIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed log content; the message names the file and line.
class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json to_json(const EpochRecord& r);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

const JsonSchema& epoch_record_schema();

std::vector<std::string> csv_header(const std::vector<EpochRecord>& records);
std::string csv_row(const EpochRecord& r);

struct LogPaths {
  std::filesystem::path jsonl;
  std::filesystem::path csv;
  std::filesystem::path manifest;
};

LogPaths write_logs(const std::vector<EpochRecord>& records, const RunManifest& manifest,
                    const std::filesystem::path& out_dir);

/// Reads run.jsonl, validating each line against the epoch record schema and
/// re-checking that cum_* fields are prefix sums of the per-epoch values.
std::vector<EpochRecord> read_run_jsonl(const std::filesystem::path& path);
std::vector<EpochRecord> read_run_csv(const std::filesystem::path& path);

/// Exact prefix-sum check; returns a message for the first mismatch.
std::optional<std::string> check_cumulative(const std::vector<EpochRecord>& records);

struct RunSummary {
  std::string label;
  double final_cum_bits = 0.0;
  double final_cum_energy_j = 0.0;
  double final_bits_per_joule = 0.0;
  double mean_sla_hit_rate = 0.0;
  std::size_t epochs = 0;
};

RunSummary summarize(const std::vector<EpochRecord>& records, std::string label);
/// Relative change in percent, formatted like "+3.5%" or "-35.3%".
std::string format_delta(double value, double baseline);
/// Summary table; the first run is the baseline for the delta columns.
std::string format_compare_table(const std::vector<RunSummary>& runs);

}  // namespace coex
