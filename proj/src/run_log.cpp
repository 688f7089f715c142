#include "coex/run_log.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "coex/embedded_resources.hpp"

#ifndef COEX_VERSION
#define COEX_VERSION "unknown"
#endif

namespace coex {
namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

struct CsvField {
  std::string text;
  bool quoted = false;
};

// Splits CSV text into records; quoted fields may contain commas, quotes and
// newlines. Tracks the 1-based line on which each record starts.
std::vector<std::pair<std::size_t, std::vector<CsvField>>> parse_csv(const std::string& text,
                                                                     const std::string& where) {
  std::vector<std::pair<std::size_t, std::vector<CsvField>>> rows;
  std::vector<CsvField> row;
  CsvField field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field = CsvField{};
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.emplace_back(row_line, std::move(row));
    row.clear();
    row_line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.text += ch;
      }
      continue;
    }
    if (ch == '"') {
      if (field_started) throw LogFormatError(where + ":" + std::to_string(line) + ": stray quote inside field");
      in_quotes = true;
      field.quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      ++line;
      end_row();
    } else if (ch != '\r') {
      field.text += ch;
      field_started = true;
    }
  }
  if (in_quotes) throw LogFormatError(where + ":" + std::to_string(line) + ": unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

double parse_real(const CsvField& f, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(f.text.c_str(), &end);
  if (f.text.empty() || *end != '\0') throw LogFormatError(where + ": expected a number, got \"" + f.text + "\"");
  return v;
}

int parse_int(const CsvField& f, const std::string& where) {
  const double v = parse_real(f, where);
  if (std::floor(v) != v) throw LogFormatError(where + ": expected an integer, got \"" + f.text + "\"");
  return static_cast<int>(v);
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string code_version() { return COEX_VERSION; }

RunManifest make_manifest(const SimConfig& cfg, PolicyMode mode, const std::optional<LlmEndpointConfig>& endpoint) {
  RunManifest m;
  m.config = to_json(cfg);
  m.seed = cfg.seed;
  m.policy_mode = mode;
  m.endpoint = endpoint;
  m.code_version = code_version();
  return m;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["policy_mode"] = to_string(m.policy_mode);
  j["code_version"] = m.code_version;
  j["schema_versions"] = {{"epoch_record", kEpochRecordSchemaVersion},
                          {"state", kStateSchemaVersion},
                          {"policy", kPolicySchemaVersion}};
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["endpoint"] = m.endpoint ? to_json(*m.endpoint) : nlohmann::ordered_json(nullptr);
  j["config"] = m.config;
  return j;
}

nlohmann::ordered_json to_json(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["policy_source"] = to_string(r.policy_source);
  j["alpha"] = r.alpha;
  j["served_bits"] = r.served_bits;
  j["energy_j"] = r.energy_j;
  j["sla_hit_rate"] = r.sla_hit_rate;
  j["sla_hit_rate_backlogged"] = r.sla_hit_rate_backlogged;
  j["cum_bits"] = r.cum_bits;
  j["cum_energy_j"] = r.cum_energy_j;
  j["cum_bits_per_joule"] = r.cum_bits_per_joule;
  nlohmann::ordered_json caps = nlohmann::ordered_json::object();
  for (const auto& [cid, c] : r.duty_caps) {
    caps[std::to_string(cid)] = {{"wifi", c[Stack::WiFi]}, {"nru", c[Stack::NrU]}};
  }
  j["duty_caps"] = caps;
  nlohmann::ordered_json weights;
  for (PriorityClass k : kPriorityClasses) weights[std::string(to_string(k))] = r.class_weights[k];
  j["class_weights"] = weights;
  j["fault"] = r.fault ? nlohmann::ordered_json(*r.fault) : nlohmann::ordered_json(nullptr);
  j["rationale"] = r.rationale ? nlohmann::ordered_json(*r.rationale) : nlohmann::ordered_json(nullptr);
  return j;
}

EpochRecord epoch_record_from_json(const nlohmann::json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  const auto source = j.at("policy_source").get<std::string>();
  const auto parsed = parse_policy_source(source);
  if (!parsed) throw LogFormatError("unknown policy_source \"" + source + "\"");
  r.policy_source = *parsed;
  r.alpha = j.at("alpha").get<int>();
  r.served_bits = j.at("served_bits").get<double>();
  r.energy_j = j.at("energy_j").get<double>();
  r.sla_hit_rate = j.at("sla_hit_rate").get<double>();
  r.sla_hit_rate_backlogged = j.at("sla_hit_rate_backlogged").get<double>();
  r.cum_bits = j.at("cum_bits").get<double>();
  r.cum_energy_j = j.at("cum_energy_j").get<double>();
  r.cum_bits_per_joule = j.at("cum_bits_per_joule").get<double>();
  for (const auto& [key, caps] : j.at("duty_caps").items()) {
    PerStack<double> c{};
    for (Stack s : kStacks) c[s] = caps.at(std::string(to_string(s))).get<double>();
    r.duty_caps[std::stoi(key)] = c;
  }
  for (PriorityClass k : kPriorityClasses) {
    r.class_weights[k] = j.at("class_weights").at(std::string(to_string(k))).get<double>();
  }
  if (j.contains("fault") && !j["fault"].is_null()) r.fault = j["fault"].get<std::string>();
  if (j.contains("rationale") && !j["rationale"].is_null()) r.rationale = j["rationale"].get<std::string>();
  return r;
}

const JsonSchema& epoch_record_schema() {
  static const JsonSchema schema = JsonSchema::parse(resources::kEpochRecordSchema);
  return schema;
}

std::vector<std::string> csv_header(const std::vector<EpochRecord>& records) {
  std::vector<std::string> cols{"epoch",        "policy_source", "alpha",
                                "served_bits",  "energy_j",      "sla_hit_rate",
                                "sla_hit_rate_backlogged",       "cum_bits",
                                "cum_energy_j", "cum_bits_per_joule"};
  if (!records.empty()) {
    for (const auto& [cid, caps] : records.front().duty_caps) {
      for (Stack s : kStacks) cols.push_back("cap_c" + std::to_string(cid) + "_" + std::string(to_string(s)));
    }
  }
  for (PriorityClass k : kPriorityClasses) cols.push_back("w_" + std::string(to_string(k)));
  cols.emplace_back("fault");
  cols.emplace_back("rationale");
  return cols;
}

std::string csv_row(const EpochRecord& r) {
  std::string row = std::to_string(r.epoch) + "," + std::string(to_string(r.policy_source)) + "," +
                    std::to_string(r.alpha);
  for (double v : {r.served_bits, r.energy_j, r.sla_hit_rate, r.sla_hit_rate_backlogged, r.cum_bits, r.cum_energy_j,
                   r.cum_bits_per_joule}) {
    row += "," + fmt_real(v);
  }
  for (const auto& [cid, caps] : r.duty_caps) {
    for (Stack s : kStacks) row += "," + fmt_real(caps[s]);
  }
  for (PriorityClass k : kPriorityClasses) row += "," + fmt_real(r.class_weights[k]);
  row += "," + (r.fault ? csv_quote(*r.fault) : std::string());
  row += "," + (r.rationale ? csv_quote(*r.rationale) : std::string());
  return row;
}

LogPaths write_logs(const std::vector<EpochRecord>& records, const RunManifest& manifest,
                    const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw LogIoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  LogPaths paths{out_dir / "run.jsonl", out_dir / "run.csv", out_dir / "manifest.json"};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw LogIoError("cannot open " + p.string() + " for writing");
    return out;
  };
  auto finish = [](std::ofstream& out, const std::filesystem::path& p) {
    out.flush();
    if (!out) throw LogIoError("write failed for " + p.string());
  };

  {
    auto out = open(paths.jsonl);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    finish(out, paths.jsonl);
  }
  {
    auto out = open(paths.csv);
    const auto header = csv_header(records);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : records) out << csv_row(r) << '\n';
    finish(out, paths.csv);
  }
  {
    auto out = open(paths.manifest);
    out << to_json(manifest).dump(2) << '\n';
    finish(out, paths.manifest);
  }
  return paths;
}

std::optional<std::string> check_cumulative(const std::vector<EpochRecord>& records) {
  double bits = 0.0;
  double energy = 0.0;
  for (const auto& r : records) {
    bits += r.served_bits;
    energy += r.energy_j;
    const double ratio = energy > 0.0 ? bits / energy : 0.0;
    if (r.cum_bits != bits || r.cum_energy_j != energy || r.cum_bits_per_joule != ratio) {
      return "epoch " + std::to_string(r.epoch) + ": cumulative fields are not prefix sums";
    }
  }
  return std::nullopt;
}

std::vector<EpochRecord> read_run_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogIoError("cannot open " + path.string());
  std::vector<EpochRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw LogFormatError(where + ": not valid JSON");
    if (const auto errs = epoch_record_schema().validate(j); !errs.empty()) {
      throw LogFormatError(where + ": " + errs.front());
    }
    try {
      records.push_back(epoch_record_from_json(j));
    } catch (const std::exception& e) {
      throw LogFormatError(where + ": " + e.what());
    }
  }
  if (auto problem = check_cumulative(records)) throw LogFormatError(path.string() + ": " + *problem);
  return records;
}

std::vector<EpochRecord> read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogIoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto rows = parse_csv(buffer.str(), path.string());
  if (rows.empty()) throw LogFormatError(path.string() + ": missing header");

  const auto& header = rows.front().second;
  std::vector<std::string> names;
  for (const auto& f : header) names.push_back(f.text);
  constexpr std::size_t kFixed = 10;
  constexpr std::size_t kTrailing = 4 + 2;  // weights, fault, rationale
  if (names.size() < kFixed + kTrailing || (names.size() - kFixed - kTrailing) % 2 != 0) {
    throw LogFormatError(path.string() + ":1: unexpected column count " + std::to_string(names.size()));
  }
  std::vector<int> cap_channels;
  for (std::size_t c = kFixed; c + kTrailing < names.size(); c += 2) {
    const std::string& col = names[c];
    const auto us = col.rfind('_');
    if (!col.starts_with("cap_c") || us == std::string::npos || col.substr(us) != "_wifi") {
      throw LogFormatError(path.string() + ":1: unexpected column \"" + col + "\"");
    }
    cap_channels.push_back(std::stoi(col.substr(5, us - 5)));
  }

  std::vector<EpochRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [lineno, f] = rows[r];
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != names.size()) {
      throw LogFormatError(where + ": expected " + std::to_string(names.size()) + " columns, got " +
                           std::to_string(f.size()));
    }
    auto col = [&](std::size_t c) { return where + " column " + std::to_string(c + 1) + " (" + names[c] + ")"; };
    EpochRecord rec;
    rec.epoch = parse_int(f[0], col(0));
    const auto source = parse_policy_source(f[1].text);
    if (!source) throw LogFormatError(col(1) + ": unknown policy source \"" + f[1].text + "\"");
    rec.policy_source = *source;
    rec.alpha = parse_int(f[2], col(2));
    rec.served_bits = parse_real(f[3], col(3));
    rec.energy_j = parse_real(f[4], col(4));
    rec.sla_hit_rate = parse_real(f[5], col(5));
    rec.sla_hit_rate_backlogged = parse_real(f[6], col(6));
    rec.cum_bits = parse_real(f[7], col(7));
    rec.cum_energy_j = parse_real(f[8], col(8));
    rec.cum_bits_per_joule = parse_real(f[9], col(9));
    std::size_t c = kFixed;
    for (int cid : cap_channels) {
      PerStack<double> caps{};
      caps[Stack::WiFi] = parse_real(f[c], col(c));
      caps[Stack::NrU] = parse_real(f[c + 1], col(c + 1));
      rec.duty_caps[cid] = caps;
      c += 2;
    }
    for (PriorityClass k : kPriorityClasses) {
      rec.class_weights[k] = parse_real(f[c], col(c));
      ++c;
    }
    if (f[c].quoted) rec.fault = f[c].text;
    if (f[c + 1].quoted) rec.rationale = f[c + 1].text;
    records.push_back(std::move(rec));
  }
  if (auto problem = check_cumulative(records)) throw LogFormatError(path.string() + ": " + *problem);
  return records;
}

RunSummary summarize(const std::vector<EpochRecord>& records, std::string label) {
  RunSummary s;
  s.label = std::move(label);
  s.epochs = records.size();
  if (records.empty()) return s;
  s.final_cum_bits = records.back().cum_bits;
  s.final_cum_energy_j = records.back().cum_energy_j;
  s.final_bits_per_joule = records.back().cum_bits_per_joule;
  double sla = 0.0;
  for (const auto& r : records) sla += r.sla_hit_rate;
  s.mean_sla_hit_rate = sla / static_cast<double>(records.size());
  return s;
}

std::string format_delta(double value, double baseline) {
  if (baseline == 0.0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", 100.0 * (value - baseline) / baseline);
  return buf;
}

std::string format_compare_table(const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-28s %16s %14s %14s %9s %9s %9s %9s\n", "run", "cum_bits", "cum_energy_j",
                "bits_per_J", "mean_sla", "d_bits", "d_energy", "d_bits/J");
  out << line;
  if (runs.empty()) return out.str();
  const RunSummary& base = runs.front();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const bool is_base = i == 0;
    std::snprintf(line, sizeof line, "%-28s %16.6g %14.6g %14.6g %9.4f %9s %9s %9s\n", r.label.c_str(),
                  r.final_cum_bits, r.final_cum_energy_j, r.final_bits_per_joule, r.mean_sla_hit_rate,
                  is_base ? "base" : format_delta(r.final_cum_bits, base.final_cum_bits).c_str(),
                  is_base ? "base" : format_delta(r.final_cum_energy_j, base.final_cum_energy_j).c_str(),
                  is_base ? "base" : format_delta(r.final_bits_per_joule, base.final_bits_per_joule).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace coex
