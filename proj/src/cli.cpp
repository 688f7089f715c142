#include "coex/cli.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coex/config.hpp"
#include "coex/llm_interface.hpp"
#include "coex/run_log.hpp"
#include "coex/runner.hpp"

namespace coex {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioArgs {
  std::string scenario = "moderate";
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

void add_scenario_options(CLI::App& cmd, ScenarioArgs& args) {
  auto* scenario = cmd.add_option("--scenario", args.scenario, "Preset: moderate (40 Mb/s) or high (150 Mb/s)")
                       ->check(CLI::IsMember({"moderate", "high"}));
  auto* config = cmd.add_option("--config", args.config_path, "SimConfig JSON file (overrides the preset)");
  scenario->excludes(config);
  cmd.add_option("--seed", args.seed, "Seed (default 2025 for presets; overrides the config file's seed)");
  cmd.add_option("--epochs", args.epochs, "Override the number of epochs")->check(CLI::PositiveNumber);
}

SimConfig resolve_config(const ScenarioArgs& args) {
  SimConfig cfg;
  if (!args.config_path.empty()) {
    cfg = load_sim_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
  } else {
    const double load = args.scenario == "high" ? kHighLoadBps : kModerateLoadBps;
    cfg = default_scenario(load, args.seed.value_or(2025));
  }
  if (args.epochs) cfg.num_epochs = *args.epochs;
  return cfg;
}

int report_violations(const SimConfig& cfg) {
  const auto violations = validate_config(cfg);
  if (violations.empty()) return kExitOk;
  std::cerr << "config has " << violations.size() << " violation(s):\n";
  for (const auto& v : violations) std::cerr << "  " << format_violation(v) << '\n';
  return kExitFailure;
}

int cmd_run(const ScenarioArgs& sargs, const std::string& policy, const std::string& out_dir,
            const std::string& endpoint_path, const std::string& mock_script) {
  const SimConfig cfg = resolve_config(sargs);
  if (int rc = report_violations(cfg); rc != kExitOk) return rc;

  const PolicyMode mode = *parse_policy_mode(policy);
  std::optional<LlmEndpointConfig> endpoint;
  if (!endpoint_path.empty()) endpoint = load_endpoint_config(endpoint_path);
  if (mode == PolicyMode::Mock) {
    if (!endpoint) endpoint = LlmEndpointConfig{};
    endpoint->mode = EndpointMode::Mock;
    if (!mock_script.empty()) endpoint->mock_script_path = mock_script;
    if (!endpoint->mock_script_path) throw UsageError("--policy mock needs --mock-script or an endpoint config with mock_script_path");
  } else if (mode == PolicyMode::Llm && !endpoint) {
    throw UsageError("--policy llm needs --endpoint-config");
  }
  if (endpoint) {
    if (const auto problems = validate_endpoint_config(*endpoint); !problems.empty()) {
      for (const auto& p : problems) std::cerr << "endpoint config: " << p << '\n';
      return kExitFailure;
    }
  }

  RunManifest manifest = make_manifest(cfg, mode, mode == PolicyMode::Rule ? std::nullopt : endpoint);
  manifest.started_at = utc_timestamp();
  const RunResult run = run_multi_epoch(cfg, mode, endpoint);
  manifest.finished_at = utc_timestamp();

  const LogPaths paths = write_logs(run.records, manifest, out_dir);
  const RunSummary s = summarize(run.records, policy);
  std::cout << "epochs=" << s.epochs << " cum_bits=" << s.final_cum_bits << " cum_energy_j=" << s.final_cum_energy_j
            << " bits_per_joule=" << s.final_bits_per_joule << " mean_sla_hit_rate=" << s.mean_sla_hit_rate << '\n';
  std::cout << "wrote " << paths.jsonl.string() << ", " << paths.csv.string() << ", " << paths.manifest.string()
            << '\n';
  return kExitOk;
}

int cmd_validate(const ScenarioArgs& sargs) {
  const SimConfig cfg = resolve_config(sargs);
  const int rc = report_violations(cfg);
  if (rc == kExitOk) std::cout << "ok: " << cfg.channels.size() << " channels, " << cfg.users.size() << " users\n";
  return rc;
}

int cmd_compare(const std::vector<std::string>& files) {
  if (files.size() < 2) throw UsageError("compare needs at least two run.jsonl files");
  std::vector<RunSummary> runs;
  for (const auto& f : files) runs.push_back(summarize(read_run_jsonl(f), f));
  std::cout << format_compare_table(runs);
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Wi-Fi/NR-U coexistence simulator with a policy-driven alpha-fair epoch scheduler",
               "spectrum_agent"};
  app.require_subcommand(1);

  ScenarioArgs run_args;
  std::string policy = "rule";
  std::string out_dir;
  std::string endpoint_path;
  std::string mock_script;
  auto* run = app.add_subcommand("run", "Run a multi-epoch simulation and write run.jsonl, run.csv, manifest.json");
  add_scenario_options(*run, run_args);
  run->add_option("--policy", policy, "Policy: rule, llm or mock")->check(CLI::IsMember({"rule", "llm", "mock"}));
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--endpoint-config", endpoint_path, "LLM endpoint config JSON");
  run->add_option("--mock-script", mock_script, "JSONL script of policy replies (mock policy)");

  ScenarioArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Check a config (or preset) for invariant violations");
  add_scenario_options(*validate, validate_args);

  std::vector<std::string> compare_files;
  auto* compare = app.add_subcommand("compare", "Summarize two or more run.jsonl files; the first is the baseline");
  compare->add_option("runs", compare_files, "run.jsonl files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args, policy, out_dir, endpoint_path, mock_script);
    if (validate->parsed()) return cmd_validate(validate_args);
    if (compare->parsed()) return cmd_compare(compare_files);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace coex
