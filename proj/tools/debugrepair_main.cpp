#include "debugrepair/campaign.hpp"
#include "debugrepair/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace debugrepair;
namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string tasks;
  std::string model = "mock";
  int max_patch_attempts = 5;
  int max_reasoning_steps = 20;
  int workers = default_worker_count();
  std::string out;
  bool no_bi = false;
  bool no_rm = false;
  std::string mock_script;
  std::string config;
  std::string shim;
  std::string python = "python3";
  std::string assets;
  bool skip_bad_records = false;
  bool exclude_errored = false;
  double command_timeout_s = 30.0;
  double test_timeout_s = 10.0;
  double suite_timeout_s = 60.0;
};

std::chrono::milliseconds seconds(double s) {
  return std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
}

int do_run(const RunArgs &args) {
  auto loaded = load_tasks(args.tasks, LoadOptions{args.skip_bad_records});
  for (const auto &skip : loaded.skipped)
    std::cerr << "skipped: " << skip << "\n";

  std::string shim = args.shim;
  if (shim.empty())
    if (const char *env = std::getenv("DEBUGREPAIR_SHIM"))
      shim = env;
  if (shim.empty())
    throw HarnessFailure("no debuggee shim given (--shim or DEBUGREPAIR_SHIM)");
  if (!fs::exists(shim))
    throw HarnessFailure("debuggee shim not found: " + shim);
  if (args.mock_script.empty() && args.model == "mock")
    throw LlmUnavailable("model 'mock' needs --mock-script");

  CampaignOptions options;
  options.out_dir = args.out;
  options.workers = args.workers;
  options.exclude_errored = args.exclude_errored;
  options.model = resolve_model(args.model, args.config.empty()
                                                ? std::nullopt
                                                : std::optional<fs::path>(args.config));
  options.repair.max_patch_attempts = args.max_patch_attempts;
  options.repair.inspector.max_reasoning_iterations = args.max_reasoning_steps;
  options.repair.inspector.breakpoint_inspection = !args.no_bi;
  options.repair.inspector.runtime_modification = !args.no_rm;
  options.repair.launch.interpreter_argv = {args.python, "-u", shim};
  options.repair.launch.command_timeout = seconds(args.command_timeout_s);

  LiveSettings live;
  live.shim_argv = {args.python, shim};
  if (!args.mock_script.empty())
    live.mock_script = fs::path(args.mock_script);
  live.work_root = fs::path(args.out) / "work";
  live.test_limits.per_test = seconds(args.test_timeout_s);
  live.test_limits.per_suite = seconds(args.suite_timeout_s);

  const auto assets = PromptAssets::load(args.assets.empty() ? default_asset_dir()
                                                             : fs::path(args.assets));
  nlohmann::json run_config = {{"tasks", fs::absolute(args.tasks).string()},
                               {"model", args.model},
                               {"max_patch_attempts", args.max_patch_attempts},
                               {"max_reasoning_steps", args.max_reasoning_steps},
                               {"workers", args.workers},
                               {"breakpoint_inspection", !args.no_bi},
                               {"runtime_modification", !args.no_rm}};
  write_file_atomic(fs::path(args.out) / "run_config.json", run_config.dump(2));

  const auto result = run_campaign(loaded.tasks, options, assets, make_live_environment(live));
  std::cerr << "executed " << result.executed << " task(s), skipped " << result.skipped
            << " already complete\n";
  std::cout << render_summary(result.summary, options.model);
  return 0;
}

int do_report(const std::string &run_dir, bool exclude_errored) {
  const auto outcomes = load_outcomes(run_dir);
  if (outcomes.empty())
    throw StorageFailure("no outcomes under " + run_dir);
  ModelSpec model;
  model.model_name = "unknown";
  const auto config_path = fs::path(run_dir) / "run_config.json";
  if (std::ifstream in(config_path); in) {
    try {
      model.model_name = nlohmann::json::parse(in).value("model", model.model_name);
    } catch (const nlohmann::json::exception &) {
    }
  }
  std::cout << render_summary(compute_run_metrics(outcomes, exclude_errored), model);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Debugger-guided repair of LLM-generated Python code"};
  app.require_subcommand(1);

  RunArgs run;
  auto *run_cmd = app.add_subcommand("run", "Run a repair campaign over a task file");
  run_cmd->add_option("--tasks", run.tasks, "Line-delimited task file")->required();
  run_cmd->add_option("--model", run.model, "Model name (see --config for prices)");
  run_cmd->add_option("--max-patch-attempts", run.max_patch_attempts)
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-reasoning-steps", run.max_reasoning_steps)
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--workers", run.workers)->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "Results directory")->required();
  run_cmd->add_flag("--no-bi-strategy", run.no_bi, "Disable the breakpoint-inspection strategy");
  run_cmd->add_flag("--no-rm-strategy", run.no_rm, "Disable the runtime-modification strategy");
  run_cmd->add_option("--mock-script", run.mock_script, "Scripted completions (JSON)")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--config", run.config, "Run config with the model price table")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--shim", run.shim, "Debuggee shim script");
  run_cmd->add_option("--python", run.python, "Python interpreter");
  run_cmd->add_option("--assets", run.assets, "Prompt asset directory");
  run_cmd->add_flag("--skip-bad-records", run.skip_bad_records);
  run_cmd->add_flag("--exclude-errored", run.exclude_errored,
                    "Drop errored tasks from the resolve-rate denominator");
  run_cmd->add_option("--command-timeout", run.command_timeout_s, "Seconds per debugger command");
  run_cmd->add_option("--test-timeout", run.test_timeout_s, "Seconds per test");
  run_cmd->add_option("--suite-timeout", run.suite_timeout_s, "Seconds per test suite");

  std::string run_dir;
  bool report_exclude = false;
  auto *report_cmd = app.add_subcommand("report", "Summarize a results directory");
  report_cmd->add_option("--run", run_dir, "Results directory")->required()
      ->check(CLI::ExistingDirectory);
  report_cmd->add_flag("--exclude-errored", report_exclude);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed())
      return do_run(run);
    return do_report(run_dir, report_exclude);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
