#include "debugrepair/campaign.hpp"

#include "debugrepair/errors.hpp"
#include "debugrepair/pdb_driver.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace debugrepair {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw StorageFailure("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw StorageFailure("malformed JSON in " + path.string() + ": " + e.what());
  }
}

MockTaskScript script_from_json(const json &j) {
  MockTaskScript s;
  s.inspector = j.value("inspector", std::vector<std::string>{});
  s.coder = j.value("coder", std::vector<std::string>{});
  s.cycle_inspector = j.value("cycle_inspector", false);
  s.cycle_coder = j.value("cycle_coder", false);
  return s;
}

Money price_from(const json &j, const char *field) {
  if (!j.contains(field))
    return Money{};
  const auto &v = j.at(field);
  if (v.is_string())
    return Money::parse(v.get<std::string>());
  if (v.is_number())
    return Money::from_double(v.get<double>());
  throw std::invalid_argument(std::string("price '") + field + "' must be a number or string");
}

} // namespace

MockScriptBook MockScriptBook::load(const fs::path &path) {
  const auto doc = read_json(path);
  MockScriptBook book;
  try {
    if (doc.contains("tasks"))
      for (const auto &[id, entry] : doc.at("tasks").items())
        book.tasks[id] = script_from_json(entry);
    if (doc.contains("default"))
      book.fallback = script_from_json(doc.at("default"));
  } catch (const json::exception &e) {
    throw StorageFailure("malformed mock script " + path.string() + ": " + e.what());
  }
  return book;
}

const MockTaskScript *MockScriptBook::find(const std::string &task_id) const {
  if (auto it = tasks.find(task_id); it != tasks.end())
    return &it->second;
  return fallback ? &*fallback : nullptr;
}

ModelSpec resolve_model(const std::string &name, const std::optional<fs::path> &config_file) {
  ModelSpec spec;
  spec.model_name = name;
  if (!config_file)
    return spec;
  const auto doc = read_json(*config_file);
  if (!doc.contains("models") || !doc.at("models").contains(name))
    return spec;
  const auto &entry = doc.at("models").at(name);
  try {
    spec.input_price = price_from(entry, "input_price");
    spec.output_price = price_from(entry, "output_price");
  } catch (const std::invalid_argument &e) {
    throw StorageFailure("model '" + name + "' in " + config_file->string() + ": " + e.what());
  }
  spec.endpoint = entry.value("endpoint", "");
  spec.api_key_env = entry.value("api_key_env", spec.api_key_env);
  return spec;
}

void write_file_atomic(const fs::path &path, const std::string &content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    out << content;
    out.flush();
    if (!out)
      throw StorageFailure("cannot write " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec)
    throw StorageFailure("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::vector<RepairOutcome> load_outcomes(const fs::path &run_dir) {
  std::vector<RepairOutcome> outcomes;
  const auto dir = run_dir / "outcomes";
  if (!fs::is_directory(dir))
    return outcomes;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json")
      continue;
    try {
      outcomes.push_back(outcome_from_json(read_json(entry.path())));
    } catch (const std::exception &e) {
      throw StorageFailure("unreadable outcome " + entry.path().string() + ": " + e.what());
    }
  }
  std::sort(outcomes.begin(), outcomes.end(),
            [](const RepairOutcome &a, const RepairOutcome &b) { return a.task_id < b.task_id; });
  return outcomes;
}

CampaignResult run_campaign(const std::vector<RepairTask> &tasks, const CampaignOptions &options,
                            const PromptAssets &assets, const EnvironmentFactory &environment) {
  const auto outcomes_dir = options.out_dir / "outcomes";
  const auto traj_dir = options.out_dir / "trajectories";
  std::error_code ec;
  fs::create_directories(outcomes_dir, ec);
  fs::create_directories(traj_dir, ec);
  if (ec)
    throw StorageFailure("cannot create " + options.out_dir.string() + ": " + ec.message());

  CampaignResult result;
  std::vector<const RepairTask *> pending;
  for (const auto &task : tasks) {
    const auto path = outcomes_dir / (task.task_id + ".json");
    bool done = false;
    if (fs::exists(path)) {
      try {
        outcome_from_json(read_json(path));
        done = true;
      } catch (const std::exception &) {
        done = false; // torn or foreign file: run again
      }
    }
    if (done)
      ++result.skipped;
    else
      pending.push_back(&task);
  }

  std::mutex print_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<int> executed{0};
  auto worker = [&] {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= pending.size())
        return;
      const RepairTask &task = *pending[index];
      RepairOutcome outcome;
      try {
        TrajectoryLog log(traj_dir / (task.task_id + ".jsonl"));
        TaskEnvironment env = environment(task);
        RepairContext ctx{*env.inspector_llm, *env.coder_llm, *env.tests, env.backends,
                          assets,             options.model,  &log};
        outcome = repair(task, options.repair, ctx);
      } catch (const std::exception &e) {
        outcome = RepairOutcome{};
        outcome.task_id = task.task_id;
        outcome.errored = true;
        outcome.error = e.what();
        outcome.final_code = task.buggy_code;
      }
      write_file_atomic(outcomes_dir / (task.task_id + ".json"), outcome_to_json(outcome).dump(2));
      ++executed;
      if (!options.quiet) {
        std::lock_guard lock(print_mutex);
        std::cerr << "[" << task.task_id << "] "
                  << (outcome.errored ? "errored: " + outcome.error
                                      : outcome.resolved ? "resolved" : "unresolved")
                  << " after " << outcome.attempts.size() << " attempt(s)\n";
      }
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(pending.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  result.executed = executed.load();

  // Summary over the tasks of this campaign, in task-file order.
  std::vector<RepairOutcome> outcomes;
  for (const auto &task : tasks) {
    const auto path = outcomes_dir / (task.task_id + ".json");
    outcomes.push_back(outcome_from_json(read_json(path)));
  }
  result.summary = compute_run_metrics(outcomes, options.exclude_errored);
  write_file_atomic(options.out_dir / "summary.json",
                    summary_to_json(result.summary, options.model).dump(2));
  write_file_atomic(options.out_dir / "summary.txt", render_summary(result.summary, options.model));
  return result;
}

EnvironmentFactory make_live_environment(const LiveSettings &settings) {
  std::shared_ptr<MockScriptBook> book;
  std::shared_ptr<LlmClient> http;
  if (settings.mock_script)
    book = std::make_shared<MockScriptBook>(MockScriptBook::load(*settings.mock_script));
  else
    http = std::make_shared<HttpLlmClient>();

  return [settings, book, http](const RepairTask &task) {
    TaskEnvironment env;
    if (book) {
      const MockTaskScript *script = book->find(task.task_id);
      if (!script)
        throw LlmUnavailable("mock script has no entry for task '" + task.task_id + "'");
      env.inspector_llm = std::make_shared<MockLlm>(script->inspector, script->cycle_inspector);
      env.coder_llm = std::make_shared<MockLlm>(script->coder, script->cycle_coder);
    } else {
      env.inspector_llm = http;
      env.coder_llm = http;
    }
    env.tests = std::make_unique<ShimTestRunner>(ShimCommand{settings.shim_argv},
                                                 settings.work_root, settings.test_limits);
    env.backends = [] { return std::make_unique<PdbProcess>(); };
    return env;
  };
}

int default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::max(1u, std::min(4u, hw == 0 ? 1u : hw)));
}

} // namespace debugrepair
