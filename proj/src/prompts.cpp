#include "debugrepair/prompts.hpp"

#include "debugrepair/errors.hpp"

#include <fstream>
#include <sstream>

#ifndef DEBUGREPAIR_ASSET_DIR
#define DEBUGREPAIR_ASSET_DIR "assets/prompts"
#endif

namespace debugrepair {
namespace {

std::string read_asset(const std::filesystem::path &dir, const char *name) {
  const auto path = dir / name;
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw StorageFailure("missing prompt asset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
    text.pop_back();
  return text;
}

} // namespace

PromptAssets PromptAssets::load(const std::filesystem::path &dir) {
  PromptAssets a;
  a.inspector_system = read_asset(dir, "inspector_system.txt");
  a.tool_explanations = read_asset(dir, "inspector_tools.txt");
  a.fewshot_breakpoint_inspection = read_asset(dir, "fewshot_breakpoint_inspection.txt");
  a.fewshot_missing_logic = read_asset(dir, "fewshot_missing_logic.txt");
  a.fewshot_flawed_logic = read_asset(dir, "fewshot_flawed_logic.txt");
  a.restrictions = read_asset(dir, "inspector_restrictions.txt");
  a.summarize_request = read_asset(dir, "inspector_summarize.txt");
  a.coder_system = read_asset(dir, "coder_system.txt");
  a.coder_reprompt = read_asset(dir, "coder_reprompt.txt");
  return a;
}

std::filesystem::path default_asset_dir() { return DEBUGREPAIR_ASSET_DIR; }

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string> &values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open);
    if (close != std::string_view::npos) {
      const auto it = values.find(std::string(tmpl.substr(open + 1, close - open - 1)));
      if (it != values.end()) {
        out += it->second;
        pos = close + 1;
        continue;
      }
    }
    out += '{';
    pos = open + 1;
  }
  return out;
}

} // namespace debugrepair
