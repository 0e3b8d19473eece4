#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace debugrepair {

// Prompt texts, one file each under the asset directory.
struct PromptAssets {
  std::string inspector_system; // {tool_explanations} {few_shots} {restrictions}
  std::string tool_explanations;
  std::string fewshot_breakpoint_inspection;
  std::string fewshot_missing_logic;
  std::string fewshot_flawed_logic;
  std::string restrictions;
  std::string summarize_request;
  std::string coder_system;
  std::string coder_reprompt;

  // Throws StorageFailure naming the missing file.
  static PromptAssets load(const std::filesystem::path &dir);
};

// Directory baked in at build time (overridable on the command line).
std::filesystem::path default_asset_dir();

// Replaces every {key} with its value; unknown braces are left alone.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string> &values);

} // namespace debugrepair
