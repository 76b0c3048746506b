#pragma once

#include <filesystem>
#include <optional>

#include "stokesdtn/scenario.hpp"

namespace stokesdtn {

struct CommandOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> dump_path;  // recover input
  std::optional<uint64_t> seed;
  std::optional<int> depth;
  std::string mutate;  // fault injection, e.g. "C0:1,2"
  bool quiet = false;
};

ScenarioConfig resolve_config(const CommandOptions& opts);

// Forward run for one scenario; also usable in-process.
ForwardData forward_scenario(const ScenarioConfig& cfg, const std::string& mutate = {});

int cmd_forward(const CommandOptions& opts);
int cmd_recover(const CommandOptions& opts);
int cmd_roundtrip(const CommandOptions& opts);
int cmd_verify(const CommandOptions& opts);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace stokesdtn
