#pragma once

// Command-line front end. `run` takes the full argument vector (program name
// first) and returns the process exit status: 0 success, 1 runtime failure,
// 2 usage or configuration error.

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "swarmwatch/time.hpp"

namespace swarmwatch::cli {

inline constexpr const char* store_env_var = "SWARMWATCH_STORE";

struct RunConfig {
  std::optional<std::filesystem::path> store;
  std::optional<std::filesystem::path> geo;
  std::optional<std::filesystem::path> registry;
  Seconds interval{120};
  int saturation = 3;
  int budget = 50;
  int numwant = 200;
  std::optional<std::filesystem::path> output;
  bool json = false;
};

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// "90", "90s", "15m", "2h", "3d" -> seconds.
std::optional<Seconds> parse_duration(std::string_view text);

} // namespace swarmwatch::cli
