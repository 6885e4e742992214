#pragma once

#include <functional>
#include <vector>

#include <CLI11.hpp>

namespace fbstore::cli {

struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

/// Adds the rate, metrics, horizon, srd and covprobe subcommands to `root`.
/// Each command also takes --config and --out.
std::vector<Command> register_commands(CLI::App& root);

}  // namespace fbstore::cli
