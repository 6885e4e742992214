#pragma once

#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

namespace fbstore::cli {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Reads a flat config file: a JSON object (scalars, or arrays of scalars
/// joined with commas) or `key = value` lines with `#`/`;` comments and
/// optional `[section]` headers, which are ignored.
ConfigEntries read_config(const std::string& path);

/// Fills options of `cmd` that were not given on the command line. Keys
/// name options without the leading dashes; unknown keys throw.
void apply_config(CLI::App& cmd, const ConfigEntries& entries);

/// "2,4,8" -> {2, 4, 8}.
std::vector<double> parse_list(const std::string& text);

/// "a:b:step" -> a, a + step, ..., up to b (inclusive within 1e-9 step).
std::vector<double> parse_range(const std::string& text);

/// --out when given, else $FBSTORE_OUTPUT_DIR, else "fbstore-out".
std::string output_dir(const std::string& flag_value);

}  // namespace fbstore::cli
