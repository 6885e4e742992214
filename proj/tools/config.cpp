#include "config.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fbstore::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string scalar_text(const nlohmann::ordered_json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw std::runtime_error("config key '" + key + "' must be a scalar or a list of scalars");
}

ConfigEntries from_json(const std::string& text, const std::string& path) {
  const auto doc = nlohmann::ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw std::runtime_error("config " + path + " is not a JSON object");
  ConfigEntries out;
  for (const auto& [key, v] : doc.items()) {
    if (v.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + scalar_text(v[i], key);
      out.emplace_back(key, joined);
    } else {
      out.emplace_back(key, scalar_text(v, key));
    }
  }
  return out;
}

ConfigEntries from_lines(const std::string& text, const std::string& path) {
  ConfigEntries out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string value = unquote(trim(t.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      // TOML-style array: [2, 4, 8]
      std::string joined;
      std::istringstream items(value.substr(1, value.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) {
        joined += (joined.empty() ? "" : ",") + unquote(trim(item));
      }
      value = joined;
    }
    out.emplace_back(trim(t.substr(0, eq)), value);
  }
  return out;
}

}  // namespace

ConfigEntries read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') return from_json(text, path);
  return from_lines(text, path);
}

void apply_config(CLI::App& cmd, const ConfigEntries& entries) {
  for (const auto& [key, value] : entries) {
    if (key == "config") throw std::runtime_error("config files cannot nest --config");
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (opt == nullptr) throw std::runtime_error("unknown config key '" + key + "' for " + cmd.get_name());
    if (opt->count() > 0) continue;  // command line wins
    opt->add_result(value);
    opt->run_callback();
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw std::invalid_argument("empty entry in list '" + text + "'");
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("not a number: '" + t + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ':')) parts.push_back(trim(item));
  if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step, got '" + text + "'");
  const double a = std::stod(parts[0]), b = std::stod(parts[1]), step = std::stod(parts[2]);
  if (!(step > 0.0) || !(b >= a)) throw std::invalid_argument("range needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  char buf[32];
  for (std::size_t i = 0; i < count; ++i) {
    // Snap away accumulated binary error so 0:1:0.1 yields 0.3, not 0.30000000000000004.
    std::snprintf(buf, sizeof buf, "%.12g", a + static_cast<double>(i) * step);
    out[i] = std::strtod(buf, nullptr);
  }
  return out;
}

std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("FBSTORE_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "fbstore-out";
}

}  // namespace fbstore::cli
