#include "proxsg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "proxsg/error.hpp"

namespace proxsg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorCode::kParse, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::kParse, where + ": empty key");
    if (!cfg.values_.emplace(key, value).second) throw Error(ErrorCode::kParse, where + ": duplicate key '" + key + "'");
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kParse, origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? csv::to_double(get(key), origin_ + " " + key) : fallback;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  if (!has(key) || get(key) == "none" || get(key).empty()) return std::nullopt;
  return csv::to_double(get(key), origin_ + " " + key);
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? csv::to_int(get(key), origin_ + " " + key) : fallback;
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const long long v = csv::to_int(get(key), origin_ + " " + key);
  if (v < 0) throw Error(ErrorCode::kParse, origin_ + ": " + key + " must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::kParse, origin_ + ": " + key + " must be a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  if (!has(key)) return out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : get_list(key)) out.push_back(static_cast<int>(csv::to_int(s, origin_ + " " + key)));
  return out;
}

void Config::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kParse, origin_ + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace proxsg
