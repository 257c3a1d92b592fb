#ifndef PROXSG_CONFIG_HPP_
#define PROXSG_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace proxsg {

/**
 * @brief Flat `key = value` configuration.
 *
 * One entry per line; `#` starts a comment; surrounding whitespace is ignored.
 * Lists are comma separated. Duplicate keys are a parse error.
 */
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  /// Throws Error{kParse} naming the first key not in `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace proxsg

#endif  // PROXSG_CONFIG_HPP_
