#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace xysim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value text config, '#' comments, versioned by a schema=1 entry.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  // comma-separated doubles; "pi" literals allowed (pi, -pi, pi/2, ...)
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::string echo() const;  // canonical text form

 private:
  std::map<std::string, std::string> kv_;
};

double parse_angle(const std::string& token);  // numbers or pi expressions

}  // namespace xysim
