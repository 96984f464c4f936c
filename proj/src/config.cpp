#include "xysim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace xysim {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.kv_.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    cfg.kv_[key] = val;
  }
  if (cfg.get_int("schema", -1) != 1)
    throw ConfigError("config: missing or unsupported schema (need schema=1)");
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double parse_angle(const std::string& token) {
  const std::string t = token;
  if (t == "pi") return M_PI;
  if (t == "-pi") return -M_PI;
  if (t == "pi/2") return M_PI / 2;
  if (t == "-pi/2") return -M_PI / 2;
  if (t == "pi/4") return M_PI / 4;
  if (t == "-pi/4") return -M_PI / 4;
  size_t pos = 0;
  const double v = std::stod(t, &pos);
  if (pos != t.size()) throw ConfigError("config: cannot parse angle '" + token + "'");
  return v;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    return parse_angle(s);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: '" + s + "'");
  }
}

double Config::get_double(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

int64_t Config::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an integer: '" + s + "'");
  }
}

int64_t Config::get_int(const std::string& key, int64_t def) const {
  return has(key) ? get_int(key) : def;
}

bool Config::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string s = get_string(key);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("config: key '" + key + "' is not a boolean: '" + s + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) continue;
    try {
      out.push_back(parse_angle(tok));
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' has a bad list entry '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& def) const {
  return has(key) ? get_double_list(key) : def;
}

std::string Config::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << "=" << v << "\n";
  return os.str();
}

}  // namespace xysim
