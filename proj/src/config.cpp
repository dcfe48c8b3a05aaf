#include "bsgs/config.hpp"

#include <fstream>
#include <sstream>

#include "bsgs/errors.hpp"

namespace bsgs {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DatasetParseError(origin, line_no, "expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw DatasetParseError(origin, line_no, "empty key");
    }
    cfg[key] = value;
  }
  return cfg;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParameterOutOfRange("config: key '" + key + "' is not a number: " + it->second);
  }
}

int config_int(const ConfigMap& cfg, const std::string& key, int fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParameterOutOfRange("config: key '" + key + "' is not an integer: " + it->second);
  }
}

bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ParameterOutOfRange("config: key '" + key + "' is not a boolean: " + v);
}

std::string config_string(const ConfigMap& cfg, const std::string& key,
                          const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

}  // namespace bsgs
