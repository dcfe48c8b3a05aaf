#pragma once

#include <map>
#include <string>

namespace bsgs {

/// Flat key=value configuration. '#' starts a comment; blank lines are
/// ignored; whitespace around keys and values is trimmed.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap load_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text, const std::string& origin = "<string>");

double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
int config_int(const ConfigMap& cfg, const std::string& key, int fallback);
bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback);
std::string config_string(const ConfigMap& cfg, const std::string& key,
                          const std::string& fallback);

}  // namespace bsgs
