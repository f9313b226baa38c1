#include "taskspec/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace taskspec {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Config Config::parse(std::string_view text, std::string_view origin) {
  Config config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, line_no));
    if (config.contains(key)) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
    }
    config.values_[key] = value;
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  const auto text = get(key);
  if (!text) return std::nullopt;
  double value = 0.0;
  const auto* end = text->data() + text->size();
  const auto res = std::from_chars(text->data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError(fmt::format("config key '{}': '{}' is not a number", key, *text));
  }
  return value;
}

double Config::get_double(const std::string& key, double fallback) const {
  return get_optional_double(key).value_or(fallback);
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  const auto text = get(key);
  if (!text) return fallback;
  std::size_t value = 0;
  const auto* end = text->data() + text->size();
  const auto res = std::from_chars(text->data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError(
        fmt::format("config key '{}': '{}' is not a non-negative integer", key, *text));
  }
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto text = get(key);
  if (!text) return fallback;
  if (*text == "true" || *text == "1" || *text == "yes") return true;
  if (*text == "false" || *text == "0" || *text == "no") return false;
  throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, *text));
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) out.push_back(key);
  }
  return out;
}

std::filesystem::path default_output_dir() {
  const char* dir = std::getenv(kOutputDirVariable);
  if (dir != nullptr && *dir != '\0') return dir;
  return "results";
}

}  // namespace taskspec
