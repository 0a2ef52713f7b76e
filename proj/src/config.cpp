#include "dif/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dif {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream oss;
  oss << in.rdbuf();
  return from_string(oss.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               " is not of the form key = value: '" + line + "'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error("override is not of the form key=value: '" +
                             assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) {
    throw std::runtime_error("config key must be non-empty");
  }
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& dflt) const {
  const auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "' is not a number: '" +
                             text + "'");
  }
}

}  // namespace

double KeyValueConfig::get_double(const std::string& key, double dflt) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return dflt;
  }
  return parse_double(key, it->second);
}

int KeyValueConfig::get_int(const std::string& key, int dflt) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return dflt;
  }
  try {
    return static_cast<int>(std::stoll(it->second));
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "' is not an integer: '" +
                             it->second + "'");
  }
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t dflt) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return dflt;
  }
  try {
    return static_cast<std::uint64_t>(std::stoull(it->second));
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "' is not an integer: '" +
                             it->second + "'");
  }
}

std::vector<double> KeyValueConfig::get_vector(
    const std::string& key, const std::vector<double>& dflt) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return dflt;
  }
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      continue;
    }
    out.push_back(std::stod(item));
  }
  if (out.empty()) {
    throw std::runtime_error("config key '" + key + "' has an empty list value");
  }
  return out;
}

void KeyValueConfig::require_known_keys(
    const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::ostringstream oss;
      oss << "unknown config key '" << key << "'; valid keys:";
      for (const auto& k : allowed) {
        oss << ' ' << k;
      }
      throw std::runtime_error(oss.str());
    }
  }
}

}  // namespace dif
