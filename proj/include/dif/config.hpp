#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dif {

/**
 * Flat `key = value` configuration. Lines starting with '#' (and blank
 * lines) are ignored; values may be scalars or comma-separated lists.
 */
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  /// Applies a single "key=value" override (highest precedence).
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t dflt) const;
  std::vector<double> get_vector(const std::string& key,
                                 const std::vector<double>& dflt) const;

  /// Rejects any key outside `allowed`, naming the valid keys.
  void require_known_keys(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dif
