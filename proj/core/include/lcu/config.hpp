#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace lcu {

// Flat key = value configuration with [section] headers. Keys are flattened to
// "section.key"; top-level keys (before any section) keep their bare name.
// Lines starting with '#' or ';' are comments.
class Config {
 public:
  Config() = default;
  static Config FromString(const std::string& text);
  static Config FromFile(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Sorted "key = value" lines, one per entry (manifest snapshot).
  std::string snapshot() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace lcu
