#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ca43 {

// Flat INI-style key/value store. Keys inside a [section] are addressed as
// "section.key". Comments start with ';' or '#'.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile load(const std::filesystem::path& path);
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  /// Entries of `other` replace entries of this file.
  void merge(const KeyValueFile& other);

  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<empty>";
};

}  // namespace ca43
