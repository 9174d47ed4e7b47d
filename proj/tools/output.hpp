#pragma once

// CSV artifacts with an embedded run manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ca43::cli {

struct RunManifest {
  std::string command;
  std::string preset;
  std::string config_path = "none";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string tool_version;
  std::string timestamp = "unset";
};

/// '#'-prefixed "key: value" lines, one per manifest field.
std::string manifest_header(const RunManifest& manifest);

/// SOURCE_DATE_EPOCH when set, else the modification time of the config file,
/// else "unset". Wall-clock time is never used so reruns stay byte-identical.
std::string manifest_timestamp(const std::string& config_path);

/// Shortest round-trip decimal form, locale independent.
std::string format_number(double value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  CsvTable& row(std::vector<std::string> cells);
  std::string render(const RunManifest& manifest) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a temporary file in the target directory, then renames it over
/// `path`. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ca43::cli
