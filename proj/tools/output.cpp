#include "output.hpp"

#include <sys/stat.h>
#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace ca43::cli {

namespace {

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string quote_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char c : cell) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string manifest_header(const RunManifest& m) {
  std::string h;
  auto line = [&](const char* key, const std::string& value) { h += std::string("# ") + key + ": " + value + "\n"; };
  line("command", m.command);
  line("preset", m.preset);
  line("config", m.config_path);
  line("seed", std::to_string(m.seed));
  line("out", m.out_dir);
  line("tool_version", m.tool_version);
  line("timestamp", m.timestamp);
  return h;
}

std::string manifest_timestamp(const std::string& config_path) {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') return iso_utc(static_cast<std::time_t>(v));
  }
  struct stat st {};
  if (config_path != "none" && ::stat(config_path.c_str(), &st) == 0) return iso_utc(st.st_mtime);
  return "unset";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::logic_error("CsvTable: row width does not match the header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::render(const RunManifest& manifest) const {
  std::string s = manifest_header(manifest);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += quote_cell(cells[i]);
    }
    s += '\n';
  };
  emit(columns_);
  for (const auto& r : rows_) emit(r);
  return s;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      f.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ca43::cli
