#include "ca43/key_value.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

void flatten(const boost::property_tree::ptree& tree, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  for (const auto& [name, child] : tree) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (child.empty()) {
      out[key] = child.get_value<std::string>();
    } else {
      flatten(child, key, out);
    }
  }
}

std::string strip_inline_comment(const std::string& value) {
  auto pos = value.find_first_of(";#");
  std::string v = pos == std::string::npos ? value : value.substr(0, pos);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.pop_back();
  return v;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  // boost's INI reader rejects '#' comment lines; normalise them to ';'.
  std::istringstream lines(text);
  std::ostringstream cleaned;
  for (std::string line; std::getline(lines, line);) {
    auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line[first] = ';';
    cleaned << line << '\n';
  }
  boost::property_tree::ptree tree;
  std::istringstream in(cleaned.str());
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  KeyValueFile file;
  file.origin_ = origin;
  flatten(tree, "", file.values_);
  for (auto& [k, v] : file.values_) v = strip_inline_comment(v);
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError(origin_ + ": missing key '" + key + "'");
  return *v;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + s + "'");
  }
  return value;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long KeyValueFile::get_int(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get_string(key);
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + s + "'");
  }
  return value;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + s + "'");
}

void KeyValueFile::merge(const KeyValueFile& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

}  // namespace ca43
