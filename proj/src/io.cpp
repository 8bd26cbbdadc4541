#include "wcp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "wcp/error.hpp"

namespace wcp {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace {

bool try_parse_double(std::string_view field, double& value) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), value);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(value);
}

}  // namespace

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  if (!try_parse_double(field, value))
    fail(ErrorKind::NonNumericInput,
         fmt::format("line {}: '{}' is not a finite number", line_no, trim(field)));
  return value;
}

std::vector<double> read_series_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.find(',') != std::string::npos)
      fail(ErrorKind::NonNumericInput,
           fmt::format("line {}: expected a single column", line_no));
    double value = 0.0;
    if (try_parse_double(t, value)) {
      values.push_back(value);
    } else if (!first_row) {
      fail(ErrorKind::NonNumericInput,
           fmt::format("line {}: '{}' is not a finite number", line_no, t));
    }
    first_row = false;
  }
  if (values.empty()) fail(ErrorKind::EmptyInput, "input contains no observations");
  return values;
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::UnreadableFile, "cannot open '" + path.string() + "'");
  return read_series_csv(in);
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string t = trim(line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidArgument,
           fmt::format("config line {}: expected key = value", line_no));
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      fail(ErrorKind::InvalidArgument, fmt::format("config line {}: empty key", line_no));
    config.values_[key] = trim(t.substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::UnreadableFile, "cannot open config '" + path.string() + "'");
  return parse(in);
}

const std::string& KeyValueConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::InvalidArgument, "config key '" + key + "' missing");
  return it->second;
}

double KeyValueConfig::number(const std::string& key) const {
  double value = 0.0;
  if (!try_parse_double(text(key), value))
    fail(ErrorKind::InvalidArgument, "config key '" + key + "' is not a number");
  return value;
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  return parse_number_list(text(key));
}

std::vector<double> parse_number_list(std::string_view text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    double start, step, stop;
    if (parts.size() != 3 || !try_parse_double(parts[0], start) ||
        !try_parse_double(parts[1], step) || !try_parse_double(parts[2], stop) || step <= 0.0)
      fail(ErrorKind::InvalidArgument, "bad range '" + t + "' (expected start:step:stop)");
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  for (char& ch : t)
    if (ch == ' ' || ch == '\t' || ch == ';') ch = ',';
  for (const auto& field : split(t, ',')) {
    if (field.empty()) continue;
    double value = 0.0;
    if (!try_parse_double(field, value))
      fail(ErrorKind::InvalidArgument, "'" + field + "' is not a number");
    out.push_back(value);
  }
  if (out.empty()) fail(ErrorKind::InvalidArgument, "empty number list");
  return out;
}

}  // namespace wcp
