#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wcp {

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

// Parses a finite double; throws NonNumericInput naming the line otherwise.
double parse_double(std::string_view field, std::size_t line_no);

// Single numeric column, optional one-line header, blank lines and lines
// starting with '#' ignored.
std::vector<double> read_series_csv(std::istream& in);
std::vector<double> read_series_csv(const std::filesystem::path& path);

// Flat "key = value" text with '#' comments. Later keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.contains(key); }
  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
};

// Comma- or whitespace-separated list of numbers, or "start:step:stop".
std::vector<double> parse_number_list(std::string_view text);

}  // namespace wcp
