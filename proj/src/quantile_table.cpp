#include "wcp/quantile_table.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "wcp/error.hpp"
#include "wcp/io.hpp"

namespace wcp {

QuantileTable::Key QuantileTable::key(double gamma, double alpha) {
  return {std::llround(gamma * 1e9), std::llround(alpha * 1e9)};
}

void QuantileTable::set(double gamma, double alpha, const QuantileEntry& entry) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  WeightGamma{gamma};
  entries_[key(gamma, alpha)] = {{gamma, alpha}, entry};
}

std::optional<QuantileEntry> QuantileTable::find(double gamma, double alpha) const {
  const auto it = entries_.find(key(gamma, alpha));
  if (it == entries_.end()) return std::nullopt;
  return it->second.second;
}

const QuantileEntry& QuantileTable::at(double gamma, double alpha) const {
  const auto it = entries_.find(key(gamma, alpha));
  if (it == entries_.end())
    fail(ErrorKind::TableMiss,
         fmt::format("no critical value for gamma={:g}, alpha={:g} in the {} table", gamma,
                     alpha, to_string(sided_)));
  return it->second.second;
}

std::vector<double> QuantileTable::gammas() const {
  std::set<long long> seen;
  std::vector<double> out;
  for (const auto& [k, v] : entries_)
    if (seen.insert(k.first).second) out.push_back(v.first.first);
  return out;
}

std::vector<double> QuantileTable::alphas() const {
  std::map<long long, double> seen;
  for (const auto& [k, v] : entries_) seen.emplace(k.second, v.first.second);
  std::vector<double> out;
  for (const auto& [k, a] : seen) out.push_back(a);
  return out;
}

void QuantileTable::write_csv(std::ostream& out, const std::vector<std::string>& metadata) const {
  out << "# sided: " << to_string(sided_) << '\n';
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "gamma,alpha,quantile,stderr,reps,grid_m\n";
  for (const auto& [k, v] : entries_) {
    const auto& [ga, e] = v;
    out << fmt::format("{:g},{:g},{:.6f},{:.6f},{},{}\n", ga.first, ga.second, e.quantile,
                       e.std_error, e.reps, e.grid_m);
  }
}

QuantileTable QuantileTable::read_csv(std::istream& in) {
  QuantileTable table;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("sided:");
      if (pos != std::string::npos) {
        std::string value = trim(line.substr(pos + 6));
        table.sided_ = parse_sidedness(value);
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("gamma", 0) == 0) continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 6)
      fail(ErrorKind::NonNumericInput,
           fmt::format("quantile table line {}: expected 6 fields", line_no));
    QuantileEntry e;
    const double gamma = parse_double(fields[0], line_no);
    const double alpha = parse_double(fields[1], line_no);
    e.quantile = parse_double(fields[2], line_no);
    e.std_error = parse_double(fields[3], line_no);
    e.reps = static_cast<std::size_t>(parse_double(fields[4], line_no));
    e.grid_m = static_cast<std::size_t>(parse_double(fields[5], line_no));
    table.set(gamma, alpha, e);
  }
  if (table.empty()) fail(ErrorKind::EmptyInput, "quantile table has no entries");
  return table;
}

QuantileTable QuantileTable::published_one_sided() {
  QuantileTable table(Sidedness::OneSidedMax);
  const double gammas[] = {0.0, 0.1, 0.2, 0.3, 0.4};
  const double alphas[] = {0.1, 0.05, 0.01};
  const double values[5][3] = {{1.05, 1.20, 1.51},
                               {1.24, 1.41, 1.72},
                               {1.45, 1.63, 2.05},
                               {1.75, 1.96, 2.40},
                               {2.10, 2.31, 2.83}};
  for (int g = 0; g < 5; ++g)
    for (int a = 0; a < 3; ++a)
      table.set(gammas[g], alphas[a], {values[g][a], std::nan(""), 10000, 0});
  return table;
}

}  // namespace wcp
