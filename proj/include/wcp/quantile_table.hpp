#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcp/types.hpp"

namespace wcp {

struct QuantileEntry {
  double quantile = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::size_t grid_m = 0;
};

// Critical values keyed by (gamma, alpha). Lookups are exact (to 1e-9);
// a missing cell is a TableMiss error, never an interpolation.
class QuantileTable {
 public:
  explicit QuantileTable(Sidedness sided = Sidedness::OneSidedMax) : sided_(sided) {}

  Sidedness sided() const noexcept { return sided_; }

  void set(double gamma, double alpha, const QuantileEntry& entry);
  std::optional<QuantileEntry> find(double gamma, double alpha) const;
  const QuantileEntry& at(double gamma, double alpha) const;

  std::vector<double> gammas() const;
  std::vector<double> alphas() const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Columns: gamma, alpha, quantile, stderr, reps, grid_m. Metadata lines
  // are written first, each prefixed with "# ".
  void write_csv(std::ostream& out, const std::vector<std::string>& metadata = {}) const;
  static QuantileTable read_csv(std::istream& in);

  // Tabulated one-sided quantiles of sup W0(l)/(l(1-l))^gamma from a
  // 10,000-replication simulation, gamma in {0,..,0.4}, alpha in
  // {0.1, 0.05, 0.01}.
  static QuantileTable published_one_sided();

 private:
  using Key = std::pair<long long, long long>;
  static Key key(double gamma, double alpha);

  Sidedness sided_;
  std::map<Key, std::pair<std::pair<double, double>, QuantileEntry>> entries_;
};

}  // namespace wcp
