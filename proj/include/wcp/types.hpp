#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace wcp {

// Ordered finite observations X_1..X_n with n >= 2.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Weight exponent gamma in [0, 1/2). The statistic at split k is divided by
// (k/n (1 - k/n))^gamma.
class WeightGamma {
 public:
  explicit WeightGamma(double gamma);

  double value() const noexcept { return gamma_; }

  double weight(std::size_t k, std::size_t n) const noexcept {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    return gamma_ == 0.0 ? 1.0 : std::pow(t * (1.0 - t), gamma_);
  }

  double weight_at(double lambda) const noexcept {
    return gamma_ == 0.0 ? 1.0 : std::pow(lambda * (1.0 - lambda), gamma_);
  }

  // Boundary rate exponent (1 - 2 gamma) / (2 (1 - gamma)) of the early
  // change alternative matched to this weight.
  double kappa() const noexcept { return (1.0 - 2.0 * gamma_) / (2.0 * (1.0 - gamma_)); }

  friend bool operator==(const WeightGamma&, const WeightGamma&) = default;

 private:
  double gamma_;
};

enum class Sidedness { OneSidedMax, TwoSidedMaxAbs };

std::string_view to_string(Sidedness sided) noexcept;
Sidedness parse_sidedness(std::string_view text);

}  // namespace wcp
