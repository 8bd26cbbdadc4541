#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wcp/kernels.hpp"
#include "wcp/quantile_table.hpp"
#include "wcp/types.hpp"

namespace wcp {

// k -> G(k) for k = 1..n-1, where
//   G(k) = sum_{i<=k} sum_{j>k} g(X_j - X_i) / (n^{3/2} (k/n (1 - k/n))^gamma).
// values[k - 1] holds G(k).
struct StatisticProfile {
  WeightGamma gamma{0.0};
  std::vector<double> values;
  Sidedness sided = Sidedness::TwoSidedMaxAbs;
  // max G(k) (one-sided) or max |G(k)| (two-sided), attained first at argmax_k.
  double max_value = 0.0;
  std::size_t argmax_k = 1;

  double at(std::size_t k) const { return values.at(k - 1); }
};

struct Extremum {
  double value = 0.0;
  std::size_t k_hat = 1;  // smallest attaining split, 1-based
};

Extremum max_statistic(std::span<const double> profile, Sidedness sided);
Extremum max_statistic(const StatisticProfile& profile, Sidedness sided);

// Literal double sum for every k. O(n^3); the reference implementation.
StatisticProfile profile_bruteforce(const TimeSeries& x, const Kernel& kernel,
                                    WeightGamma gamma,
                                    Sidedness sided = Sidedness::TwoSidedMaxAbs);

// O(n) via prefix sums: sum_{i<=k} sum_{j>k} (X_j - X_i) = k S_n - n S_k.
StatisticProfile profile_cusum(const TimeSeries& x, WeightGamma gamma,
                               Sidedness sided = Sidedness::TwoSidedMaxAbs);

// O(n log n) via global midranks: the double sum equals
// (k (n + 1) - 2 sum_{i<=k} R_i) / 2.
StatisticProfile profile_wilcoxon(const TimeSeries& x, WeightGamma gamma,
                                  Sidedness sided = Sidedness::TwoSidedMaxAbs);

// Dispatches to the fast path for built-in kernels; custom kernels use an
// O(n^2) incremental update of the double sum.
StatisticProfile compute_profile(const TimeSeries& x, const Kernel& kernel,
                                 WeightGamma gamma,
                                 Sidedness sided = Sidedness::TwoSidedMaxAbs);

// Unscaled double sums D(k), k = 1..n-1, by the fastest available route.
std::vector<double> double_sums(std::span<const double> x, const Kernel& kernel);

// Evaluates max statistics of one series for several weights at once. Scale
// factors are precomputed per (n, gamma); evaluate() is const and safe to call
// concurrently.
class StatisticEvaluator {
 public:
  StatisticEvaluator(std::size_t n, Kernel kernel, std::vector<WeightGamma> gammas,
                     Sidedness sided);

  std::size_t n() const noexcept { return n_; }
  const std::vector<WeightGamma>& gammas() const noexcept { return gammas_; }
  Sidedness sided() const noexcept { return sided_; }

  // out[g] = max statistic for gammas()[g].
  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> x) const;

 private:
  std::size_t n_;
  Kernel kernel_;
  std::vector<WeightGamma> gammas_;
  Sidedness sided_;
  std::vector<std::vector<double>> scales_;  // [gamma][k - 1]
};

enum class CriticalScale {
  // Asymptotic quantiles of sup W0(l)/(l(1-l))^gamma; the statistic is
  // divided by sigma before comparison.
  Asymptotic,
  // Empirical quantiles of the raw statistic at the same n and noise.
  FiniteSample,
};

struct CriticalSource {
  const QuantileTable* table = nullptr;
  CriticalScale scale = CriticalScale::Asymptotic;
  // Studentizing sigma. When absent: Wilcoxon uses 1/sqrt(12), CUSUM the
  // sample standard deviation of the series (biased upward under a change).
  std::optional<double> sigma;
};

struct TestOutcome {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  std::size_t estimated_changepoint = 1;
  double alpha = 0.05;
  WeightGamma gamma{0.0};
  KernelKind kernel = KernelKind::Cusum;
  Sidedness sided = Sidedness::OneSidedMax;
  double sigma = 1.0;
  StatisticProfile profile;
};

// Change-point test at level alpha. The sidedness of the statistic follows
// the table's sidedness.
TestOutcome run_test(const TimeSeries& x, const Kernel& kernel, WeightGamma gamma,
                     double alpha, const CriticalSource& critical);

double sample_standard_deviation(std::span<const double> x);

}  // namespace wcp
