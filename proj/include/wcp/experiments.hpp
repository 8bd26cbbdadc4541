#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wcp/kernels.hpp"
#include "wcp/random.hpp"
#include "wcp/types.hpp"

namespace wcp {

// No change.
struct NullRegime {};

// Change after a fixed fraction: k* = floor(tau n), jump c / sqrt(n).
struct A1Regime {
  double tau_star = 0.5;
  double c = 0.0;
};

// Early change of fixed height: k* = round(c n^kappa), kappa taken from
// gamma_for_kappa.
struct A2Regime {
  WeightGamma gamma_for_kappa{0.3};
  double c = 0.0;
  double delta = 1.0;
};

using AlternativeSpec = std::variant<NullRegime, A1Regime, A2Regime>;

struct ChangePlacement {
  std::size_t k_star = 0;  // observations 1..k_star precede the jump; 0 = no jump
  double delta = 0.0;
  bool clamped = false;      // the raw change time was moved into [1, n-1]
  bool at_boundary = false;  // k_star == n - 1
};

// Resolves the change time and height for a sample of size n.
// A2 with c = 0 means no change; otherwise k* is clamped to [1, n-1].
ChangePlacement place_change(const AlternativeSpec& alternative, std::size_t n);

struct GeneratedSeries {
  std::vector<double> values;
  ChangePlacement change;
  bool boundary_warning = false;

  TimeSeries series() const { return TimeSeries(values); }
};

// X_i = mu + xi_i for i <= k*, mu + delta + xi_i afterwards.
GeneratedSeries generate_series(std::size_t n, const NoiseModel& noise,
                                const AlternativeSpec& alternative, double mu, RandomStream& rng);

// Allocation-free variant used inside the replication loops.
void fill_series(std::span<double> out, const NoiseModel& noise, const ChangePlacement& change,
                 double mu, RandomStream& rng);

struct SimulationOptions {
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  Sidedness sided = Sidedness::OneSidedMax;
  // Share each replication's series across all gammas.
  bool common_random_numbers = false;
  NoiseModel noise = NoiseModel::standard_normal();
  // Replications for the null calibration; 0 means "same as reps".
  std::size_t null_reps = 0;
};

inline constexpr std::size_t kMinCalibrationReps = 1000;

// Empirical (1 - alpha)-quantile (type 7) of the max statistic under no
// change, per gamma. All gammas are evaluated on the same null series.
std::vector<double> empirical_critical_values(std::size_t n, const Kernel& kernel,
                                              std::span<const WeightGamma> gammas, double alpha,
                                              std::size_t reps, const SimulationOptions& options);

double empirical_critical_value(std::size_t n, const Kernel& kernel, WeightGamma gamma,
                                double alpha, std::size_t reps, const SimulationOptions& options);

struct PowerCurve {
  std::string label;  // "gamma=0.3" or "envelope"
  double gamma = 0.0;
  std::vector<double> abscissa;
  std::vector<std::size_t> k_star;
  std::vector<double> power;
  std::vector<double> std_error;  // sqrt(p (1 - p) / reps); 0 for analytic curves
  // Configuration echo.
  std::size_t n = 0;
  std::string kernel;
  double alpha = 0.05;
  std::size_t reps = 0;
  bool size_corrected = true;
  double critical_value = 0.0;
  std::uint64_t seed = 0;
  std::size_t clamp_events = 0;
};

// 99 points 0.01, 0.02, ..., 0.99.
std::vector<double> default_tau_grid();

struct A1PowerConfig {
  std::size_t n = 1000;
  Kernel kernel = Kernel::cusum();
  std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4};
  double c = 5.0;  // jump c / sqrt(n)
  std::vector<double> taus = default_tau_grid();
  double alpha = 0.05;
  std::size_t reps = 5000;
  SimulationOptions sim;
};

// Size-corrected rejection rate against k* = floor(tau n), one curve per gamma.
std::vector<PowerCurve> power_curve_a1(const A1PowerConfig& config);

struct A2PowerConfig {
  std::size_t n = 5000;
  Kernel kernel = Kernel::cusum();
  std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4};
  double delta = 1.0;
  double kappa_source_gamma = 0.3;
  std::vector<double> c_grid;
  double alpha = 0.05;
  std::size_t reps = 500;
  SimulationOptions sim{kDefaultSeed, 1, Sidedness::TwoSidedMaxAbs};
};

// Size-corrected rejection rate against k* = round(c n^kappa), one curve per gamma.
std::vector<PowerCurve> power_curve_a2(const A2PowerConfig& config);

// Power of the most powerful level-alpha test of no change against a known
// change (k, delta) with known sigma:
//   1 - Phi(z_{1-alpha} - delta sqrt(k (n - k) / (n sigma^2))).
double envelope_power(std::size_t n, std::size_t k, double delta, double sigma, double alpha);

// Envelope at k = floor(tau n) along a tau grid.
PowerCurve envelope_curve(std::size_t n, double delta, double sigma, double alpha,
                          std::span<const double> taus);

// 100 * (trapezoid area under curve) / (trapezoid area under envelope).
double overall_power_ratio(const PowerCurve& curve, const PowerCurve& envelope);

// CSV with columns curve, x, k_star, power, stderr, critical_value, preceded
// by "# "-prefixed metadata lines.
void write_curves_csv(std::ostream& out, std::span<const PowerCurve> curves,
                      const std::vector<std::string>& metadata);

}  // namespace wcp
