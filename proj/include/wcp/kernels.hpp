#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wcp/random.hpp"

namespace wcp {

enum class KernelKind { Cusum, Wilcoxon, Custom };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind parse_kernel_kind(std::string_view text);

// Odd function g defining the two-sample kernel h(x, y) = g(y - x).
//
// Built-ins:
//   CUSUM     g(x) = x
//   Wilcoxon  g(x) = 1{x >= 0} - 1/2 for x != 0, and g(0) = 0 (midrank
//             convention, keeps g odd on tied data)
class Kernel {
 public:
  using Function = std::function<double(double)>;

  static Kernel cusum();
  static Kernel wilcoxon();
  static Kernel custom(std::string name, Function g);
  static Kernel from_kind(KernelKind kind);

  KernelKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  // Unchecked evaluation.
  double operator()(double x) const {
    switch (kind_) {
      case KernelKind::Cusum:
        return x;
      case KernelKind::Wilcoxon:
        return x > 0.0 ? 0.5 : (x < 0.0 ? -0.5 : 0.0);
      case KernelKind::Custom:
        break;
    }
    return fn_(x);
  }

 private:
  Kernel(KernelKind kind, std::string name, Function fn)
      : kind_(kind), name_(std::move(name)), fn_(std::move(fn)) {}

  KernelKind kind_;
  std::string name_;
  Function fn_;
};

// Evaluates g(x); rejects non-finite arguments.
double eval_kernel(const Kernel& kernel, double x);

// Distribution of the i.i.d. mean-zero noise. The standard normal family is
// handled analytically; custom families supply whichever of cdf, pdf and
// sampler they have, and each derived quantity picks the strongest route the
// supplied parts allow.
class NoiseModel {
 public:
  enum class Family { StandardNormal, Custom };

  struct Parts {
    std::string name;
    std::function<double(RandomStream&)> sampler;
    std::function<double(double)> cdf;
    std::function<double(double)> pdf;
    std::optional<double> variance;
    bool continuous = true;
  };

  static NoiseModel standard_normal();
  static NoiseModel custom(Parts parts);

  // Convenience families.
  static NoiseModel normal(double sd);
  static NoiseModel laplace(double scale);
  static NoiseModel uniform(double half_width);

  // Parses "normal", "normal:<sd>", "laplace:<scale>", "uniform:<half width>".
  static NoiseModel parse(std::string_view text);

  Family family() const noexcept { return family_; }
  const std::string& name() const noexcept { return parts_.name; }

  bool has_sampler() const noexcept;
  bool has_cdf() const noexcept;
  bool has_pdf() const noexcept;
  bool continuous() const noexcept { return parts_.continuous; }
  std::optional<double> variance() const noexcept;

  double sample(RandomStream& rng) const;
  double cdf(double x) const;
  double pdf(double x) const;

 private:
  NoiseModel(Family family, Parts parts)
      : family_(family), parts_(std::move(parts)) {}

  Family family_;
  Parts parts_;
};

// Monte Carlo (or exact) scalar result. Exact values carry reps = 0 and a
// zero standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;

  bool exact() const noexcept { return reps == 0; }
};

struct MonteCarloOptions {
  std::size_t reps = 1'000'000;
  std::uint64_t seed = kDefaultSeed;
};

// u(delta) = E[g(xi - eta + delta) - g(xi - eta)].
Estimate u_of_delta(const Kernel& kernel, const NoiseModel& noise, double delta,
                    const MonteCarloOptions& options = {});

struct DriftConstant {
  double value = 0.0;
  bool analytic = true;
  // sqrt(n) * u(c / sqrt(n)) along the extrapolation grid (empty when analytic).
  std::vector<double> sequence;
  // Richardson-extrapolated values built from consecutive sequence entries.
  std::vector<double> extrapolated;
};

inline constexpr double kDriftRelativeTolerance = 1e-3;

// c_g = lim sqrt(n) u(c / sqrt(n)). Throws DivergenceError when the custom
// route does not settle.
DriftConstant drift_constant_c_g(const Kernel& kernel, const NoiseModel& noise,
                                 double c, const MonteCarloOptions& options = {});

// sigma with sigma^2 = E g1(xi)^2, g1(x) = E g(xi - x) - E g(xi - eta).
Estimate sigma_asymptotic(const Kernel& kernel, const NoiseModel& noise,
                          const MonteCarloOptions& options = {});

struct HoeffdingProjections {
  Estimate h1;
  Estimate h2;
};

// First-order Hoeffding projections of h(x, y) = g(y - x + delta) - g(y - x):
//   h1(x) = E[g(xi - x + delta) - g(xi - x)] - u(delta)
//   h2(y) = E[g(y - xi + delta) - g(y - xi)] - u(delta)
HoeffdingProjections hoeffding_projections(const Kernel& kernel,
                                           const NoiseModel& noise, double delta,
                                           double x,
                                           const MonteCarloOptions& options = {});

struct HoeffdingTerms {
  double u_delta = 0.0;
  double sigma = 0.0;
  double c_g = 0.0;
};

HoeffdingTerms hoeffding_terms(const Kernel& kernel, const NoiseModel& noise,
                               double delta, double c,
                               const MonteCarloOptions& options = {});

}  // namespace wcp
