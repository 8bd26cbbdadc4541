#include "wcp/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wcp/error.hpp"
#include "wcp/numeric.hpp"

namespace wcp {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) fail(ErrorKind::InvalidArgument, std::string(what) + " must be finite");
}

struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  Estimate estimate() const {
    const double var = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(count)), count};
  }
};

// Finite interval carrying all but ~1e-15 of the noise mass on each side.
std::pair<double, double> effective_support(const NoiseModel& noise) {
  constexpr double kTail = 1e-15;
  double lo = -1.0;
  while (noise.cdf(lo) > kTail) {
    lo *= 2.0;
    if (lo < -1e12) fail(ErrorKind::UnsupportedCombination, "noise cdf has no usable lower tail");
  }
  double hi = 1.0;
  while (1.0 - noise.cdf(hi) > kTail) {
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorKind::UnsupportedCombination, "noise cdf has no usable upper tail");
  }
  return {lo, hi};
}

template <class F>
double integrate_against_noise(const NoiseModel& noise, F&& f) {
  using boost::math::quadrature::gauss_kronrod;
  if (noise.has_cdf()) {
    const auto [lo, hi] = effective_support(noise);
    // Split so that kinks at the support edges or at zero fall on panel ends.
    constexpr int kPanels = 64;
    double total = 0.0;
    for (int i = 0; i < kPanels; ++i) {
      const double a = lo + (hi - lo) * i / kPanels;
      const double b = lo + (hi - lo) * (i + 1) / kPanels;
      total += gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
    }
    return total;
  }
  const double inf = std::numeric_limits<double>::infinity();
  return gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-12);
}

void require_sampler(const NoiseModel& noise, const char* what) {
  if (!noise.has_sampler())
    fail(ErrorKind::UnsupportedCombination,
         std::string(what) + ": noise model '" + noise.name() +
             "' has no sampler and no analytic rule applies");
}

Estimate sampled_u(const Kernel& g, const NoiseModel& noise, double delta,
                   const MonteCarloOptions& options) {
  require_sampler(noise, "u_of_delta");
  RandomStream rng(options.seed, stream_id("kernels.u_of_delta"));
  RunningMoments acc;
  for (std::size_t r = 0; r < options.reps; ++r) {
    const double d = noise.sample(rng) - noise.sample(rng);
    acc.add(g(d + delta) - g(d));
  }
  return acc.estimate();
}

Estimate analytic_or_quadrature_wilcoxon_u(const NoiseModel& noise, double delta,
                                           const MonteCarloOptions& options) {
  if (noise.family() == NoiseModel::Family::StandardNormal)
    return {normal_cdf(delta / std::numbers::sqrt2) - 0.5, 0.0, 0};
  if (noise.continuous() && noise.has_cdf() && noise.has_pdf()) {
    // u = E[F(xi + delta) - F(xi)]
    const double value = integrate_against_noise(noise, [&](double y) {
      return (noise.cdf(y + delta) - noise.cdf(y)) * noise.pdf(y);
    });
    return {value, 0.0, 0};
  }
  return sampled_u(Kernel::wilcoxon(), noise, delta, options);
}

DriftConstant extrapolate_drift(const Kernel& g, const NoiseModel& noise, double c,
                                const MonteCarloOptions& options) {
  require_sampler(noise, "drift_constant_c_g");
  // Common differences xi - eta for every n keep the sequence smooth in delta.
  RandomStream rng(options.seed, stream_id("kernels.drift_constant"));
  std::vector<double> diffs(options.reps);
  for (auto& d : diffs) d = noise.sample(rng) - noise.sample(rng);

  DriftConstant out;
  out.analytic = false;
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    const double root = std::sqrt(n);
    const double delta = c / root;
    double sum = 0.0;
    for (double d : diffs) sum += g(d + delta) - g(d);
    out.sequence.push_back(root * sum / static_cast<double>(diffs.size()));
  }
  // Error expansion in 1/n for odd g; the grid ratio is 10.
  for (std::size_t i = 0; i + 1 < out.sequence.size(); ++i)
    out.extrapolated.push_back((10.0 * out.sequence[i + 1] - out.sequence[i]) / 9.0);

  const double last = out.extrapolated.back();
  const double prev = out.extrapolated[out.extrapolated.size() - 2];
  const double scale = std::max(std::abs(last), 1e-12);
  if (!std::isfinite(last) || std::abs(last - prev) > kDriftRelativeTolerance * scale) {
    std::vector<double> diagnostic = out.sequence;
    diagnostic.insert(diagnostic.end(), out.extrapolated.begin(), out.extrapolated.end());
    throw DivergenceError(
        "drift_constant_c_g: sqrt(n) u(c/sqrt(n)) did not settle within relative 1e-3",
        std::move(diagnostic));
  }
  out.value = last;
  return out;
}

}  // namespace

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::Cusum:
      return "cusum";
    case KernelKind::Wilcoxon:
      return "wilcoxon";
    case KernelKind::Custom:
      return "custom";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view text) {
  const std::string t = lower(text);
  if (t == "cusum") return KernelKind::Cusum;
  if (t == "wilcoxon") return KernelKind::Wilcoxon;
  fail(ErrorKind::InvalidArgument, "unknown kernel '" + std::string(text) +
                                       "' (expected cusum or wilcoxon)");
}

Kernel Kernel::cusum() { return Kernel(KernelKind::Cusum, "cusum", nullptr); }

Kernel Kernel::wilcoxon() { return Kernel(KernelKind::Wilcoxon, "wilcoxon", nullptr); }

Kernel Kernel::custom(std::string name, Function g) {
  require(static_cast<bool>(g), "custom kernel requires a function");
  return Kernel(KernelKind::Custom, std::move(name), std::move(g));
}

Kernel Kernel::from_kind(KernelKind kind) {
  switch (kind) {
    case KernelKind::Cusum:
      return cusum();
    case KernelKind::Wilcoxon:
      return wilcoxon();
    case KernelKind::Custom:
      break;
  }
  fail(ErrorKind::InvalidArgument, "custom kernels need an explicit function");
}

double eval_kernel(const Kernel& kernel, double x) {
  require_finite(x, "kernel argument");
  return kernel(x);
}

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel NoiseModel::standard_normal() {
  Parts p;
  p.name = "normal";
  p.sampler = [](RandomStream& rng) { return rng.normal(); };
  p.cdf = [](double x) { return normal_cdf(x); };
  p.pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
  p.variance = 1.0;
  return NoiseModel(Family::StandardNormal, std::move(p));
}

NoiseModel NoiseModel::custom(Parts parts) {
  require(parts.sampler || parts.cdf || parts.pdf,
          "custom noise model needs at least one of sampler, cdf, pdf");
  if (parts.variance) require(*parts.variance >= 0.0, "noise variance must be non-negative");
  if (parts.name.empty()) parts.name = "custom";
  return NoiseModel(Family::Custom, std::move(parts));
}

NoiseModel NoiseModel::normal(double sd) {
  require(sd > 0.0 && std::isfinite(sd), "normal noise needs a positive sd");
  Parts p;
  p.name = "normal:" + std::to_string(sd);
  p.sampler = [sd](RandomStream& rng) { return sd * rng.normal(); };
  p.cdf = [sd](double x) { return normal_cdf(x / sd); };
  p.pdf = [sd](double x) {
    const double z = x / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  p.variance = sd * sd;
  return custom(std::move(p));
}

NoiseModel NoiseModel::laplace(double scale) {
  require(scale > 0.0 && std::isfinite(scale), "laplace noise needs a positive scale");
  Parts p;
  p.name = "laplace:" + std::to_string(scale);
  p.sampler = [scale](RandomStream& rng) {
    const double u = rng.uniform() - 0.5;
    return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
  };
  p.cdf = [scale](double x) {
    return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
  };
  p.pdf = [scale](double x) { return 0.5 / scale * std::exp(-std::abs(x) / scale); };
  p.variance = 2.0 * scale * scale;
  return custom(std::move(p));
}

NoiseModel NoiseModel::uniform(double half_width) {
  require(half_width > 0.0 && std::isfinite(half_width),
          "uniform noise needs a positive half width");
  const double a = half_width;
  Parts p;
  p.name = "uniform:" + std::to_string(a);
  p.sampler = [a](RandomStream& rng) { return a * (2.0 * rng.uniform() - 1.0); };
  p.cdf = [a](double x) { return std::clamp((x + a) / (2.0 * a), 0.0, 1.0); };
  p.pdf = [a](double x) { return std::abs(x) <= a ? 0.5 / a : 0.0; };
  p.variance = a * a / 3.0;
  return custom(std::move(p));
}

NoiseModel NoiseModel::parse(std::string_view text) {
  const std::string t = lower(text);
  const auto colon = t.find(':');
  const std::string family = t.substr(0, colon);
  if (colon == std::string::npos) {
    if (family == "normal") return standard_normal();
    fail(ErrorKind::InvalidArgument, "noise '" + std::string(text) + "' needs a parameter");
  }
  const std::string arg = t.substr(colon + 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
  if (ec != std::errc() || ptr != arg.data() + arg.size())
    fail(ErrorKind::InvalidArgument, "bad noise parameter in '" + std::string(text) + "'");
  if (family == "normal") return value == 1.0 ? standard_normal() : normal(value);
  if (family == "laplace") return laplace(value);
  if (family == "uniform") return uniform(value);
  fail(ErrorKind::InvalidArgument, "unknown noise family '" + family + "'");
}

bool NoiseModel::has_sampler() const noexcept { return static_cast<bool>(parts_.sampler); }
bool NoiseModel::has_cdf() const noexcept { return static_cast<bool>(parts_.cdf); }
bool NoiseModel::has_pdf() const noexcept { return static_cast<bool>(parts_.pdf); }
std::optional<double> NoiseModel::variance() const noexcept { return parts_.variance; }

double NoiseModel::sample(RandomStream& rng) const {
  if (!parts_.sampler) fail(ErrorKind::UnsupportedCombination, "noise '" + name() + "' has no sampler");
  return parts_.sampler(rng);
}

double NoiseModel::cdf(double x) const {
  if (!parts_.cdf) fail(ErrorKind::UnsupportedCombination, "noise '" + name() + "' has no cdf");
  return parts_.cdf(x);
}

double NoiseModel::pdf(double x) const {
  if (!parts_.pdf) fail(ErrorKind::UnsupportedCombination, "noise '" + name() + "' has no pdf");
  return parts_.pdf(x);
}

// ---------------------------------------------------------------------------
// Hoeffding quantities

Estimate u_of_delta(const Kernel& kernel, const NoiseModel& noise, double delta,
                    const MonteCarloOptions& options) {
  require_finite(delta, "delta");
  if (delta == 0.0) return {0.0, 0.0, 0};
  switch (kernel.kind()) {
    case KernelKind::Cusum:
      return {delta, 0.0, 0};
    case KernelKind::Wilcoxon:
      return analytic_or_quadrature_wilcoxon_u(noise, delta, options);
    case KernelKind::Custom:
      break;
  }
  return sampled_u(kernel, noise, delta, options);
}

DriftConstant drift_constant_c_g(const Kernel& kernel, const NoiseModel& noise,
                                 double c, const MonteCarloOptions& options) {
  require_finite(c, "drift c");
  if (c == 0.0) return {};
  switch (kernel.kind()) {
    case KernelKind::Cusum:
      return {c, true, {}, {}};
    case KernelKind::Wilcoxon:
      if (noise.family() == NoiseModel::Family::StandardNormal)
        return {c / (2.0 * std::sqrt(std::numbers::pi)), true, {}, {}};
      if (noise.continuous() && noise.has_pdf()) {
        const double f2 = integrate_against_noise(noise, [&](double y) {
          const double f = noise.pdf(y);
          return f * f;
        });
        return {c * f2, true, {}, {}};
      }
      break;
    case KernelKind::Custom:
      break;
  }
  return extrapolate_drift(kernel, noise, c, options);
}

Estimate sigma_asymptotic(const Kernel& kernel, const NoiseModel& noise,
                          const MonteCarloOptions& options) {
  if (auto var = noise.variance(); var && *var == 0.0)
    fail(ErrorKind::DegenerateNoise, "noise '" + noise.name() + "' has zero variance");

  if (kernel.kind() == KernelKind::Cusum) {
    if (auto var = noise.variance()) return {std::sqrt(*var), 0.0, 0};
    require_sampler(noise, "sigma_asymptotic");
    RandomStream rng(options.seed, stream_id("kernels.sigma.variance"));
    RunningMoments acc;
    for (std::size_t r = 0; r < options.reps; ++r) acc.add(noise.sample(rng));
    const double var = acc.m2 / static_cast<double>(acc.count - 1);
    if (!(var > 0.0)) fail(ErrorKind::DegenerateNoise, "sampled noise has zero variance");
    // Delta-method standard error for sqrt of the sample variance (normal
    // fourth moment assumed).
    const double sd = std::sqrt(var);
    return {sd, sd / std::sqrt(2.0 * static_cast<double>(acc.count - 1)), acc.count};
  }

  if (kernel.kind() == KernelKind::Wilcoxon && noise.continuous())
    return {1.0 / std::sqrt(12.0), 0.0, 0};

  // sigma^2 = E[g(xi - x) g(xi' - x)] for independent xi, xi', x; the
  // subtracted constant E g(xi - eta) vanishes because g is odd.
  require_sampler(noise, "sigma_asymptotic");
  RandomStream rng(options.seed, stream_id("kernels.sigma.projection"));
  RunningMoments acc;
  for (std::size_t r = 0; r < options.reps; ++r) {
    const double x = noise.sample(rng);
    const double a = noise.sample(rng);
    const double b = noise.sample(rng);
    acc.add(kernel(a - x) * kernel(b - x));
  }
  const Estimate var = acc.estimate();
  if (!(var.value > 0.0))
    fail(ErrorKind::DegenerateNoise, "projection variance is not positive for noise '" +
                                         noise.name() + "'");
  const double sigma = std::sqrt(var.value);
  return {sigma, var.std_error / (2.0 * sigma), var.reps};
}

HoeffdingProjections hoeffding_projections(const Kernel& kernel,
                                           const NoiseModel& noise, double delta,
                                           double x, const MonteCarloOptions& options) {
  require_finite(delta, "delta");
  require_finite(x, "projection argument");
  if (kernel.kind() == KernelKind::Cusum || delta == 0.0) return {};

  const Estimate u = u_of_delta(kernel, noise, delta, options);
  if (kernel.kind() == KernelKind::Wilcoxon && noise.continuous() && noise.has_cdf()) {
    const double h1 = noise.cdf(x) - noise.cdf(x - delta) - u.value;
    const double h2 = noise.cdf(x + delta) - noise.cdf(x) - u.value;
    return {{h1, u.std_error, u.reps}, {h2, u.std_error, u.reps}};
  }

  require_sampler(noise, "hoeffding_projections");
  RandomStream rng(options.seed, stream_id("kernels.projections"));
  RunningMoments first, second;
  for (std::size_t r = 0; r < options.reps; ++r) {
    const double xi = noise.sample(rng);
    first.add(kernel(xi - x + delta) - kernel(xi - x));
    second.add(kernel(x - xi + delta) - kernel(x - xi));
  }
  const Estimate a = first.estimate();
  const Estimate b = second.estimate();
  const double se_a = std::hypot(a.std_error, u.std_error);
  const double se_b = std::hypot(b.std_error, u.std_error);
  return {{a.value - u.value, se_a, a.reps}, {b.value - u.value, se_b, b.reps}};
}

HoeffdingTerms hoeffding_terms(const Kernel& kernel, const NoiseModel& noise,
                               double delta, double c, const MonteCarloOptions& options) {
  return {u_of_delta(kernel, noise, delta, options).value,
          sigma_asymptotic(kernel, noise, options).value,
          drift_constant_c_g(kernel, noise, c, options).value};
}

}  // namespace wcp
