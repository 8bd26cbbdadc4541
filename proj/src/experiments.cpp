#include "wcp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "wcp/error.hpp"
#include "wcp/numeric.hpp"
#include "wcp/parallel.hpp"
#include "wcp/statistic.hpp"

namespace wcp {

namespace {

std::vector<WeightGamma> to_gammas(std::span<const double> values) {
  require(!values.empty(), "at least one gamma is required");
  std::vector<WeightGamma> out;
  out.reserve(values.size());
  for (double g : values) out.emplace_back(g);
  return out;
}

void require_alpha(double alpha) { require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)"); }

std::size_t calibration_reps(const SimulationOptions& sim, std::size_t reps) {
  return std::max(sim.null_reps != 0 ? sim.null_reps : reps, kMinCalibrationReps);
}

// rejections[g][a] for the given change placements.
std::vector<std::vector<std::size_t>> count_rejections(
    std::size_t n, const Kernel& kernel, const std::vector<WeightGamma>& gammas,
    std::span<const double> critical, std::span<const ChangePlacement> placements,
    std::size_t reps, const SimulationOptions& sim, std::string_view tag) {
  const std::size_t G = gammas.size();
  std::vector<std::vector<std::size_t>> counts(G, std::vector<std::size_t>(placements.size(), 0));

  const StatisticEvaluator all(n, kernel, gammas, sim.sided);
  std::vector<StatisticEvaluator> single;
  if (!sim.common_random_numbers)
    for (const auto& g : gammas) single.emplace_back(n, kernel, std::vector<WeightGamma>{g}, sim.sided);

  std::vector<unsigned char> hit(G * reps);
  for (std::size_t a = 0; a < placements.size(); ++a) {
    const ChangePlacement& change = placements[a];
    parallel_chunks(reps, sim.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> x(n);
      std::vector<double> out(G);
      for (std::size_t r = begin; r < end; ++r) {
        if (sim.common_random_numbers) {
          RandomStream rng(sim.seed, stream_id(tag, a), r);
          fill_series(x, sim.noise, change, 0.0, rng);
          all.evaluate(x, out);
          for (std::size_t g = 0; g < G; ++g) hit[g * reps + r] = out[g] > critical[g];
        } else {
          for (std::size_t g = 0; g < G; ++g) {
            RandomStream rng(sim.seed, stream_id(tag, a, g + 1), r);
            fill_series(x, sim.noise, change, 0.0, rng);
            single[g].evaluate(x, std::span<double>(out.data(), 1));
            hit[g * reps + r] = out[0] > critical[g];
          }
        }
      }
    });
    for (std::size_t g = 0; g < G; ++g)
      counts[g][a] = static_cast<std::size_t>(
          std::count(hit.begin() + static_cast<std::ptrdiff_t>(g * reps),
                     hit.begin() + static_cast<std::ptrdiff_t>((g + 1) * reps), 1));
  }
  return counts;
}

PowerCurve make_curve(double gamma, std::size_t n, const Kernel& kernel, double alpha,
                      std::size_t reps, double critical, std::uint64_t seed) {
  PowerCurve c;
  c.label = fmt::format("gamma={:g}", gamma);
  c.gamma = gamma;
  c.n = n;
  c.kernel = kernel.name();
  c.alpha = alpha;
  c.reps = reps;
  c.size_corrected = true;
  c.critical_value = critical;
  c.seed = seed;
  return c;
}

void fill_powers(PowerCurve& curve, std::span<const std::size_t> counts, std::size_t reps) {
  for (std::size_t hits : counts) {
    const double p = static_cast<double>(hits) / static_cast<double>(reps);
    curve.power.push_back(p);
    curve.std_error.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(reps)));
  }
}

std::size_t floor_fraction(double tau, std::size_t n) {
  // Tolerates grids such as 0.29 that are not exact in binary.
  return static_cast<std::size_t>(std::floor(tau * static_cast<double>(n) + 1e-9));
}

}  // namespace

ChangePlacement place_change(const AlternativeSpec& alternative, std::size_t n) {
  require(n >= 2, "sample size must be at least 2");
  ChangePlacement out;
  if (const auto* a1 = std::get_if<A1Regime>(&alternative)) {
    require(a1->tau_star > 0.0 && a1->tau_star < 1.0, "tau* must lie in (0, 1)");
    require(std::isfinite(a1->c), "c must be finite");
    std::size_t k = floor_fraction(a1->tau_star, n);
    if (k < 1 || k > n - 1) {
      k = std::clamp<std::size_t>(k, 1, n - 1);
      out.clamped = true;
    }
    out.k_star = k;
    out.delta = a1->c / std::sqrt(static_cast<double>(n));
  } else if (const auto* a2 = std::get_if<A2Regime>(&alternative)) {
    require(a2->c >= 0.0 && std::isfinite(a2->c), "c must be non-negative");
    require(std::isfinite(a2->delta), "delta must be finite");
    if (a2->c == 0.0) return out;
    const double raw = a2->c * std::pow(static_cast<double>(n), a2->gamma_for_kappa.kappa());
    const double rounded = std::round(raw);
    if (rounded < 1.0) {
      out.k_star = 1;
      out.clamped = true;
    } else if (rounded > static_cast<double>(n - 1)) {
      out.k_star = n - 1;
      out.clamped = true;
    } else {
      out.k_star = static_cast<std::size_t>(rounded);
    }
    out.delta = a2->delta;
  }
  out.at_boundary = out.k_star == n - 1;
  return out;
}

void fill_series(std::span<double> out, const NoiseModel& noise, const ChangePlacement& change,
                 double mu, RandomStream& rng) {
  const bool standard = noise.family() == NoiseModel::Family::StandardNormal;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double xi = standard ? rng.normal() : noise.sample(rng);
    out[i] = mu + xi + (change.k_star != 0 && i >= change.k_star ? change.delta : 0.0);
  }
}

GeneratedSeries generate_series(std::size_t n, const NoiseModel& noise,
                                const AlternativeSpec& alternative, double mu, RandomStream& rng) {
  GeneratedSeries out;
  out.change = place_change(alternative, n);
  out.boundary_warning = std::holds_alternative<A2Regime>(alternative) && out.change.at_boundary;
  out.values.resize(n);
  fill_series(out.values, noise, out.change, mu, rng);
  return out;
}

std::vector<double> empirical_critical_values(std::size_t n, const Kernel& kernel,
                                              std::span<const WeightGamma> gammas, double alpha,
                                              std::size_t reps, const SimulationOptions& options) {
  require_alpha(alpha);
  require(reps >= kMinCalibrationReps,
          fmt::format("null calibration needs at least {} replications", kMinCalibrationReps));
  const std::vector<WeightGamma> gs(gammas.begin(), gammas.end());
  const StatisticEvaluator evaluator(n, kernel, gs, options.sided);
  const std::size_t G = gs.size();
  std::vector<std::vector<double>> stats(G, std::vector<double>(reps));
  const std::uint64_t stream = stream_id("experiments.null", n);
  const ChangePlacement none{};
  parallel_chunks(reps, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(n), out(G);
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(options.seed, stream, r);
      fill_series(x, options.noise, none, 0.0, rng);
      evaluator.evaluate(x, out);
      for (std::size_t g = 0; g < G; ++g) stats[g][r] = out[g];
    }
  });
  std::vector<double> critical(G);
  for (std::size_t g = 0; g < G; ++g) critical[g] = quantile_type7(stats[g], 1.0 - alpha);
  return critical;
}

double empirical_critical_value(std::size_t n, const Kernel& kernel, WeightGamma gamma,
                                double alpha, std::size_t reps, const SimulationOptions& options) {
  const WeightGamma gs[] = {gamma};
  return empirical_critical_values(n, kernel, gs, alpha, reps, options).front();
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int i = 1; i <= 99; ++i) taus.push_back(i / 100.0);
  return taus;
}

std::vector<PowerCurve> power_curve_a1(const A1PowerConfig& config) {
  require_alpha(config.alpha);
  require(config.reps > 0, "reps must be positive");
  require(!config.taus.empty(), "tau grid is empty");
  const auto gammas = to_gammas(config.gammas);
  const auto critical = empirical_critical_values(config.n, config.kernel, gammas, config.alpha,
                                                  calibration_reps(config.sim, config.reps),
                                                  config.sim);
  std::vector<ChangePlacement> placements;
  std::size_t clamps = 0;
  for (double tau : config.taus) {
    placements.push_back(place_change(A1Regime{tau, config.c}, config.n));
    clamps += placements.back().clamped;
  }
  const auto counts = count_rejections(config.n, config.kernel, gammas, critical, placements,
                                       config.reps, config.sim, "experiments.a1");
  std::vector<PowerCurve> curves;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    PowerCurve c = make_curve(config.gammas[g], config.n, config.kernel, config.alpha,
                              config.reps, critical[g], config.sim.seed);
    c.abscissa = config.taus;
    for (const auto& p : placements) c.k_star.push_back(p.k_star);
    c.clamp_events = clamps;
    fill_powers(c, counts[g], config.reps);
    curves.push_back(std::move(c));
  }
  return curves;
}

std::vector<PowerCurve> power_curve_a2(const A2PowerConfig& config) {
  require_alpha(config.alpha);
  require(config.reps > 0, "reps must be positive");
  require(!config.c_grid.empty(), "c grid is empty");
  const auto gammas = to_gammas(config.gammas);
  const WeightGamma kappa_gamma(config.kappa_source_gamma);
  const auto critical = empirical_critical_values(config.n, config.kernel, gammas, config.alpha,
                                                  calibration_reps(config.sim, config.reps),
                                                  config.sim);
  std::vector<ChangePlacement> placements;
  std::size_t clamps = 0;
  for (double c : config.c_grid) {
    placements.push_back(place_change(A2Regime{kappa_gamma, c, config.delta}, config.n));
    clamps += placements.back().clamped;
  }
  const auto counts = count_rejections(config.n, config.kernel, gammas, critical, placements,
                                       config.reps, config.sim, "experiments.a2");
  std::vector<PowerCurve> curves;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    PowerCurve c = make_curve(config.gammas[g], config.n, config.kernel, config.alpha,
                              config.reps, critical[g], config.sim.seed);
    c.abscissa = config.c_grid;
    for (const auto& p : placements) c.k_star.push_back(p.k_star);
    c.clamp_events = clamps;
    fill_powers(c, counts[g], config.reps);
    curves.push_back(std::move(c));
  }
  return curves;
}

double envelope_power(std::size_t n, std::size_t k, double delta, double sigma, double alpha) {
  require_alpha(alpha);
  if (k < 1 || k + 1 > n)
    fail(ErrorKind::InvalidArgument,
         fmt::format("envelope_power: k = {} outside [1, {}]", k, n > 0 ? n - 1 : 0));
  require(sigma > 0.0, "sigma must be positive");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double shift = delta * std::sqrt(kk * (nn - kk) / (nn * sigma * sigma));
  return 1.0 - normal_cdf(normal_quantile(1.0 - alpha) - shift);
}

PowerCurve envelope_curve(std::size_t n, double delta, double sigma, double alpha,
                          std::span<const double> taus) {
  PowerCurve c;
  c.label = "envelope";
  c.n = n;
  c.kernel = "neyman-pearson";
  c.alpha = alpha;
  c.size_corrected = false;
  c.critical_value = normal_quantile(1.0 - alpha);
  for (double tau : taus) {
    const std::size_t k = floor_fraction(tau, n);
    c.abscissa.push_back(tau);
    c.k_star.push_back(k);
    c.power.push_back(envelope_power(n, k, delta, sigma, alpha));
    c.std_error.push_back(0.0);
  }
  return c;
}

double overall_power_ratio(const PowerCurve& curve, const PowerCurve& envelope) {
  bool same = curve.abscissa.size() == envelope.abscissa.size() && !curve.abscissa.empty();
  for (std::size_t i = 0; same && i < curve.abscissa.size(); ++i)
    same = std::abs(curve.abscissa[i] - envelope.abscissa[i]) <= 1e-12;
  if (!same) fail(ErrorKind::InvalidArgument, "overall_power_ratio: abscissa grids differ");
  const double area = trapezoid(curve.abscissa, curve.power);
  const double reference = trapezoid(envelope.abscissa, envelope.power);
  require(reference > 0.0, "overall_power_ratio: envelope area is zero");
  return 100.0 * area / reference;
}

void write_curves_csv(std::ostream& out, std::span<const PowerCurve> curves,
                      const std::vector<std::string>& metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "curve,x,k_star,power,stderr,critical_value\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.abscissa.size(); ++i)
      out << fmt::format("{},{:g},{},{:.6f},{:.6f},{:.6f}\n", c.label, c.abscissa[i],
                         c.k_star[i], c.power[i], c.std_error[i], c.critical_value);
  }
}

}  // namespace wcp
