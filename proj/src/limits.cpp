#include "wcp/limits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "wcp/error.hpp"
#include "wcp/numeric.hpp"
#include "wcp/parallel.hpp"

namespace wcp {

namespace {

std::vector<double> inverse_weights(const BridgeGrid& grid, WeightGamma gamma) {
  const std::size_t m = grid.steps();
  std::vector<double> inv(m + 1, 0.0);
  for (std::size_t i = 0; i <= m; ++i) {
    if (gamma.value() == 0.0) {
      inv[i] = 1.0;
    } else if (i > 0 && i < m) {
      inv[i] = 1.0 / gamma.weight_at(grid.lambda(i));
    }
  }
  return inv;
}

// Inverse weights of the most recent (gamma, m) seen by this thread.
const std::vector<double>& cached_inverse_weights(const BridgeGrid& grid, WeightGamma gamma) {
  thread_local double cached_gamma = -1.0;
  thread_local std::size_t cached_steps = 0;
  thread_local std::vector<double> cached;
  if (cached_gamma != gamma.value() || cached_steps != grid.steps()) {
    cached = inverse_weights(grid, gamma);
    cached_gamma = gamma.value();
    cached_steps = grid.steps();
  }
  return cached;
}

// Index range over which suprema are taken for a given weight.
inline std::pair<std::size_t, std::size_t> admissible(const BridgeGrid& grid, WeightGamma gamma) {
  return gamma.value() == 0.0 ? std::pair{std::size_t{0}, grid.steps()}
                              : std::pair{std::size_t{1}, grid.steps() - 1};
}

}  // namespace

BridgeGrid::BridgeGrid(std::size_t steps) : steps_(steps) {
  if (steps < 100)
    fail(ErrorKind::InvalidArgument,
         "bridge grid needs at least 100 steps, got " + std::to_string(steps));
}

void sample_bridge_path(const BridgeGrid& grid, RandomStream& rng, std::vector<double>& path) {
  const std::size_t m = grid.steps();
  path.resize(m + 1);
  const double step_sd = 1.0 / std::sqrt(static_cast<double>(m));
  path[0] = 0.0;
  double w = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    w += step_sd * rng.normal();
    path[i] = w;
  }
  const double end = path[m];
  for (std::size_t i = 1; i < m; ++i) path[i] -= grid.lambda(i) * end;
  path[m] = 0.0;
}

WeightedSupSampler::WeightedSupSampler(BridgeGrid grid, std::vector<WeightGamma> gammas)
    : grid_(grid), gammas_(std::move(gammas)) {
  require(!gammas_.empty(), "WeightedSupSampler: no gamma values");
  for (const auto& g : gammas_) {
    inverse_weights_.push_back(inverse_weights(grid_, g));
    first_.push_back(admissible(grid_, g).first);
  }
}

void WeightedSupSampler::sample(RandomStream& rng, std::vector<double>& path,
                                std::span<double> one_sided, std::span<double> two_sided) const {
  sample_bridge_path(grid_, rng, path);
  suprema(path, one_sided, two_sided);
}

void WeightedSupSampler::suprema(std::span<const double> path, std::span<double> one_sided,
                                 std::span<double> two_sided) const {
  require(path.size() == grid_.steps() + 1, "WeightedSupSampler: path length mismatch");
  require(one_sided.size() == gammas_.size() && two_sided.size() == gammas_.size(),
          "WeightedSupSampler: output size mismatch");
  for (std::size_t g = 0; g < gammas_.size(); ++g) {
    const auto& inv = inverse_weights_[g];
    const std::size_t lo = first_[g];
    const std::size_t hi = grid_.steps() - lo;
    double top = -std::numeric_limits<double>::infinity();
    double bottom = std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i <= hi; ++i) {
      const double v = path[i] * inv[i];
      top = std::max(top, v);
      bottom = std::min(bottom, v);
    }
    one_sided[g] = top;
    two_sided[g] = std::max(top, -bottom);
  }
}

double sample_weighted_bridge_sup(WeightGamma gamma, const BridgeGrid& grid, RandomStream& rng,
                                  Sidedness sided) {
  std::vector<double> path;
  sample_bridge_path(grid, rng, path);
  const auto& inv = cached_inverse_weights(grid, gamma);
  const auto [lo, hi] = admissible(grid, gamma);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i <= hi; ++i) {
    const double v = path[i] * inv[i];
    best = std::max(best, sided == Sidedness::OneSidedMax ? v : std::abs(v));
  }
  return best;
}

double sample_bridge_sup_exact(const BridgeGrid& grid, RandomStream& rng) {
  std::vector<double> path;
  sample_bridge_path(grid, rng, path);
  const double h = 1.0 / static_cast<double>(grid.steps());
  double best = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double a = path[i];
    const double b = path[i + 1];
    const double spread = (a - b) * (a - b) - 2.0 * h * std::log(rng.uniform());
    best = std::max(best, 0.5 * (a + b + std::sqrt(spread)));
  }
  return best;
}

QuantileTables build_quantile_tables(const QuantileTableConfig& config) {
  require(config.reps >= kMinTableReps,
          fmt::format("quantile table needs at least {} replications", kMinTableReps));
  require(!config.gammas.empty() && !config.alphas.empty(), "quantile table needs gammas and alphas");
  for (double a : config.alphas) require(a > 0.0 && a < 1.0, "alpha must lie in (0, 1)");
  std::vector<WeightGamma> gammas;
  for (double g : config.gammas) gammas.emplace_back(g);

  const WeightedSupSampler sampler(BridgeGrid(config.grid_steps), gammas);
  const std::size_t cols = 2 * gammas.size();
  const std::size_t reps = config.reps;
  // samples[col][r], col = 2 g + side (0 one-sided, 1 two-sided).
  std::vector<std::vector<double>> samples(cols, std::vector<double>(reps));

  const std::uint64_t bridge_stream = stream_id("limits.bridge");
  parallel_chunks(reps, config.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> path;
    std::vector<double> one(gammas.size()), two(gammas.size());
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(config.seed, bridge_stream, r);
      sampler.sample(rng, path, one, two);
      for (std::size_t g = 0; g < gammas.size(); ++g) {
        samples[2 * g][r] = one[g];
        samples[2 * g + 1][r] = two[g];
      }
    }
  });

  std::vector<std::vector<std::size_t>> order(cols, std::vector<std::size_t>(reps));
  std::vector<std::vector<double>> sorted(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    auto& o = order[c];
    std::iota(o.begin(), o.end(), std::size_t{0});
    const auto& s = samples[c];
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
    sorted[c].resize(reps);
    for (std::size_t i = 0; i < reps; ++i) sorted[c][i] = s[o[i]];
  }

  // Ranks needed by the type-7 estimator at each level.
  const std::size_t n_alpha = config.alphas.size();
  std::vector<std::pair<std::size_t, double>> rank_and_frac(n_alpha);
  for (std::size_t a = 0; a < n_alpha; ++a) {
    const double h = (static_cast<double>(reps) - 1.0) * (1.0 - config.alphas[a]);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    rank_and_frac[a] = {lo, h - static_cast<double>(lo)};
  }

  // Distinct ranks, largest first, and where each level finds its two.
  std::vector<std::size_t> wanted;
  for (const auto& [lo, frac] : rank_and_frac) {
    wanted.push_back(lo);
    wanted.push_back(std::min(lo + 1, reps - 1));
  }
  std::sort(wanted.begin(), wanted.end(), std::greater<>());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  std::vector<std::size_t> slot_lo(n_alpha), slot_hi(n_alpha);
  for (std::size_t a = 0; a < n_alpha; ++a) {
    const std::size_t lo = rank_and_frac[a].first;
    const std::size_t hi = std::min(lo + 1, reps - 1);
    slot_lo[a] = static_cast<std::size_t>(std::find(wanted.begin(), wanted.end(), lo) - wanted.begin());
    slot_hi[a] = static_cast<std::size_t>(std::find(wanted.begin(), wanted.end(), hi) - wanted.begin());
  }

  // Bootstrap over replications; a resample is a multiplicity vector, shared
  // by every column.
  const std::size_t boots = config.bootstrap_reps;
  std::vector<double> boot(boots * cols * n_alpha, 0.0);
  const std::uint64_t boot_stream = stream_id("limits.bootstrap");
  parallel_chunks(boots, config.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> counts(reps);
    std::vector<double> rank_value(wanted.size());
    for (std::size_t b = begin; b < end; ++b) {
      std::fill(counts.begin(), counts.end(), 0u);
      RandomStream rng(config.seed, boot_stream, b);
      for (std::size_t t = 0; t < reps; ++t) ++counts[rng.below(reps)];
      for (std::size_t c = 0; c < cols; ++c) {
        const auto& o = order[c];
        const auto& s = sorted[c];
        // Walk down from the largest value; the bootstrap order statistic of
        // rank q (0-based) sits at the first position whose cumulative
        // multiplicity from below exceeds q.
        std::size_t next = 0;  // index into wanted, largest rank first
        std::size_t above = 0;
        for (std::size_t i = reps; i-- > 0 && next < wanted.size();) {
          const std::size_t count_i = counts[o[i]];
          const std::size_t below = reps - above - count_i;
          while (next < wanted.size() && wanted[next] >= below) {
            rank_value[next] = s[i];
            ++next;
          }
          above += count_i;
        }
        for (std::size_t a = 0; a < n_alpha; ++a) {
          const double frac = rank_and_frac[a].second;
          const double v_lo = rank_value[slot_lo[a]];
          const double v_hi = rank_value[slot_hi[a]];
          boot[(b * cols + c) * n_alpha + a] = v_lo + frac * (v_hi - v_lo);
        }
      }
    }
  });

  QuantileTables out;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    for (int side = 0; side < 2; ++side) {
      const std::size_t c = 2 * g + static_cast<std::size_t>(side);
      for (std::size_t a = 0; a < n_alpha; ++a) {
        QuantileEntry e;
        e.quantile = sorted_quantile_type7(sorted[c], 1.0 - config.alphas[a]);
        if (boots > 1) {
          double mean = 0.0;
          for (std::size_t b = 0; b < boots; ++b) mean += boot[(b * cols + c) * n_alpha + a];
          mean /= static_cast<double>(boots);
          double ss = 0.0;
          for (std::size_t b = 0; b < boots; ++b) {
            const double d = boot[(b * cols + c) * n_alpha + a] - mean;
            ss += d * d;
          }
          e.std_error = std::sqrt(ss / static_cast<double>(boots - 1));
        }
        e.reps = reps;
        e.grid_m = config.grid_steps;
        (side == 0 ? out.one_sided : out.two_sided).set(gammas[g].value(), config.alphas[a], e);
      }
    }
  }
  return out;
}

QuantileTable build_quantile_table(const QuantileTableConfig& config, Sidedness sided) {
  QuantileTables both = build_quantile_tables(config);
  return sided == Sidedness::OneSidedMax ? std::move(both.one_sided) : std::move(both.two_sided);
}

double phi_tau(double lambda, double tau) {
  return lambda <= tau ? lambda * (1.0 - tau) : tau * (1.0 - lambda);
}

double sample_limit_a1(const A1LimitSpec& spec, const BridgeGrid& grid, RandomStream& rng) {
  require(spec.tau_star > 0.0 && spec.tau_star < 1.0, "tau* must lie in (0, 1)");
  require(spec.sigma >= 0.0, "sigma must be non-negative");
  std::vector<double> path;
  sample_bridge_path(grid, rng, path);
  const auto& inv = cached_inverse_weights(grid, spec.gamma);
  const auto [lo, hi] = admissible(grid, spec.gamma);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i <= hi; ++i) {
    const double drift = spec.c_g * phi_tau(grid.lambda(i), spec.tau_star);
    best = std::max(best, (spec.sigma * path[i] + drift) * inv[i]);
  }
  return best;
}

double sample_limit_a2_unweighted(const A2LimitSpec& spec, const BridgeGrid& grid,
                                  RandomStream& rng) {
  if (spec.gamma.value() != 0.0)
    fail(ErrorKind::WrongRegime, "unweighted early-change limit requires gamma = 0");
  require(spec.sigma >= 0.0, "sigma must be non-negative");
  std::vector<double> path;
  sample_bridge_path(grid, rng, path);
  double best = 0.0;
  for (std::size_t i = 0; i <= grid.steps(); ++i) {
    const double drift = spec.c * (1.0 - grid.lambda(i)) * spec.u_delta;
    best = std::max(best, std::abs(spec.sigma * path[i] + drift));
  }
  return best;
}

double sample_limit_a2_weighted(const A2LimitSpec& spec, const BridgeGrid& grid,
                                RandomStream& rng) {
  if (spec.gamma.value() == 0.0)
    fail(ErrorKind::WrongRegime, "weighted early-change limit requires gamma > 0");
  require(spec.sigma >= 0.0 && spec.c >= 0.0, "sigma and c must be non-negative");
  const double atom = std::pow(spec.c, 1.0 - spec.gamma.value()) * std::abs(spec.u_delta);
  const double sup =
      spec.sigma * sample_weighted_bridge_sup(spec.gamma, grid, rng, Sidedness::TwoSidedMaxAbs);
  return std::max(atom, sup);
}

double consistency_threshold(WeightGamma gamma, double q_alpha, double u_delta) {
  if (gamma.value() == 0.0)
    fail(ErrorKind::WrongRegime, "consistency threshold is defined for gamma > 0");
  require(q_alpha > 0.0, "critical value must be positive");
  if (!(u_delta > 0.0))
    fail(ErrorKind::UndetectableDirection,
         "u(delta) must be positive for the change to be detectable");
  return std::pow(q_alpha / u_delta, 1.0 / (1.0 - gamma.value()));
}

RejectionRate exceedance_probability(const std::function<double(RandomStream&)>& sampler,
                                     double critical, std::size_t reps, std::uint64_t seed,
                                     std::uint64_t stream, unsigned threads) {
  require(reps > 0, "exceedance_probability: reps must be positive");
  std::vector<unsigned char> hit(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    RandomStream rng(seed, stream, r);
    hit[r] = sampler(rng) > critical ? 1 : 0;
  });
  const double count = static_cast<double>(std::count(hit.begin(), hit.end(), 1));
  const double p = count / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps)), reps};
}

}  // namespace wcp
