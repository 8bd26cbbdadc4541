#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wcp/quantile_table.hpp"
#include "wcp/random.hpp"
#include "wcp/types.hpp"

namespace wcp {

// Uniform grid lambda_i = i/m on [0, 1]. Weighted suprema use the interior
// points i = 1..m-1; with gamma = 0 the endpoints are included as well since
// the weight is finite there.
class BridgeGrid {
 public:
  static constexpr std::size_t kDefaultSteps = 10'000;

  explicit BridgeGrid(std::size_t steps = kDefaultSteps);

  std::size_t steps() const noexcept { return steps_; }
  double lambda(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(steps_);
  }

 private:
  std::size_t steps_;
};

// Fills path[0..m] with a Brownian bridge on the grid: cumulative sums of
// N(0, 1/m) increments W, then W0(l_i) = W(l_i) - l_i W(1).
void sample_bridge_path(const BridgeGrid& grid, RandomStream& rng, std::vector<double>& path);

// Computes one-sided and two-sided weighted suprema of bridge paths for a
// fixed set of weights, with the inverse weights precomputed.
class WeightedSupSampler {
 public:
  WeightedSupSampler(BridgeGrid grid, std::vector<WeightGamma> gammas);

  const BridgeGrid& grid() const noexcept { return grid_; }
  const std::vector<WeightGamma>& gammas() const noexcept { return gammas_; }

  // Draws one bridge into `path` (resized as needed) and writes
  // sup W0/w and sup |W0|/w for every gamma.
  void sample(RandomStream& rng, std::vector<double>& path, std::span<double> one_sided,
              std::span<double> two_sided) const;

  // Suprema of an existing path.
  void suprema(std::span<const double> path, std::span<double> one_sided,
               std::span<double> two_sided) const;

 private:
  BridgeGrid grid_;
  std::vector<WeightGamma> gammas_;
  std::vector<std::vector<double>> inverse_weights_;  // [gamma][i], i = 0..m
  std::vector<std::size_t> first_;                    // first admissible index per gamma
};

// One draw of sup_l W0(l)/(l(1-l))^gamma (or of |W0| when two-sided).
double sample_weighted_bridge_sup(WeightGamma gamma, const BridgeGrid& grid, RandomStream& rng,
                                  Sidedness sided = Sidedness::OneSidedMax);

// One draw of the continuous-time sup_l W0(l) (gamma = 0, one-sided). Each
// grid interval contributes the exact maximum of a bridge between its
// endpoint values, drawn by inversion of
//   P(max > y | a, b) = exp(-2 (y - a)(y - b) / h),
// so the result carries no discretization bias.
double sample_bridge_sup_exact(const BridgeGrid& grid, RandomStream& rng);

struct QuantileTableConfig {
  std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> alphas{0.1, 0.05, 0.01};
  std::size_t reps = 100'000;
  std::size_t grid_steps = BridgeGrid::kDefaultSteps;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  std::size_t bootstrap_reps = 200;
};

struct QuantileTables {
  QuantileTable one_sided{Sidedness::OneSidedMax};
  QuantileTable two_sided{Sidedness::TwoSidedMaxAbs};
};

inline constexpr std::size_t kMinTableReps = 10;
inline constexpr std::size_t kRecommendedTableReps = 1000;

// Empirical (1 - alpha)-quantiles (type 7) of the weighted bridge suprema,
// with bootstrap standard errors. Both sidednesses come from the same paths.
// Replication r always uses substream r, so results do not depend on the
// thread count.
QuantileTables build_quantile_tables(const QuantileTableConfig& config);

QuantileTable build_quantile_table(const QuantileTableConfig& config,
                                   Sidedness sided = Sidedness::OneSidedMax);

// phi_tau(l) = l (1 - tau) for l <= tau, tau (1 - l) otherwise.
double phi_tau(double lambda, double tau);

struct A1LimitSpec {
  WeightGamma gamma{0.0};
  double tau_star = 0.5;
  double c_g = 0.0;
  double sigma = 1.0;
};

// One draw of sup_l [sigma W0(l) + c_g phi_tau(l)] / (l(1-l))^gamma.
double sample_limit_a1(const A1LimitSpec& spec, const BridgeGrid& grid, RandomStream& rng);

struct A2LimitSpec {
  WeightGamma gamma{0.0};
  double c = 0.0;
  double u_delta = 0.0;
  double sigma = 1.0;

  double kappa() const noexcept { return gamma.kappa(); }
};

// gamma = 0: one draw of sup_l |sigma W0(l) + c (1 - l) u(delta)|.
double sample_limit_a2_unweighted(const A2LimitSpec& spec, const BridgeGrid& grid,
                                  RandomStream& rng);

// gamma > 0: one draw of max{c^{1-gamma} |u(delta)|, sigma sup_l |W0(l)|/(l(1-l))^gamma}.
double sample_limit_a2_weighted(const A2LimitSpec& spec, const BridgeGrid& grid,
                                RandomStream& rng);

// c* = (q_alpha / u(delta))^{1/(1-gamma)}: asymptotic power is 1 when
// k*/n^kappa stays above c*, and alpha when it stays below.
double consistency_threshold(WeightGamma gamma, double q_alpha, double u_delta);

struct RejectionRate {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
};

// P(draw > critical) over `reps` draws, draw r using substream r of the
// stream named by `stream`.
RejectionRate exceedance_probability(const std::function<double(RandomStream&)>& sampler,
                                     double critical, std::size_t reps, std::uint64_t seed,
                                     std::uint64_t stream, unsigned threads = 1);

}  // namespace wcp
