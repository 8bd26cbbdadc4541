#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "wcp/error.hpp"
#include "wcp/limits.hpp"
#include "wcp/numeric.hpp"
#include "wcp/quantile_table.hpp"
#include "wcp/random.hpp"

using namespace wcp;

namespace {

const std::vector<double> kGammas{0.0, 0.1, 0.2, 0.3, 0.4};

// c* for gamma = 0.3, q = 1.96, u = 1, from 1.96^(1/0.7) in extended precision.
constexpr double kThresholdGamma03 = 2.6152226766578686;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("bridge grid needs at least 100 steps") {
  CHECK_THROWS_AS(BridgeGrid(99), Error);
  CHECK(BridgeGrid().steps() == 10'000);
  CHECK(BridgeGrid(200).lambda(50) == 0.25);
}

TEST_CASE("bridge paths are pinned and have the bridge covariance") {
  const BridgeGrid grid(1000);
  const std::size_t reps = 20'000;
  const std::size_t idx[] = {100, 500, 900};
  double s1[3] = {}, s2[3] = {}, s4[3] = {};
  std::vector<double> path;
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(21, stream_id("test.bridge"), r);
    sample_bridge_path(grid, rng, path);
    REQUIRE(path.size() == 1001);
    CHECK(path.front() == 0.0);
    CHECK(path.back() == 0.0);
    for (int j = 0; j < 3; ++j) {
      const double v = path[idx[j]];
      s1[j] += v;
      s2[j] += v * v;
      s4[j] += v * v * v * v;
    }
  }
  for (int j = 0; j < 3; ++j) {
    const double l = grid.lambda(idx[j]);
    const double var = l * (1.0 - l);
    const double mean = s1[j] / reps;
    const double m2 = s2[j] / reps;
    const double se_mean = std::sqrt(var / reps);
    const double se_m2 = std::sqrt((s4[j] / reps - m2 * m2) / reps);
    CHECK(std::abs(mean) <= 3.0 * se_mean);
    CHECK(std::abs(m2 - var) <= 3.0 * se_m2);
  }
}

TEST_CASE("weighted sup dominates the weighted midpoint value") {
  std::vector<WeightGamma> gs;
  for (double g : kGammas) gs.emplace_back(g);
  const WeightedSupSampler sampler(BridgeGrid(1000), gs);
  std::vector<double> path, one(gs.size()), two(gs.size());
  for (std::size_t r = 0; r < 200; ++r) {
    RandomStream rng(22, stream_id("test.midpoint"), r);
    sampler.sample(rng, path, one, two);
    for (std::size_t g = 0; g < gs.size(); ++g) {
      const double mid = path[500] * std::pow(4.0, kGammas[g]);
      CHECK(one[g] >= mid);
      CHECK(two[g] >= std::abs(mid));
      CHECK(two[g] >= one[g]);
      CHECK(two[g] >= 0.0);
    }
  }
}

TEST_CASE("single-draw sampler agrees with the batched sampler") {
  const BridgeGrid grid(500);
  const WeightedSupSampler batch(grid, {WeightGamma(0.0), WeightGamma(0.3)});
  std::vector<double> path, one(2), two(2);
  for (std::size_t r = 0; r < 20; ++r) {
    RandomStream a(23, 1, r), b(23, 1, r), c(23, 1, r);
    batch.sample(a, path, one, two);
    CHECK(sample_weighted_bridge_sup(WeightGamma(0.3), grid, b) == one[1]);
    CHECK(sample_weighted_bridge_sup(WeightGamma(0.3), grid, c, Sidedness::TwoSidedMaxAbs) ==
          two[1]);
  }
}

TEST_CASE("exact bridge maximum follows exp(-2 x^2)") {
  const BridgeGrid grid(100);
  const std::size_t reps = 100'000;
  std::vector<double> draws(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(24, stream_id("test.exact_sup"), r);
    draws[r] = sample_bridge_sup_exact(grid, rng);
  }
  for (double x : {0.5, 1.0, 1.5}) {
    const double p = std::exp(-2.0 * x * x);
    const double hits = static_cast<double>(std::count_if(draws.begin(), draws.end(),
                                                          [x](double d) { return d > x; }));
    const double se = std::sqrt(p * (1.0 - p) / reps);
    INFO("x = " << x);
    CHECK(std::abs(hits / reps - p) <= 3.0 * se);
  }
}

TEST_CASE("gridded sup tail is close to the closed form at m = 10^4") {
  const BridgeGrid grid;
  const std::size_t reps = 4000;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(25, stream_id("test.grid_tail"), r);
    hits += sample_weighted_bridge_sup(WeightGamma(0.0), grid, rng) > 1.2238734153404083;
  }
  const double rate = static_cast<double>(hits) / reps;
  CHECK(std::abs(rate - 0.05) <= 3.0 * std::sqrt(0.05 * 0.95 / reps) + 0.003);
}

TEST_CASE("quantile tables are monotone and deterministic across threads") {
  QuantileTableConfig config;
  config.reps = 20'000;
  config.grid_steps = 2000;
  config.bootstrap_reps = 50;
  config.seed = 31;
  config.threads = 1;
  const QuantileTables a = build_quantile_tables(config);
  config.threads = 3;
  const QuantileTables b = build_quantile_tables(config);

  for (const QuantileTable* t : {&a.one_sided, &a.two_sided}) {
    CHECK(t->size() == 15);
    for (double g : kGammas) {
      CHECK(t->at(g, 0.1).quantile < t->at(g, 0.05).quantile);
      CHECK(t->at(g, 0.05).quantile < t->at(g, 0.01).quantile);
    }
    for (double alpha : {0.1, 0.05, 0.01})
      for (std::size_t i = 1; i < kGammas.size(); ++i)
        CHECK(t->at(kGammas[i - 1], alpha).quantile < t->at(kGammas[i], alpha).quantile);
  }
  for (double g : kGammas) {
    for (double alpha : {0.1, 0.05, 0.01}) {
      const auto& e = a.one_sided.at(g, alpha);
      CHECK(e.reps == 20'000);
      CHECK(e.grid_m == 2000);
      CHECK(e.std_error > 0.0);
      CHECK(e.std_error < 0.05);
      CHECK(a.two_sided.at(g, alpha).quantile > e.quantile);
      CHECK(b.one_sided.at(g, alpha).quantile == e.quantile);
      CHECK(b.one_sided.at(g, alpha).std_error == e.std_error);
      CHECK(b.two_sided.at(g, alpha).quantile == a.two_sided.at(g, alpha).quantile);
    }
  }
  std::ostringstream sa, sb;
  a.one_sided.write_csv(sa);
  b.one_sided.write_csv(sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("bootstrap standard error tracks the sample size") {
  QuantileTableConfig config;
  config.gammas = {0.0};
  config.alphas = {0.05};
  config.grid_steps = 200;
  config.bootstrap_reps = 200;
  config.reps = 2000;
  const double small = build_quantile_table(config).at(0.0, 0.05).std_error;
  config.reps = 32'000;
  const double large = build_quantile_table(config).at(0.0, 0.05).std_error;
  // Ratio should be about 4.
  CHECK(small / large > 2.5);
  CHECK(small / large < 6.0);
}

TEST_CASE("quantile table rejects invalid configurations") {
  QuantileTableConfig config;
  config.reps = 5;
  CHECK_THROWS_AS(build_quantile_tables(config), Error);
  config.reps = 10;
  config.grid_steps = 100;
  config.bootstrap_reps = 10;
  CHECK_NOTHROW(build_quantile_tables(config));
  config.alphas = {0.0};
  CHECK_THROWS_AS(build_quantile_tables(config), Error);
  config.alphas = {0.05};
  config.gammas = {0.5};
  CHECK_THROWS_AS(build_quantile_tables(config), Error);
}

TEST_CASE("finer grids give larger suprema, and m = 2000 is close to m = 10^4") {
  // The coarse path is the fine path read at every fifth node, so the coarse
  // sup can never exceed the fine one.
  const BridgeGrid fine(10'000), coarse(2000);
  std::vector<WeightGamma> gs;
  for (double g : kGammas) gs.emplace_back(g);
  const WeightedSupSampler fine_sampler(fine, gs), coarse_sampler(coarse, gs);
  const std::size_t reps = 10'000;
  std::vector<std::vector<double>> f(gs.size(), std::vector<double>(reps)),
      c(gs.size(), std::vector<double>(reps));
  std::vector<double> path, sub(2001), one(gs.size()), two(gs.size()), one_c(gs.size()),
      two_c(gs.size());
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(26, stream_id("test.grid_convergence"), r);
    fine_sampler.sample(rng, path, one, two);
    for (std::size_t i = 0; i <= 2000; ++i) sub[i] = path[5 * i];
    coarse_sampler.suprema(sub, one_c, two_c);
    for (std::size_t g = 0; g < gs.size(); ++g) {
      CHECK(one_c[g] <= one[g]);
      f[g][r] = one[g];
      c[g][r] = one_c[g];
    }
  }
  for (std::size_t g = 0; g < gs.size(); ++g) {
    for (double alpha : {0.1, 0.05, 0.01}) {
      const double qf = quantile_type7(f[g], 1.0 - alpha);
      const double qc = quantile_type7(c[g], 1.0 - alpha);
      INFO("gamma = " << kGammas[g] << ", alpha = " << alpha);
      CHECK(qc <= qf);
      // Near the endpoints the grid error decays like m^-(1/2 - gamma); at
      // gamma = 0.4 the gap is about 0.020 itself.
      CHECK(qf - qc < (kGammas[g] < 0.35 ? 0.02 : 0.03));
    }
  }
}

TEST_CASE("phi_tau is the tent with peak tau (1 - tau)") {
  CHECK(phi_tau(0.0, 0.3) == 0.0);
  CHECK(phi_tau(1.0, 0.3) == 0.0);
  CHECK(phi_tau(0.3, 0.3) == doctest::Approx(0.21));
  CHECK(phi_tau(0.1, 0.3) == doctest::Approx(0.07));
  CHECK(phi_tau(0.8, 0.3) == doctest::Approx(0.06));
}

TEST_CASE("A1 limit sampler examples") {
  const BridgeGrid grid(1000);
  RandomStream rng(27, 1);
  CHECK(sample_limit_a1({WeightGamma(0.0), 0.5, 2.0, 0.0}, grid, rng) ==
        doctest::Approx(0.5).epsilon(1e-15));
  for (std::size_t r = 0; r < 20; ++r) {
    for (double g : {0.0, 0.3}) {
      RandomStream a(27, 2, r), b(27, 2, r);
      const double drifted = sample_limit_a1({WeightGamma(g), 0.4, 0.0, 1.7}, grid, a);
      const double plain = 1.7 * sample_weighted_bridge_sup(WeightGamma(g), grid, b);
      CHECK(drifted == doctest::Approx(plain).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(sample_limit_a1({WeightGamma(0.0), 1.0, 1.0, 1.0}, grid, rng), Error);
}

TEST_CASE("A2 limit samplers reject the wrong regime") {
  const BridgeGrid grid(100);
  RandomStream rng(28, 1);
  CHECK(kind_of([&] { sample_limit_a2_unweighted({WeightGamma(0.1), 1, 1, 1}, grid, rng); }) ==
        ErrorKind::WrongRegime);
  CHECK(kind_of([&] { sample_limit_a2_weighted({WeightGamma(0.0), 1, 1, 1}, grid, rng); }) ==
        ErrorKind::WrongRegime);
}

TEST_CASE("unweighted A2 limit examples and monotonicity in c") {
  const BridgeGrid grid(1000);
  RandomStream rng(29, 1);
  CHECK(sample_limit_a2_unweighted({WeightGamma(0.0), 3.0, 0.4, 0.0}, grid, rng) ==
        doctest::Approx(1.2).epsilon(1e-15));
  for (std::size_t r = 0; r < 20; ++r) {
    RandomStream a(29, 2, r), b(29, 2, r);
    CHECK(sample_limit_a2_unweighted({WeightGamma(0.0), 0.0, 1.0, 0.5}, grid, a) ==
          doctest::Approx(0.5 * sample_weighted_bridge_sup(WeightGamma(0.0), grid, b,
                                                           Sidedness::TwoSidedMaxAbs)));
  }

  // Two-sided 5% point of sup |W0| is 1.3581 (Kolmogorov distribution).
  const double q = 1.3581;
  const std::size_t reps = 4000;
  double previous = 0.0;
  for (double c : {0.0, 1.0, 2.0, 3.0, 5.0, 10.0}) {
    const auto rate = exceedance_probability(
        [&](RandomStream& s) {
          return sample_limit_a2_unweighted({WeightGamma(0.0), c, 1.0, 1.0}, grid, s);
        },
        q, reps, 29, stream_id("test.a2.unweighted"));
    if (c == 0.0) CHECK(std::abs(rate.probability - 0.05) <= 4.0 * std::sqrt(0.05 * 0.95 / reps));
    if (c == 10.0) CHECK(rate.probability == 1.0);
    CHECK(rate.probability >= previous);
    previous = rate.probability;
  }
}

TEST_CASE("weighted A2 limit: power is alpha below the threshold and 1 above it") {
  const BridgeGrid grid(1000);
  const WeightGamma g(0.3);
  const std::size_t reps = 5000;
  const std::uint64_t stream = stream_id("test.a2.weighted");
  std::vector<double> null_draws(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(30, stream, r);
    null_draws[r] = sample_limit_a2_weighted({g, 0.0, 1.0, 1.0}, grid, rng);
    RandomStream check(30, stream, r);
    CHECK(null_draws[r] ==
          sample_weighted_bridge_sup(g, grid, check, Sidedness::TwoSidedMaxAbs));
  }
  const double q = quantile_type7(null_draws, 0.95);
  const double c_star = consistency_threshold(g, q, 1.0);
  auto rate_at = [&](double c) {
    return exceedance_probability(
        [&](RandomStream& s) { return sample_limit_a2_weighted({g, c, 1.0, 1.0}, grid, s); }, q,
        reps, 30, stream);
  };
  const auto below = rate_at(0.8 * c_star);
  const auto above = rate_at(1.2 * c_star);
  // Same streams as the quantile, so below the threshold the rate is the
  // empirical exceedance of q itself.
  CHECK(std::abs(below.probability - 0.05) <= 1.0 / reps);
  CHECK(above.probability == 1.0);
}

TEST_CASE("consistency_threshold examples") {
  CHECK(consistency_threshold(WeightGamma(0.3), 1.96, 1.0) ==
        doctest::Approx(kThresholdGamma03).epsilon(1e-14));
  CHECK(consistency_threshold(WeightGamma(0.2), 0.7, 0.7) == doctest::Approx(1.0));
  CHECK(consistency_threshold(WeightGamma(1e-9), 1.5, 0.5) ==
        doctest::Approx(3.0).epsilon(1e-7));
  CHECK(kind_of([] { consistency_threshold(WeightGamma(0.3), 1.96, 0.0); }) ==
        ErrorKind::UndetectableDirection);
  CHECK(kind_of([] { consistency_threshold(WeightGamma(0.3), 1.96, -0.5); }) ==
        ErrorKind::UndetectableDirection);
  CHECK(kind_of([] { consistency_threshold(WeightGamma(0.0), 1.96, 1.0); }) ==
        ErrorKind::WrongRegime);
}

TEST_CASE("exceedance_probability does not depend on the thread count") {
  const BridgeGrid grid(200);
  auto sampler = [&](RandomStream& s) {
    return sample_limit_a1({WeightGamma(0.2), 0.3, 3.0, 1.0}, grid, s);
  };
  const auto a = exceedance_probability(sampler, 1.3, 3000, 5, 9, 1);
  const auto b = exceedance_probability(sampler, 1.3, 3000, 5, 9, 4);
  CHECK(a.probability == b.probability);
  CHECK(a.std_error == doctest::Approx(std::sqrt(a.probability * (1 - a.probability) / 3000)));
}

TEST_CASE("published table holds the tabulated values") {
  const QuantileTable t = QuantileTable::published_one_sided();
  CHECK(t.size() == 15);
  CHECK(t.sided() == Sidedness::OneSidedMax);
  CHECK(t.at(0.0, 0.05).quantile == 1.20);
  CHECK(t.at(0.3, 0.05).quantile == 1.96);
  CHECK(t.at(0.4, 0.01).quantile == 2.83);
  CHECK(t.at(0.0, 0.1).quantile == 1.05);
  CHECK_FALSE(t.find(0.25, 0.05).has_value());
  CHECK(kind_of([&] { (void)t.at(0.0, 0.2); }) == ErrorKind::TableMiss);
}
