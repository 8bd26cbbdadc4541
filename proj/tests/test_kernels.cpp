#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "wcp/error.hpp"
#include "wcp/kernels.hpp"
#include "wcp/numeric.hpp"
#include "wcp/random.hpp"

using namespace wcp;

namespace {

// Reference values from an independent double-precision evaluation of the
// normal CDF and of the integrals involved.
constexpr double kWilcoxonU1 = 0.26024993890652326;     // Phi(1/sqrt 2) - 1/2
constexpr double kWilcoxonU05 = 0.13816319508411845;    // Phi(0.5/sqrt 2) - 1/2
constexpr double kProjectionAt0 = 0.05329926618989467;  // Phi(0) - Phi(-0.5) - u(0.5)
constexpr double kWilcoxonDrift5 = 1.4104739588693893;  // 5 / (2 sqrt(pi))
constexpr double kLaplaceU1 = 0.22409041912141833;      // Laplace(1), delta = 1
constexpr double kTanhDrift2 = 0.9600485086721029;      // 2 E[sech^2(xi - eta)]

Kernel sign_kernel() {
  return Kernel::custom("sign", [](double x) { return x > 0 ? 0.5 : (x < 0 ? -0.5 : 0.0); });
}

}  // namespace

TEST_CASE("eval_kernel examples") {
  CHECK(eval_kernel(Kernel::cusum(), 3.5) == 3.5);
  CHECK(eval_kernel(Kernel::wilcoxon(), -0.2) == -0.5);
  CHECK(eval_kernel(Kernel::wilcoxon(), 0.0) == 0.0);
  CHECK(eval_kernel(Kernel::wilcoxon(), 1e-300) == 0.5);
  CHECK_THROWS_AS(eval_kernel(Kernel::cusum(), std::numeric_limits<double>::quiet_NaN()),
                  Error);
  CHECK_THROWS_AS(eval_kernel(Kernel::wilcoxon(), std::numeric_limits<double>::infinity()),
                  Error);
}

TEST_CASE("kernel kinds round-trip through their names") {
  for (auto kind : {KernelKind::Cusum, KernelKind::Wilcoxon})
    CHECK(parse_kernel_kind(to_string(kind)) == kind);
  CHECK(parse_kernel_kind("CUSUM") == KernelKind::Cusum);
  CHECK_THROWS_AS(parse_kernel_kind("median"), Error);
}

TEST_CASE("built-in and custom kernels are odd") {
  RandomStream rng(5, stream_id("test.oddness"));
  const Kernel cubic = Kernel::custom("tanh", [](double x) { return std::tanh(x); });
  for (int i = 0; i < 1000; ++i) {
    const double x = 10.0 * (rng.uniform() - 0.5);
    CHECK(eval_kernel(Kernel::cusum(), -x) == -eval_kernel(Kernel::cusum(), x));
    CHECK(eval_kernel(Kernel::wilcoxon(), -x) == -eval_kernel(Kernel::wilcoxon(), x));
    CHECK(std::abs(eval_kernel(cubic, -x) + eval_kernel(cubic, x)) <= 1e-12);
  }
}

TEST_CASE("u_of_delta examples") {
  const auto normal = NoiseModel::standard_normal();
  CHECK(u_of_delta(Kernel::cusum(), normal, 0.7).value == 0.7);
  CHECK(u_of_delta(Kernel::cusum(), NoiseModel::laplace(2.0), 0.7).value == 0.7);
  const Estimate w = u_of_delta(Kernel::wilcoxon(), normal, 1.0);
  CHECK(w.exact());
  CHECK(w.value == doctest::Approx(kWilcoxonU1).epsilon(1e-14));
  for (const Kernel& k : {Kernel::cusum(), Kernel::wilcoxon(), sign_kernel()})
    CHECK(u_of_delta(k, normal, 0.0).value == 0.0);
}

TEST_CASE("u_of_delta keeps the sign of delta for built-in kernels") {
  const auto normal = NoiseModel::standard_normal();
  for (double d : {-2.0, -0.3, 0.3, 2.0}) {
    CHECK(std::signbit(u_of_delta(Kernel::cusum(), normal, d).value) == std::signbit(d));
    CHECK(std::signbit(u_of_delta(Kernel::wilcoxon(), normal, d).value) == std::signbit(d));
    CHECK(std::signbit(u_of_delta(Kernel::wilcoxon(), NoiseModel::laplace(1.0), d).value) ==
          std::signbit(d));
  }
}

TEST_CASE("Wilcoxon u_of_delta on non-normal continuous noise uses quadrature") {
  const Estimate u = u_of_delta(Kernel::wilcoxon(), NoiseModel::laplace(1.0), 1.0);
  CHECK(u.exact());
  CHECK(u.value == doctest::Approx(kLaplaceU1).epsilon(1e-9));
  // N(0, 2^2): difference is N(0, 8).
  const Estimate v = u_of_delta(Kernel::wilcoxon(), NoiseModel::normal(2.0), 1.0);
  CHECK(v.value == doctest::Approx(normal_cdf(1.0 / std::sqrt(8.0)) - 0.5).epsilon(1e-9));
}

TEST_CASE("sampled u_of_delta agrees with the closed form within 3 standard errors") {
  const auto normal = NoiseModel::standard_normal();
  for (double d : {0.25, 0.5, 1.0, 2.0}) {
    const Estimate e = u_of_delta(sign_kernel(), normal, d);
    CHECK(e.reps == 1'000'000);
    CHECK(e.std_error > 0.0);
    const double truth = normal_cdf(d / std::numbers::sqrt2) - 0.5;
    CHECK(std::abs(e.value - truth) <= 3.0 * e.std_error);
  }
}

TEST_CASE("custom kernel without a sampler is an unsupported combination") {
  NoiseModel::Parts parts;
  parts.name = "cdf-only";
  parts.cdf = [](double x) { return normal_cdf(x); };
  const auto noise = NoiseModel::custom(parts);
  try {
    (void)u_of_delta(sign_kernel(), noise, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedCombination);
  }
}

TEST_CASE("drift_constant_c_g examples") {
  const auto normal = NoiseModel::standard_normal();
  CHECK(drift_constant_c_g(Kernel::cusum(), normal, 5.0).value == 5.0);
  CHECK(drift_constant_c_g(Kernel::wilcoxon(), normal, 5.0).value ==
        doctest::Approx(kWilcoxonDrift5).epsilon(1e-14));
  for (const Kernel& k : {Kernel::cusum(), Kernel::wilcoxon(), sign_kernel()})
    CHECK(drift_constant_c_g(k, normal, 0.0).value == 0.0);
  // Laplace(b): integral of f^2 is 1/(4b).
  CHECK(drift_constant_c_g(Kernel::wilcoxon(), NoiseModel::laplace(2.0), 3.0).value ==
        doctest::Approx(3.0 / 8.0).epsilon(1e-9));
}

TEST_CASE("custom c_g is extrapolated from sqrt(n) u(c/sqrt(n))") {
  const auto normal = NoiseModel::standard_normal();
  // g(x) = x^3: sqrt(n) u(c/sqrt(n)) = 3c E[d^2] + c^3/n with d ~ N(0, 2).
  const DriftConstant cubic =
      drift_constant_c_g(Kernel::custom("cube", [](double x) { return x * x * x; }), normal, 2.0);
  CHECK_FALSE(cubic.analytic);
  CHECK(cubic.sequence.size() == 4);
  CHECK(cubic.extrapolated.size() == 3);
  CHECK(cubic.value == doctest::Approx(12.0).epsilon(0.01));

  const DriftConstant smooth = drift_constant_c_g(
      Kernel::custom("tanh", [](double x) { return std::tanh(x); }), normal, 2.0);
  CHECK(smooth.value == doctest::Approx(kTanhDrift2).epsilon(0.005));
}

TEST_CASE("custom c_g that does not settle raises with its diagnostic sequence") {
  // A step kernel on a finite sample of differences: the window count at the
  // finest delta is pure Monte Carlo noise, so the extrapolants disagree.
  try {
    (void)drift_constant_c_g(sign_kernel(), NoiseModel::standard_normal(), 1.0,
                             {200'000, 3});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.kind() == ErrorKind::Divergence);
    CHECK(e.sequence().size() == 7);
  }
}

TEST_CASE("sigma_asymptotic examples") {
  const auto normal = NoiseModel::standard_normal();
  CHECK(sigma_asymptotic(Kernel::cusum(), normal).value == 1.0);
  CHECK(sigma_asymptotic(Kernel::wilcoxon(), normal).value ==
        doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-15));
  CHECK(sigma_asymptotic(Kernel::cusum(), NoiseModel::normal(2.0)).value == 2.0);
  CHECK(sigma_asymptotic(Kernel::wilcoxon(), NoiseModel::laplace(1.0)).value ==
        doctest::Approx(1.0 / std::sqrt(12.0)));
}

TEST_CASE("sigma_asymptotic Monte Carlo route for custom kernels") {
  // The sign kernel reproduces Wilcoxon, so sigma^2 = 1/12.
  const Estimate s = sigma_asymptotic(sign_kernel(), NoiseModel::standard_normal());
  CHECK(s.reps == 1'000'000);
  CHECK(std::abs(s.value - 1.0 / std::sqrt(12.0)) <= 4.0 * s.std_error);
}

TEST_CASE("zero-variance noise is degenerate") {
  NoiseModel::Parts parts;
  parts.name = "point mass";
  parts.sampler = [](RandomStream&) { return 0.0; };
  parts.variance = 0.0;
  parts.continuous = false;
  const auto noise = NoiseModel::custom(parts);
  for (const Kernel& k : {Kernel::cusum(), Kernel::wilcoxon(), sign_kernel()}) {
    try {
      (void)sigma_asymptotic(k, noise, {1000, 1});
      FAIL("expected degenerate noise");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateNoise);
    }
  }
}

TEST_CASE("hoeffding_projections examples") {
  const auto normal = NoiseModel::standard_normal();
  for (double x : {-1.0, 0.0, 2.5}) {
    const auto p = hoeffding_projections(Kernel::cusum(), normal, 0.8, x);
    CHECK(p.h1.value == 0.0);
    CHECK(p.h2.value == 0.0);
    const auto q = hoeffding_projections(Kernel::wilcoxon(), normal, 0.0, x);
    CHECK(q.h1.value == 0.0);
    CHECK(q.h2.value == 0.0);
  }
  const auto p = hoeffding_projections(Kernel::wilcoxon(), normal, 0.5, 0.0);
  CHECK(p.h1.value == doctest::Approx(kProjectionAt0).epsilon(1e-12));
  CHECK(p.h2.value == doctest::Approx(kProjectionAt0).epsilon(1e-12));
  CHECK(u_of_delta(Kernel::wilcoxon(), normal, 0.5).value ==
        doctest::Approx(kWilcoxonU05).epsilon(1e-14));
}

TEST_CASE("sampled projections match the closed form") {
  const auto normal = NoiseModel::standard_normal();
  const auto exact = hoeffding_projections(Kernel::wilcoxon(), normal, 0.5, 0.3);
  const auto mc = hoeffding_projections(sign_kernel(), normal, 0.5, 0.3);
  CHECK(std::abs(mc.h1.value - exact.h1.value) <= 4.0 * mc.h1.std_error);
  CHECK(std::abs(mc.h2.value - exact.h2.value) <= 4.0 * mc.h2.std_error);
}

namespace {

struct ProjectionMoments {
  double mean1, mean2, var1, se1, se2;
};

ProjectionMoments projection_moments(double delta, std::size_t reps) {
  const auto normal = NoiseModel::standard_normal();
  RandomStream rng(17, stream_id("test.projection_moments"));
  double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double x = rng.normal();
    const auto p = hoeffding_projections(Kernel::wilcoxon(), normal, delta, x);
    s1 += p.h1.value;
    s2 += p.h2.value;
    q1 += p.h1.value * p.h1.value;
    q2 += p.h2.value * p.h2.value;
  }
  const double n = static_cast<double>(reps);
  const double m1 = s1 / n, m2 = s2 / n;
  const double v1 = q1 / n - m1 * m1, v2 = q2 / n - m2 * m2;
  return {m1, m2, v1, std::sqrt(v1 / n), std::sqrt(v2 / n)};
}

}  // namespace

TEST_CASE("projections are centred") {
  const auto m = projection_moments(0.5, 200'000);
  CHECK(std::abs(m.mean1) <= 4.0 * m.se1);
  CHECK(std::abs(m.mean2) <= 4.0 * m.se2);
}

TEST_CASE("Var(h1) shrinks along the contiguous scaling") {
  const double c = 5.0;
  double previous = std::numeric_limits<double>::infinity();
  for (double n : {1e2, 1e3, 1e4}) {
    const auto m = projection_moments(c / std::sqrt(n), 50'000);
    CHECK(m.var1 < previous);
    previous = m.var1;
  }
}

TEST_CASE("hoeffding_terms bundles the three quantities") {
  const auto t = hoeffding_terms(Kernel::wilcoxon(), NoiseModel::standard_normal(), 1.0, 5.0);
  CHECK(t.u_delta == doctest::Approx(kWilcoxonU1));
  CHECK(t.sigma == doctest::Approx(1.0 / std::sqrt(12.0)));
  CHECK(t.c_g == doctest::Approx(kWilcoxonDrift5));
}

TEST_CASE("noise parsing") {
  CHECK(NoiseModel::parse("normal").family() == NoiseModel::Family::StandardNormal);
  CHECK(NoiseModel::parse("normal:1").family() == NoiseModel::Family::StandardNormal);
  CHECK(*NoiseModel::parse("laplace:0.5").variance() == doctest::Approx(0.5));
  CHECK(*NoiseModel::parse("uniform:3").variance() == doctest::Approx(3.0));
  CHECK_THROWS_AS(NoiseModel::parse("cauchy:1"), Error);
  CHECK_THROWS_AS(NoiseModel::parse("laplace"), Error);
  CHECK_THROWS_AS(NoiseModel::parse("laplace:-1"), Error);
}
