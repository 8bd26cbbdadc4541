#include "wcp/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wcp/error.hpp"

namespace wcp {

namespace {

inline double scale_factor(std::size_t k, std::size_t n, const WeightGamma& gamma) {
  const double nn = static_cast<double>(n);
  return 1.0 / (nn * std::sqrt(nn) * gamma.weight(k, n));
}

StatisticProfile finish_profile(std::vector<double> sums, std::size_t n, WeightGamma gamma,
                                Sidedness sided) {
  for (std::size_t k = 1; k < n; ++k) sums[k - 1] *= scale_factor(k, n, gamma);
  StatisticProfile p;
  p.gamma = gamma;
  p.values = std::move(sums);
  p.sided = sided;
  const Extremum e = max_statistic(p.values, sided);
  p.max_value = e.value;
  p.argmax_k = e.k_hat;
  return p;
}

std::vector<double> cusum_sums(std::span<const double> x) {
  const std::size_t n = x.size();
  // Centering leaves every sum unchanged and limits cancellation.
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> prefix(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += x[i] - mean;
    prefix[i] = running;
  }
  const double total = prefix[n - 1];
  const double nn = static_cast<double>(n);
  std::vector<double> sums(n - 1);
  for (std::size_t k = 1; k < n; ++k)
    sums[k - 1] = static_cast<double>(k) * total - nn * prefix[k - 1];
  return sums;
}

std::vector<double> wilcoxon_sums(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 (0-based) share the midrank of ranks i+1..j.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) rank[order[t]] = midrank;
    i = j;
  }

  std::vector<double> sums(n - 1);
  const double np1 = static_cast<double>(n + 1);
  double rank_prefix = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    rank_prefix += rank[k - 1];
    sums[k - 1] = 0.5 * (static_cast<double>(k) * np1 - 2.0 * rank_prefix);
  }
  return sums;
}

std::vector<double> incremental_sums(std::span<const double> x, const Kernel& g) {
  const std::size_t n = x.size();
  std::vector<double> sums(n - 1);
  double d = 0.0;
  for (std::size_t j = 1; j < n; ++j) d += g(x[j] - x[0]);
  sums[0] = d;
  for (std::size_t k = 2; k < n; ++k) {
    // Moving X_k from the right block to the left block.
    const double xk = x[k - 1];
    for (std::size_t i = 0; i + 1 < k; ++i) d -= g(xk - x[i]);
    for (std::size_t j = k; j < n; ++j) d += g(x[j] - xk);
    sums[k - 1] = d;
  }
  return sums;
}

}  // namespace

Extremum max_statistic(std::span<const double> profile, Sidedness sided) {
  require(!profile.empty(), "max_statistic: empty profile");
  Extremum best{sided == Sidedness::OneSidedMax ? profile[0] : std::abs(profile[0]), 1};
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const double v = sided == Sidedness::OneSidedMax ? profile[i] : std::abs(profile[i]);
    if (v > best.value) best = {v, i + 1};
  }
  return best;
}

Extremum max_statistic(const StatisticProfile& profile, Sidedness sided) {
  return max_statistic(profile.values, sided);
}

StatisticProfile profile_bruteforce(const TimeSeries& x, const Kernel& kernel,
                                    WeightGamma gamma, Sidedness sided) {
  const std::size_t n = x.size();
  std::vector<double> sums(n - 1);
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = k; j < n; ++j) s += kernel(x[j] - x[i]);
    sums[k - 1] = s;
  }
  return finish_profile(std::move(sums), n, gamma, sided);
}

StatisticProfile profile_cusum(const TimeSeries& x, WeightGamma gamma, Sidedness sided) {
  return finish_profile(cusum_sums(x.values()), x.size(), gamma, sided);
}

StatisticProfile profile_wilcoxon(const TimeSeries& x, WeightGamma gamma, Sidedness sided) {
  return finish_profile(wilcoxon_sums(x.values()), x.size(), gamma, sided);
}

std::vector<double> double_sums(std::span<const double> x, const Kernel& kernel) {
  require(x.size() >= 2, "double_sums: need at least 2 observations");
  switch (kernel.kind()) {
    case KernelKind::Cusum:
      return cusum_sums(x);
    case KernelKind::Wilcoxon:
      return wilcoxon_sums(x);
    case KernelKind::Custom:
      break;
  }
  return incremental_sums(x, kernel);
}

StatisticProfile compute_profile(const TimeSeries& x, const Kernel& kernel,
                                 WeightGamma gamma, Sidedness sided) {
  return finish_profile(double_sums(x.values(), kernel), x.size(), gamma, sided);
}

StatisticEvaluator::StatisticEvaluator(std::size_t n, Kernel kernel,
                                       std::vector<WeightGamma> gammas, Sidedness sided)
    : n_(n), kernel_(std::move(kernel)), gammas_(std::move(gammas)), sided_(sided) {
  require(n_ >= 2, "StatisticEvaluator: n must be at least 2");
  require(!gammas_.empty(), "StatisticEvaluator: no gamma values");
  scales_.reserve(gammas_.size());
  for (const auto& g : gammas_) {
    std::vector<double> s(n_ - 1);
    for (std::size_t k = 1; k < n_; ++k) s[k - 1] = scale_factor(k, n_, g);
    scales_.push_back(std::move(s));
  }
}

void StatisticEvaluator::evaluate(std::span<const double> x, std::span<double> out) const {
  require(x.size() == n_, "StatisticEvaluator: series length mismatch");
  require(out.size() == gammas_.size(), "StatisticEvaluator: output size mismatch");
  const std::vector<double> sums = double_sums(x, kernel_);
  for (std::size_t g = 0; g < gammas_.size(); ++g) {
    const auto& scale = scales_[g];
    double best = -std::numeric_limits<double>::infinity();
    if (sided_ == Sidedness::OneSidedMax) {
      for (std::size_t i = 0; i < sums.size(); ++i) best = std::max(best, sums[i] * scale[i]);
    } else {
      for (std::size_t i = 0; i < sums.size(); ++i)
        best = std::max(best, std::abs(sums[i] * scale[i]));
    }
    out[g] = best;
  }
}

std::vector<double> StatisticEvaluator::evaluate(std::span<const double> x) const {
  std::vector<double> out(gammas_.size());
  evaluate(x, out);
  return out;
}

double sample_standard_deviation(std::span<const double> x) {
  require(x.size() >= 2, "standard deviation needs at least 2 values");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

TestOutcome run_test(const TimeSeries& x, const Kernel& kernel, WeightGamma gamma,
                     double alpha, const CriticalSource& critical) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(critical.table != nullptr, "run_test: no critical value table");

  TestOutcome out;
  out.alpha = alpha;
  out.gamma = gamma;
  out.kernel = kernel.kind();
  out.sided = critical.table->sided();
  out.critical_value = critical.table->at(gamma.value(), alpha).quantile;
  out.profile = compute_profile(x, kernel, gamma, out.sided);

  double sigma = 1.0;
  if (critical.scale == CriticalScale::Asymptotic) {
    if (critical.sigma) {
      sigma = *critical.sigma;
    } else if (kernel.kind() == KernelKind::Wilcoxon) {
      sigma = 1.0 / std::sqrt(12.0);
    } else if (kernel.kind() == KernelKind::Cusum) {
      const double sd = sample_standard_deviation(x.values());
      sigma = sd > 0.0 ? sd : 1.0;
    } else {
      fail(ErrorKind::UnsupportedCombination,
           "custom kernels need an explicit sigma for asymptotic critical values");
    }
    require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  } else if (critical.sigma) {
    sigma = *critical.sigma;
  }
  out.sigma = sigma;
  out.statistic = out.profile.max_value / sigma;
  out.estimated_changepoint = out.profile.argmax_k;
  out.reject = out.statistic > out.critical_value;
  return out;
}

}  // namespace wcp
