// wcp: change-point tests, critical value tables and power experiments.
//
//   wcp [--seed S] [--threads T] [--out FILE] <command> [options]
//
// Commands: test, quantiles, power-a1, power-a2, envelope. Every command that
// takes parameters also accepts --config FILE with "key = value" lines;
// options given on the command line win over the file.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "wcp/error.hpp"
#include "wcp/experiments.hpp"
#include "wcp/io.hpp"
#include "wcp/kernels.hpp"
#include "wcp/limits.hpp"
#include "wcp/parallel.hpp"
#include "wcp/quantile_table.hpp"
#include "wcp/statistic.hpp"

namespace {

using namespace wcp;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kUnreadable = 3,
  kInvalidInput = 4,
  kNonNumeric = 5,
  kTooFew = 6,
  kTableMiss = 7,
  kDomain = 8,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return kUsage;
    case ErrorKind::UnreadableFile:
      return kUnreadable;
    case ErrorKind::EmptyInput:
      return kInvalidInput;
    case ErrorKind::NonNumericInput:
      return kNonNumeric;
    case ErrorKind::TooFewObservations:
      return kTooFew;
    case ErrorKind::TableMiss:
      return kTableMiss;
    case ErrorKind::UnsupportedCombination:
    case ErrorKind::DegenerateNoise:
    case ErrorKind::Divergence:
    case ErrorKind::WrongRegime:
    case ErrorKind::UndetectableDirection:
      return kDomain;
  }
  return kOther;
}

// ---------------------------------------------------------------------------
// value conversion shared by flags and config files

double to_number(const std::string& text);

std::size_t to_count(const std::string& text, const char* what) {
  const double v = to_number(text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15)
    fail(ErrorKind::InvalidArgument, fmt::format("{} must be a non-negative integer", what));
  return static_cast<std::size_t>(v);
}

std::uint64_t to_seed(const std::string& text) {
  std::uint64_t v = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    fail(ErrorKind::InvalidArgument, "seed must be an unsigned 64-bit integer");
  return v;
}

bool to_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  fail(ErrorKind::InvalidArgument, "'" + t + "' is not a boolean");
}

double to_number(const std::string& text) {
  try {
    return parse_double(text, 0);
  } catch (const Error&) {
    fail(ErrorKind::InvalidArgument, "'" + trim(text) + "' is not a number");
  }
}

// Command-line options that may also come from a config file.
class Bindings {
 public:
  void bind(const std::string& key, CLI::Option* option,
            std::function<void(const std::string&)> assign) {
    entries_[key] = {option, std::move(assign)};
  }
  void alias(const std::string& alias, const std::string& key) { aliases_[alias] = key; }

  void apply(const KeyValueConfig& config) const {
    for (const auto& [raw_key, value] : config.values()) {
      auto key = raw_key;
      if (auto a = aliases_.find(key); a != aliases_.end()) key = a->second;
      const auto it = entries_.find(key);
      if (it == entries_.end())
        fail(ErrorKind::InvalidArgument, "unknown config key '" + raw_key + "'");
      if (it->second.option == nullptr || it->second.option->count() == 0)
        it->second.assign(value);
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(const std::string&)> assign;
  };
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> aliases_;
};

template <class T>
CLI::Option* option(CLI::App& app, Bindings& b, const std::string& flag, const std::string& key,
                    T& target, const std::string& help) {
  CLI::Option* opt = app.add_option(flag, target, help);
  if constexpr (std::is_same_v<T, std::string>) {
    opt->default_str(target);
    b.bind(key, opt, [&target](const std::string& v) { target = trim(v); });
  } else if constexpr (std::is_same_v<T, double>) {
    opt->default_val(target);
    b.bind(key, opt, [&target](const std::string& v) { target = to_number(v); });
  }
  return opt;
}

CLI::Option* flag(CLI::App& app, Bindings& b, const std::string& name, const std::string& key,
                  bool& target, const std::string& help) {
  CLI::Option* opt = app.add_flag(name, target, help);
  b.bind(key, opt, [&target](const std::string& v) { target = to_bool(v); });
  return opt;
}

// ---------------------------------------------------------------------------
// shared state

struct Globals {
  std::string seed = std::to_string(kDefaultSeed);
  std::string threads = std::to_string(default_thread_count());
  std::string out;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  std::uint64_t seed_value() const { return to_seed(seed); }
  unsigned threads_value() const {
    const std::size_t t = to_count(threads, "threads");
    if (t < 1 || t > 4096) fail(ErrorKind::InvalidArgument, "threads must lie in [1, 4096]");
    return static_cast<unsigned>(t);
  }
};

void bind_globals(Bindings& b, Globals& g) {
  b.bind("seed", g.seed_opt, [&g](const std::string& v) { g.seed = trim(v); });
  b.bind("threads", g.threads_opt, [&g](const std::string& v) { g.threads = trim(v); });
  b.bind("out", g.out_opt, [&g](const std::string& v) { g.out = trim(v); });
}

void load_config(const std::string& path, const Bindings& b) {
  if (path.empty()) return;
  b.apply(KeyValueConfig::load(path));
}

// Writes `text` to the --out file, or to stdout when no file is given.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(g.out, std::ios::binary);
  if (!file) fail(ErrorKind::UnreadableFile, "cannot write '" + g.out + "'");
  file << text;
  if (!file) fail(ErrorKind::UnreadableFile, "failed writing '" + g.out + "'");
}

std::vector<std::string> base_metadata(const std::string& command, std::uint64_t seed) {
  return {fmt::format("wcp {}", WCP_VERSION), "command: " + command,
          fmt::format("seed: {}", seed)};
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:g}", i ? " " : "", v[i]);
  return s;
}

std::vector<double> gamma_list(const std::string& text) {
  auto gs = parse_number_list(text);
  for (double g : gs) (void)WeightGamma(g);
  return gs;
}

Sidedness sided_from(const std::string& text) { return parse_sidedness(text); }

// ---------------------------------------------------------------------------
// test

struct TestArgs {
  std::string input;
  std::string kernel = "cusum";
  double gamma = 0.0;
  double alpha = 0.05;
  std::string table = "published";
  std::string critical = "asymptotic";
  std::string sided = "one-sided";
  std::string calibration_reps = "10000";
  std::string noise = "normal";
  double sigma = std::nan("");
  CLI::Option* sigma_opt = nullptr;
  std::string config;
};

int run_test_command(const Globals& g, const TestArgs& a) {
  // Validate everything before touching the data.
  const Kernel kernel = Kernel::from_kind(parse_kernel_kind(a.kernel));
  const WeightGamma gamma(a.gamma);
  require(a.alpha > 0.0 && a.alpha < 1.0, "alpha must lie in (0, 1)");
  const bool finite = a.critical == "finite";
  if (!finite && a.critical != "asymptotic")
    fail(ErrorKind::InvalidArgument, "critical must be 'asymptotic' or 'finite'");
  if (a.input.empty()) fail(ErrorKind::InvalidArgument, "an input file is required");
  const std::size_t calib = to_count(a.calibration_reps, "calibration-reps");
  const NoiseModel noise = NoiseModel::parse(a.noise);
  const std::uint64_t seed = g.seed_value();
  const unsigned threads = g.threads_value();
  std::optional<double> sigma;
  if (!std::isnan(a.sigma)) {
    require(a.sigma > 0.0 && std::isfinite(a.sigma), "sigma must be positive");
    sigma = a.sigma;
  }

  QuantileTable table;
  if (!finite) {
    if (a.table == "published") {
      table = QuantileTable::published_one_sided();
    } else {
      std::ifstream in(a.table);
      if (!in) fail(ErrorKind::UnreadableFile, "cannot open table '" + a.table + "'");
      table = QuantileTable::read_csv(in);
    }
    (void)table.at(gamma.value(), a.alpha);
  }

  const TimeSeries series(read_series_csv(std::filesystem::path(a.input)));
  const std::size_t n = series.size();

  CriticalSource source{&table, CriticalScale::Asymptotic, sigma};
  if (finite) {
    SimulationOptions sim;
    sim.seed = seed;
    sim.threads = threads;
    sim.sided = sided_from(a.sided);
    sim.noise = noise;
    QuantileTable empirical(sim.sided);
    QuantileEntry e;
    e.quantile = empirical_critical_value(n, kernel, gamma, a.alpha, calib, sim);
    e.reps = calib;
    empirical.set(gamma.value(), a.alpha, e);
    table = std::move(empirical);
    source.scale = CriticalScale::FiniteSample;
  }

  const TestOutcome r = run_test(series, kernel, gamma, a.alpha, source);

  std::cout << fmt::format(
      "n = {}\nkernel = {}\ngamma = {:g}\nalpha = {:g}\nsided = {}\ncritical_scale = {}\n"
      "sigma = {:.6g}\nstatistic = {:.6f}\ncritical_value = {:.6f}\nreject = {}\nk_hat = {}\n",
      n, to_string(r.kernel), r.gamma.value(), r.alpha, to_string(r.sided),
      finite ? "finite-sample" : "asymptotic", r.sigma, r.statistic, r.critical_value,
      r.reject ? "true" : "false", r.estimated_changepoint);

  if (!g.out.empty()) {
    auto meta = base_metadata("test", seed);
    meta.push_back("input: " + a.input);
    meta.push_back(fmt::format("kernel: {}", to_string(r.kernel)));
    meta.push_back(fmt::format("gamma: {:g}", r.gamma.value()));
    meta.push_back(fmt::format("alpha: {:g}", r.alpha));
    meta.push_back(fmt::format("sided: {}", to_string(r.sided)));
    meta.push_back(fmt::format("sigma: {:.17g}", r.sigma));
    meta.push_back(fmt::format("statistic: {:.17g}", r.statistic));
    meta.push_back(fmt::format("critical_value: {:.17g}", r.critical_value));
    meta.push_back(fmt::format("reject: {}", r.reject));
    meta.push_back(fmt::format("k_hat: {}", r.estimated_changepoint));
    std::string text;
    for (const auto& m : meta) text += "# " + m + "\n";
    text += "k,statistic\n";
    for (std::size_t k = 1; k < n; ++k) text += fmt::format("{},{:.17g}\n", k, r.profile.at(k));
    emit(g, text);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// quantiles

struct QuantileArgs {
  std::string gammas = "0,0.1,0.2,0.3,0.4";
  std::string alphas = "0.1,0.05,0.01";
  std::string reps = "100000";
  std::string grid_m = "10000";
  std::string bootstrap = "200";
  std::string sided = "one-sided";
  std::string config;
};

int run_quantiles(const Globals& g, const QuantileArgs& a) {
  QuantileTableConfig config;
  config.gammas = gamma_list(a.gammas);
  config.alphas = parse_number_list(a.alphas);
  config.reps = to_count(a.reps, "reps");
  config.grid_steps = to_count(a.grid_m, "grid-m");
  config.bootstrap_reps = to_count(a.bootstrap, "bootstrap");
  config.seed = g.seed_value();
  config.threads = g.threads_value();
  (void)BridgeGrid(config.grid_steps);
  require(config.reps >= kMinTableReps,
          fmt::format("reps must be at least {}", kMinTableReps));
  const bool both = a.sided == "both";
  const Sidedness sided = both ? Sidedness::OneSidedMax : sided_from(a.sided);

  const QuantileTables tables = build_quantile_tables(config);

  auto meta = base_metadata("quantiles", config.seed);
  meta.push_back("gammas: " + join(config.gammas));
  meta.push_back("alphas: " + join(config.alphas));
  meta.push_back(fmt::format("reps: {}", config.reps));
  meta.push_back(fmt::format("grid_m: {}", config.grid_steps));
  meta.push_back(fmt::format("bootstrap: {}", config.bootstrap_reps));
  meta.push_back("quantile: type 7, level 1 - alpha");
  if (config.reps < kRecommendedTableReps) {
    meta.push_back(fmt::format("warning: high stderr, reps = {} is below {}", config.reps,
                               kRecommendedTableReps));
    std::cerr << fmt::format("warning: only {} replications; standard errors are large\n",
                             config.reps);
  }

  std::ostringstream out;
  if (both || sided == Sidedness::OneSidedMax) tables.one_sided.write_csv(out, meta);
  if (both) out << '\n';
  if (both || sided == Sidedness::TwoSidedMaxAbs) tables.two_sided.write_csv(out, meta);
  emit(g, out.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// power curves

struct PowerArgs {
  std::string n;
  std::string kernel = "cusum";
  std::string gammas = "0,0.1,0.2,0.3,0.4";
  double alpha = 0.05;
  std::string reps;
  std::string null_reps = "0";
  std::string sided;
  bool crn = false;
  std::string noise = "normal";
  std::string regime;
  std::string config;
  // A1
  std::string c = "5,7,9";
  std::string taus = "0.01:0.01:0.99";
  bool no_envelope = false;
  // A2
  std::string c_grid;
  double delta = 1.0;
  double kappa_gamma = 0.3;
};

SimulationOptions simulation_options(const Globals& g, const PowerArgs& a) {
  SimulationOptions sim;
  sim.seed = g.seed_value();
  sim.threads = g.threads_value();
  sim.sided = sided_from(a.sided);
  sim.common_random_numbers = a.crn;
  sim.noise = NoiseModel::parse(a.noise);
  sim.null_reps = to_count(a.null_reps, "null-reps");
  if (sim.null_reps != 0)
    require(sim.null_reps >= kMinCalibrationReps,
            fmt::format("null-reps must be at least {}", kMinCalibrationReps));
  return sim;
}

std::vector<std::string> power_metadata(const std::string& command, const PowerArgs& a,
                                        const SimulationOptions& sim, std::size_t reps) {
  auto meta = base_metadata(command, sim.seed);
  meta.push_back("kernel: " + a.kernel);
  meta.push_back("gammas: " + join(gamma_list(a.gammas)));
  meta.push_back(fmt::format("alpha: {:g}", a.alpha));
  meta.push_back(fmt::format("reps: {}", reps));
  meta.push_back(fmt::format("null_reps: {}", std::max(sim.null_reps ? sim.null_reps : reps,
                                                       kMinCalibrationReps)));
  meta.push_back(fmt::format("sided: {}", to_string(sim.sided)));
  meta.push_back(fmt::format("common_random_numbers: {}", sim.common_random_numbers));
  meta.push_back("noise: " + sim.noise.name());
  meta.push_back("size_corrected: true");
  return meta;
}

void check_regime(const PowerArgs& a, const char* expected) {
  if (!a.regime.empty() && a.regime != expected)
    fail(ErrorKind::InvalidArgument,
         fmt::format("config regime '{}' does not match this command ({})", a.regime, expected));
}

double noise_sd(const NoiseModel& noise) {
  if (noise.family() == NoiseModel::Family::StandardNormal) return 1.0;
  const auto var = noise.variance();
  if (!var) fail(ErrorKind::UnsupportedCombination, "noise has no known variance");
  return std::sqrt(*var);
}

int run_power_a1(const Globals& g, const PowerArgs& a) {
  check_regime(a, "a1");
  A1PowerConfig config;
  config.n = to_count(a.n.empty() ? "1000" : a.n, "n");
  require(config.n >= 2, "n must be at least 2");
  config.kernel = Kernel::from_kind(parse_kernel_kind(a.kernel));
  config.gammas = gamma_list(a.gammas);
  config.alpha = a.alpha;
  require(config.alpha > 0.0 && config.alpha < 1.0, "alpha must lie in (0, 1)");
  config.reps = to_count(a.reps.empty() ? "5000" : a.reps, "reps");
  require(config.reps > 0, "reps must be positive");
  config.taus = parse_number_list(a.taus);
  for (double t : config.taus) require(t > 0.0 && t < 1.0, "taus must lie in (0, 1)");
  config.sim = simulation_options(g, a);
  const std::vector<double> cs = parse_number_list(a.c);
  const double sd = noise_sd(config.sim.noise);

  std::vector<PowerCurve> all;
  std::vector<std::string> ratios;
  for (double c : cs) {
    config.c = c;
    auto curves = power_curve_a1(config);
    const PowerCurve env = envelope_curve(config.n, c / std::sqrt(static_cast<double>(config.n)),
                                          sd, config.alpha, config.taus);
    for (auto& curve : curves) {
      ratios.push_back(fmt::format("overall_power c={:g} gamma={:g}: {:.2f}", c, curve.gamma,
                                   overall_power_ratio(curve, env)));
      curve.label = fmt::format("c={:g} {}", c, curve.label);
      all.push_back(std::move(curve));
    }
    if (!a.no_envelope) {
      PowerCurve e = env;
      e.label = fmt::format("c={:g} envelope", c);
      all.push_back(std::move(e));
    }
  }

  auto meta = power_metadata("power-a1", a, config.sim, config.reps);
  meta.push_back(fmt::format("n: {}", config.n));
  meta.push_back("c: " + join(cs) + " (jump c/sqrt(n))");
  meta.push_back(fmt::format("taus: {} points from {:g} to {:g}", config.taus.size(),
                             config.taus.front(), config.taus.back()));
  meta.push_back(fmt::format("clamp_events: {}", all.empty() ? 0 : all.front().clamp_events));
  meta.insert(meta.end(), ratios.begin(), ratios.end());

  std::ostringstream out;
  write_curves_csv(out, all, meta);
  emit(g, out.str());
  return kOk;
}

std::vector<double> default_c_grid() {
  // c = tau * 50 / 5000^(2/7), tau = 0, 0.02, ..., 1: k* runs over 0..50 at n = 5000.
  const double top = 50.0 / std::pow(5000.0, 2.0 / 7.0);
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(top * i / 50.0);
  return grid;
}

int run_power_a2(const Globals& g, const PowerArgs& a) {
  check_regime(a, "a2");
  A2PowerConfig config;
  const std::vector<double> ns = parse_number_list(a.n.empty() ? "5000" : a.n);
  config.kernel = Kernel::from_kind(parse_kernel_kind(a.kernel));
  config.gammas = gamma_list(a.gammas);
  config.alpha = a.alpha;
  require(config.alpha > 0.0 && config.alpha < 1.0, "alpha must lie in (0, 1)");
  config.reps = to_count(a.reps.empty() ? "500" : a.reps, "reps");
  require(config.reps > 0, "reps must be positive");
  config.delta = a.delta;
  require(std::isfinite(config.delta), "delta must be finite");
  config.kappa_source_gamma = WeightGamma(a.kappa_gamma).value();
  config.c_grid = a.c_grid.empty() ? default_c_grid() : parse_number_list(a.c_grid);
  for (double c : config.c_grid) require(c >= 0.0, "c grid values must be non-negative");
  config.sim = simulation_options(g, a);
  std::vector<std::size_t> sizes;
  for (double n : ns) {
    const std::size_t v = to_count(fmt::format("{:g}", n), "n");
    require(v >= 2, "n must be at least 2");
    sizes.push_back(v);
  }

  std::vector<PowerCurve> all;
  std::size_t clamps = 0;
  for (std::size_t n : sizes) {
    config.n = n;
    auto curves = power_curve_a2(config);
    clamps += curves.empty() ? 0 : curves.front().clamp_events;
    for (auto& curve : curves) {
      if (sizes.size() > 1) curve.label = fmt::format("n={} {}", n, curve.label);
      all.push_back(std::move(curve));
    }
  }

  auto meta = power_metadata("power-a2", a, config.sim, config.reps);
  std::vector<double> nd(sizes.begin(), sizes.end());
  meta.push_back("n: " + join(nd));
  meta.push_back(fmt::format("delta: {:g}", config.delta));
  meta.push_back(fmt::format("kappa: {:.6g} (from gamma {:g})",
                             WeightGamma(config.kappa_source_gamma).kappa(),
                             config.kappa_source_gamma));
  meta.push_back("k_star: round(c n^kappa) clamped to [1, n-1]; c = 0 means no change");
  meta.push_back(fmt::format("clamp_events: {}", clamps));
  if (clamps > 0)
    std::cerr << fmt::format("warning: {} change times were clamped into [1, n-1]\n", clamps);

  std::ostringstream out;
  write_curves_csv(out, all, meta);
  emit(g, out.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// envelope

struct EnvelopeArgs {
  std::string n = "1000";
  std::string delta;
  std::string c;
  double sigma = 1.0;
  double alpha = 0.05;
  std::string taus = "0.01:0.01:0.99";
  std::string config;
};

int run_envelope(const Globals& g, const EnvelopeArgs& a) {
  const std::size_t n = to_count(a.n, "n");
  require(n >= 2, "n must be at least 2");
  require(a.sigma > 0.0, "sigma must be positive");
  require(a.alpha > 0.0 && a.alpha < 1.0, "alpha must lie in (0, 1)");
  if (!a.delta.empty() && !a.c.empty())
    fail(ErrorKind::InvalidArgument, "give either --delta or --c, not both");
  const std::vector<double> taus = parse_number_list(a.taus);
  for (double t : taus) require(t > 0.0 && t < 1.0, "taus must lie in (0, 1)");
  std::vector<double> deltas;
  std::vector<std::string> labels;
  if (!a.delta.empty() || a.c.empty()) {
    for (double d : parse_number_list(a.delta.empty() ? "0" : a.delta)) {
      deltas.push_back(d);
      labels.push_back(fmt::format("delta={:g}", d));
    }
  } else {
    for (double c : parse_number_list(a.c)) {
      deltas.push_back(c / std::sqrt(static_cast<double>(n)));
      labels.push_back(fmt::format("c={:g}", c));
    }
  }

  std::vector<PowerCurve> curves;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    PowerCurve c = envelope_curve(n, deltas[i], a.sigma, a.alpha, taus);
    c.label = labels[i] + " envelope";
    curves.push_back(std::move(c));
  }
  std::vector<std::string> meta{fmt::format("wcp {}", WCP_VERSION), "command: envelope",
                                fmt::format("n: {}", n), "deltas: " + join(deltas),
                                fmt::format("sigma: {:g}", a.sigma),
                                fmt::format("alpha: {:g}", a.alpha),
                                "k: floor(tau n)"};
  std::ostringstream out;
  write_curves_csv(out, curves, meta);
  emit(g, out.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted change-point tests and simulation experiments"};
  app.set_version_flag("--version", std::string(WCP_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  globals.seed_opt = app.add_option("--seed", globals.seed, "Random seed")
                         ->default_str(globals.seed);
  globals.threads_opt =
      app.add_option("--threads", globals.threads, "Worker threads (results do not depend on it)")
          ->default_str(globals.threads);
  globals.out_opt = app.add_option("--out", globals.out, "Output file (default: stdout)");

  // test
  TestArgs test_args;
  Bindings test_bind;
  auto* test = app.add_subcommand("test", "Run the change-point test on a one-column CSV");
  test->add_option("input", test_args.input, "Input CSV with one numeric column");
  test_bind.bind("input", nullptr, [&](const std::string& v) {
    if (test_args.input.empty()) test_args.input = trim(v);
  });
  option(*test, test_bind, "--kernel", "kernel", test_args.kernel, "cusum or wilcoxon");
  option(*test, test_bind, "--gamma", "gamma", test_args.gamma, "Weight exponent in [0, 0.5)");
  option(*test, test_bind, "--alpha", "alpha", test_args.alpha, "Level");
  option(*test, test_bind, "--table", "table", test_args.table,
         "'published' or a quantile table CSV");
  option(*test, test_bind, "--critical", "critical", test_args.critical,
         "asymptotic (table) or finite (simulated at this n)");
  option(*test, test_bind, "--sided", "sided", test_args.sided,
         "Statistic form for --critical finite");
  option(*test, test_bind, "--calibration-reps", "calibration_reps", test_args.calibration_reps,
         "Null replications for --critical finite");
  option(*test, test_bind, "--noise", "noise", test_args.noise,
         "Noise for --critical finite: normal, normal:sd, laplace:b, uniform:a");
  test_args.sigma_opt = option(*test, test_bind, "--sigma", "sigma", test_args.sigma,
                               "Known noise scale used to studentize");
  test->add_option("--config", test_args.config, "key = value file");
  bind_globals(test_bind, globals);

  // quantiles
  QuantileArgs q_args;
  Bindings q_bind;
  auto* quantiles = app.add_subcommand("quantiles", "Simulate weighted bridge-sup quantiles");
  option(*quantiles, q_bind, "--gammas", "gammas", q_args.gammas, "Weight exponents");
  option(*quantiles, q_bind, "--alphas", "alphas", q_args.alphas, "Levels");
  option(*quantiles, q_bind, "--reps", "reps", q_args.reps, "Replications");
  option(*quantiles, q_bind, "--grid-m", "grid_m", q_args.grid_m, "Bridge grid steps");
  option(*quantiles, q_bind, "--bootstrap", "bootstrap", q_args.bootstrap,
         "Bootstrap resamples for standard errors");
  option(*quantiles, q_bind, "--sided", "sided", q_args.sided, "one-sided, two-sided or both");
  quantiles->add_option("--config", q_args.config, "key = value file");
  q_bind.alias("gamma", "gammas");
  q_bind.alias("alpha", "alphas");
  bind_globals(q_bind, globals);

  // power-a1 / power-a2
  PowerArgs a1_args, a2_args;
  a1_args.sided = "one-sided";
  a2_args.sided = "two-sided";
  Bindings a1_bind, a2_bind;
  auto add_power_common = [&](CLI::App& cmd, Bindings& b, PowerArgs& p) {
    option(cmd, b, "--n", "n", p.n, "Sample size");
    option(cmd, b, "--kernel", "kernel", p.kernel, "cusum or wilcoxon");
    option(cmd, b, "--gammas", "gammas", p.gammas, "Weight exponents");
    option(cmd, b, "--alpha", "alpha", p.alpha, "Level");
    option(cmd, b, "--reps", "reps", p.reps, "Replications per point");
    option(cmd, b, "--null-reps", "null_reps", p.null_reps,
           "Null replications for the size correction (0: same as reps, at least 1000)");
    option(cmd, b, "--sided", "sided", p.sided, "one-sided or two-sided");
    flag(cmd, b, "--crn", "crn", p.crn, "Share each replication's series across gammas");
    option(cmd, b, "--noise", "noise", p.noise, "normal, normal:sd, laplace:b, uniform:a");
    cmd.add_option("--config", p.config, "key = value file");
    b.bind("regime", nullptr, [&p](const std::string& v) { p.regime = trim(v); });
    b.alias("gamma", "gammas");
    bind_globals(b, globals);
  };
  auto* power_a1 =
      app.add_subcommand("power-a1", "Size-corrected power against a change at tau n");
  add_power_common(*power_a1, a1_bind, a1_args);
  option(*power_a1, a1_bind, "--c", "c", a1_args.c, "Jump constants; the jump is c/sqrt(n)");
  option(*power_a1, a1_bind, "--taus", "taus", a1_args.taus, "Change fractions");
  flag(*power_a1, a1_bind, "--no-envelope", "no_envelope", a1_args.no_envelope,
       "Omit the envelope curves");
  a1_bind.alias("tau", "taus");
  a1_bind.alias("tau_grid", "taus");

  auto* power_a2 =
      app.add_subcommand("power-a2", "Size-corrected power against an early change");
  add_power_common(*power_a2, a2_bind, a2_args);
  option(*power_a2, a2_bind, "--c-grid", "c_grid", a2_args.c_grid,
         "Values of c in k* = round(c n^kappa)");
  option(*power_a2, a2_bind, "--delta", "delta", a2_args.delta, "Jump height");
  option(*power_a2, a2_bind, "--kappa-gamma", "kappa_gamma", a2_args.kappa_gamma,
         "Gamma whose kappa sets the change time rate");

  // envelope
  EnvelopeArgs env_args;
  Bindings env_bind;
  auto* envelope = app.add_subcommand("envelope", "Envelope power along a tau grid");
  option(*envelope, env_bind, "--n", "n", env_args.n, "Sample size");
  option(*envelope, env_bind, "--delta", "delta", env_args.delta, "Jump heights");
  option(*envelope, env_bind, "--c", "c", env_args.c, "Jump constants; the jump is c/sqrt(n)");
  option(*envelope, env_bind, "--sigma", "sigma", env_args.sigma, "Noise standard deviation");
  option(*envelope, env_bind, "--alpha", "alpha", env_args.alpha, "Level");
  option(*envelope, env_bind, "--taus", "taus", env_args.taus, "Change fractions");
  envelope->add_option("--config", env_args.config, "key = value file");
  env_bind.alias("tau", "taus");
  bind_globals(env_bind, globals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*test) {
      load_config(test_args.config, test_bind);
      return run_test_command(globals, test_args);
    }
    if (*quantiles) {
      load_config(q_args.config, q_bind);
      return run_quantiles(globals, q_args);
    }
    if (*power_a1) {
      load_config(a1_args.config, a1_bind);
      return run_power_a1(globals, a1_args);
    }
    if (*power_a2) {
      load_config(a2_args.config, a2_bind);
      return run_power_a2(globals, a2_args);
    }
    if (*envelope) {
      load_config(env_args.config, env_bind);
      return run_envelope(globals, env_args);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kUsage;
}
