#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "mpspec/clt.hpp"
#include "mpspec/error.hpp"
#include "mpspec/estimators.hpp"
#include "mpspec/kernels.hpp"
#include "mpspec/montecarlo.hpp"
#include "mpspec/mp_law.hpp"
#include "mpspec/spectral.hpp"

namespace mpspec::cli {

namespace {

using nlohmann::json;

/// Bad flags or unusable inputs; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Where a command writes its primary output and its JSON sidecar.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), out_(&fallback) {
    if (!path_.empty()) {
      file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
      if (!*file_) throw UsageError("cannot open output file " + path_);
      out_ = file_.get();
    }
  }

  std::ostream& stream() { return *out_; }

  /// Writes <out>.meta.json next to a file output; ignored for stdout.
  void sidecar(const json& meta) const {
    if (path_.empty()) return;
    std::ofstream side(path_ + ".meta.json", std::ios::binary);
    if (!side) throw UsageError("cannot open sidecar file " + path_ + ".meta.json");
    side << meta.dump(2) << '\n';
  }

  void finish() {
    out_->flush();
    if (!*out_) throw UsageError("failed writing output");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

BandwidthRegime parse_regime(const std::string& s) {
  if (s == "cdf") return BandwidthRegime::cdf;
  if (s == "density") return BandwidthRegime::density;
  throw UsageError("--regime must be cdf or density");
}

std::vector<double> linear_grid(double from, double to, std::size_t count) {
  if (count == 0) throw UsageError("--points must be at least 1");
  if (!(to >= from)) throw UsageError("--to must not be below --from");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

/// Eigenvalues from --in, --simulate key=value pairs, or --p/--n/--seed.
struct SampleSource {
  std::string in;
  std::vector<std::string> simulate;
  std::size_t p = 0;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string entries = "gaussian";

  void attach(CLI::App& cmd, std::size_t default_p = 0, std::size_t default_n = 0) {
    p = default_p;
    n = default_n;
    cmd.add_option("--in", in, "Eigenvalue CSV (header `eigenvalue`)");
    cmd.add_option("--simulate", simulate, "Simulate instead: p=.. n=.. seed=..")->expected(1, 3);
    cmd.add_option("--p", p, "Dimension for simulation");
    cmd.add_option("--n", n, "Sample size (also the n paired with --in; default p)");
    cmd.add_option("--seed", seed, "Seed for simulation");
    cmd.add_option("--entries", entries, "Entry law: gaussian or three-point");
  }

  json describe() const {
    if (!in.empty()) return {{"source", "file"}, {"path", in}};
    return {{"source", "simulated"}, {"seed", seed}, {"entries", entries}};
  }

  SpectralSample load() {
    for (const auto& kv : simulate) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--simulate expects key=value, got " + kv);
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size())
        throw UsageError("--simulate value for " + key + " is not a non-negative integer");
      if (key == "p")
        p = v;
      else if (key == "n")
        n = v;
      else if (key == "seed")
        seed = v;
      else
        throw UsageError("--simulate key must be p, n or seed, got " + key);
    }
    if (!in.empty()) {
      if (!simulate.empty()) throw UsageError("use either --in or --simulate");
      std::ifstream file(in);
      if (!file) throw UsageError("cannot read " + in);
      auto values = read_eigenvalue_csv(file);
      const std::size_t size = values.size();
      return SpectralSample(std::move(values), n > 0 ? n : size);
    }
    if (p == 0 || n == 0) throw UsageError("need --in, --simulate p=.. n=.. seed=.., or --p and --n");
    EntryDistribution dist = EntryDistribution::gaussian;
    if (entries == "three-point")
      dist = EntryDistribution::three_point;
    else if (entries != "gaussian")
      throw UsageError("--entries must be gaussian or three-point");
    return SpectralSample::from_data(sample_data_matrix(p, n, seed, dist));
  }
};

struct Bandwidth {
  std::optional<double> h;
  std::string regime;

  void attach(CLI::App& cmd, const std::string& default_regime) {
    regime = default_regime;
    cmd.add_option("--h", h, "Bandwidth (default: rule for --regime)");
    cmd.add_option("--regime", regime, "Bandwidth rule when --h is omitted: cdf or density");
  }

  double resolve(std::size_t n, json& meta) const {
    const BandwidthRegime r = parse_regime(regime);
    if (h) {
      if (!(*h > 0.0) || !std::isfinite(*h)) throw UsageError("--h must be positive");
      meta["bandwidth_source"] = "flag";
      return *h;
    }
    meta["bandwidth_source"] = "rule";
    meta["regime"] = regime;
    return BandwidthRule::for_regime(r)(n);
  }
};

// ---------------------------------------------------------------------------

struct MpArgs {
  double c = 0.0;
  std::size_t points = 101;
  std::optional<double> from;
  std::optional<double> to;
  std::string out;
};

int cmd_mp(const MpArgs& a, std::ostream& out) {
  if (!(a.c > 0.0) || !std::isfinite(a.c)) throw UsageError("--c must be positive");
  const MpLaw law(a.c);
  const auto grid = linear_grid(a.from.value_or(0.0), a.to.value_or(law.upper_edge() + 0.5), a.points);
  Sink sink(a.out, out);
  auto& s = sink.stream();
  s << "x,density,cdf\n";
  for (double x : grid) s << fmt17(x) << ',' << fmt17(law.density(x)) << ',' << fmt17(law.cdf(x)) << '\n';
  sink.finish();
  sink.sidecar({{"c", a.c},
                {"a", law.lower_edge()},
                {"b", law.upper_edge()},
                {"point_mass", law.point_mass_at_zero()},
                {"points", a.points}});
  return kPass;
}

struct EstimateArgs {
  SampleSource source;
  Bandwidth bandwidth;
  std::size_t points = 201;
  std::optional<double> from;
  std::optional<double> to;
  std::string out;
};

int cmd_estimate(EstimateArgs& a, std::ostream& out) {
  const SpectralSample sample = a.source.load();
  json meta = a.source.describe();
  const double h = a.bandwidth.resolve(sample.n(), meta);
  const auto grid =
      linear_grid(a.from.value_or(sample.min() - 5.0 * h), a.to.value_or(sample.max() + 5.0 * h), a.points);
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw UsageError("grid must be strictly increasing: check --from/--to");
  const auto est = estimate_on_grid(sample, gaussian_kernel(), h, grid);
  Sink sink(a.out, out);
  write_grid_csv(sink.stream(), est);
  sink.finish();
  meta["h"] = h;
  meta["p"] = sample.p();
  meta["n"] = sample.n();
  meta["c_n"] = sample.aspect_ratio();
  meta["kernel"] = "gaussian";
  sink.sidecar(meta);
  return kPass;
}

struct QuantileArgs {
  SampleSource source;
  Bandwidth bandwidth;
  std::vector<double> alpha{0.5};
  std::string out;
};

int cmd_quantile(QuantileArgs& a, std::ostream& out) {
  for (double alpha : a.alpha)
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha values must lie in (0, 1)");
  const SpectralSample sample = a.source.load();
  json meta = a.source.describe();
  const double h = a.bandwidth.resolve(sample.n(), meta);
  const MpLaw law = sample.law();
  const KernelProfile kernel = gaussian_kernel();
  Sink sink(a.out, out);
  auto& s = sink.stream();
  s << "alpha,x_n,x_mp\n";
  for (double alpha : a.alpha)
    s << fmt17(alpha) << ',' << fmt17(smoothed_quantile(sample, kernel, h, alpha)) << ','
      << fmt17(law.quantile(alpha)) << '\n';
  sink.finish();
  meta["h"] = h;
  meta["p"] = sample.p();
  meta["n"] = sample.n();
  meta["c_n"] = sample.aspect_ratio();
  sink.sidecar(meta);
  return kPass;
}

int cmd_sigma2(const std::string& kernel_name, const std::string& path, std::ostream& out) {
  if (kernel_name != "gaussian") throw UsageError("unknown kernel '" + kernel_name + "' (available: gaussian)");
  const auto sigma = sigma_squared(gaussian_kernel());
  Sink sink(path, out);
  sink.stream() << json{{"kernel", kernel_name}, {"sigma2", sigma.value}, {"error_estimate", sigma.error_estimate}}
                       .dump(2)
                << '\n';
  sink.finish();
  return kPass;
}

int cmd_verify(const std::string& config_path, const std::string& path, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = parse_experiment_config(read_file(config_path));
  const CltReport report = run_experiment(config);
  Sink sink(path, out);
  sink.stream() << report_to_json(report) << '\n';
  sink.finish();
  if (!report.pass) {
    err << "verification failed: ";
    for (std::size_t j = 0; j < report.columns.size(); ++j) {
      if (!report.ks_pass[j]) err << report.columns[j].label << " KS p=" << report.ks[j].p_value << "; ";
      if (!report.mean_pass[j]) err << report.columns[j].label << " mean; ";
    }
    if (!report.covariance_pass) err << "off-diagonal covariance";
    err << '\n';
  }
  return report.pass ? kPass : kFail;
}

struct ContourArgs {
  SampleSource source;
  Bandwidth bandwidth;
  std::optional<double> x;
  double v0 = 1.0;
  std::size_t per_side = 2000;
  double tolerance = 1e-3;
  std::string out;
};

int cmd_contour(ContourArgs& a, std::ostream& out, std::ostream& err) {
  const SpectralSample sample = a.source.load();
  json meta = a.source.describe();
  const double h = a.bandwidth.resolve(sample.n(), meta);
  const MpLaw law = sample.law();
  const double x = a.x.value_or(0.5 * (law.lower_edge() + law.upper_edge()));
  ContourSpec spec = ContourSpec::defaults_for(law);
  spec.v0 = a.v0;
  spec.points_per_side = a.per_side;
  const ContourReport r = contour_check(sample, law, gaussian_kernel(), h, x, spec);
  const bool pass = r.relative_residual <= a.tolerance;
  meta.update(json{{"x", x},
                   {"h", h},
                   {"p", sample.p()},
                   {"n", sample.n()},
                   {"contour", {{"left", spec.left}, {"right", spec.right}, {"v0", spec.v0}, {"points_per_side", spec.points_per_side}}},
                   {"lhs", r.lhs},
                   {"rhs", r.rhs},
                   {"imaginary_residue", r.imaginary_residue},
                   {"relative_residual", r.relative_residual},
                   {"tolerance", a.tolerance},
                   {"pass", pass}});
  Sink sink(a.out, out);
  sink.stream() << meta.dump(2) << '\n';
  sink.finish();
  if (!pass) err << "contour residual " << r.relative_residual << " exceeds " << a.tolerance << '\n';
  return pass ? kPass : kFail;
}

struct BiasArgs {
  std::size_t p = 250;
  std::size_t n = 500;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  double v = 0.1;
  std::size_t points = 10;
  std::size_t growth = 4;
  std::string out;
};

int cmd_bias(const BiasArgs& a, std::ostream& out, std::ostream& err) {
  if (a.p == 0 || a.n <= a.p) throw UsageError("bias needs 0 < p < n");
  if (a.points == 0) throw UsageError("--points must be at least 1");
  if (!(a.v > 0.0)) throw UsageError("--v must be positive");
  const MpLaw law(static_cast<double>(a.p) / static_cast<double>(a.n));
  const double lo = law.lower_edge() + 0.1;
  const double hi = law.upper_edge() - 0.1;
  if (!(hi > lo)) throw UsageError("bulk too narrow for the default z grid");
  BiasCheckConfig config;
  config.p = a.p;
  config.n = a.n;
  config.replications = a.reps;
  config.master_seed = a.seed;
  config.growth = a.growth;
  for (double u : linear_grid(lo, hi, a.points)) config.z_grid.emplace_back(u, a.v);
  const BiasReport report = bias_check(config);
  Sink sink(a.out, out);
  sink.stream() << bias_report_to_json(report) << '\n';
  sink.finish();
  if (!report.pass) err << "bias ratio " << report.ratio << " is not below " << config.max_ratio << '\n';
  return report.pass ? kPass : kFail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Marchenko-Pastur law, smoothed spectral estimators and their CLT checks", "mpspec"};
  app.set_help_flag("--help", "Print help and exit");
  app.require_subcommand(1, 1);

  MpArgs mp;
  auto* mp_cmd = app.add_subcommand("mp", "Tabulate the MP density and distribution function");
  mp_cmd->add_option("--c", mp.c, "Ratio c = p/n")->required();
  mp_cmd->add_option("--points", mp.points, "Grid size");
  mp_cmd->add_option("--from", mp.from, "Grid start (default 0)");
  mp_cmd->add_option("--to", mp.to, "Grid end (default b + 0.5)");
  mp_cmd->add_option("--out", mp.out, "Output CSV (default stdout)");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Smoothed density and distribution function on a grid");
  est.source.attach(*est_cmd);
  est.bandwidth.attach(*est_cmd, "cdf");
  est_cmd->add_option("--points", est.points, "Grid size");
  est_cmd->add_option("--from", est.from, "Grid start (default min eigenvalue - 5h)");
  est_cmd->add_option("--to", est.to, "Grid end (default max eigenvalue + 5h)");
  est_cmd->add_option("--out", est.out, "Output CSV (default stdout)");

  QuantileArgs qu;
  auto* qu_cmd = app.add_subcommand("quantile", "Smoothed quantiles next to the MP quantiles");
  qu.source.attach(*qu_cmd);
  qu.bandwidth.attach(*qu_cmd, "cdf");
  qu_cmd->add_option("--alpha", qu.alpha, "Quantile levels")->delimiter(',');
  qu_cmd->add_option("--out", qu.out, "Output CSV (default stdout)");

  std::string kernel = "gaussian";
  std::string sigma_out;
  auto* sigma_cmd = app.add_subcommand("sigma2", "Density-CLT variance constant of a kernel");
  sigma_cmd->add_option("--kernel", kernel, "Kernel name");
  sigma_cmd->add_option("--out", sigma_out, "Output JSON (default stdout)");

  std::string config_path;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "Run a Monte Carlo CLT experiment from a JSON config");
  verify_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  verify_cmd->add_option("--out", verify_out, "Report JSON (default stdout)");

  ContourArgs co;
  auto* co_cmd = app.add_subcommand("contour", "Check the contour-integral form of the density statistic");
  co.source.attach(*co_cmd, 200, 400);
  co.bandwidth.attach(*co_cmd, "density");
  co_cmd->add_option("--x", co.x, "Evaluation point (default bulk midpoint)");
  co_cmd->add_option("--v0", co.v0, "Contour half-height in units of h");
  co_cmd->add_option("--points-per-side", co.per_side, "Quadrature points per rectangle side");
  co_cmd->add_option("--tolerance", co.tolerance, "Maximum relative residual");
  co_cmd->add_option("--out", co.out, "Report JSON (default stdout)");

  BiasArgs bi;
  auto* bi_cmd = app.add_subcommand("bias", "Check that n v |E m_n - m_n^0| stays bounded as n grows");
  bi_cmd->add_option("--p", bi.p, "Dimension of the first level");
  bi_cmd->add_option("--n", bi.n, "Sample size of the first level");
  bi_cmd->add_option("--reps", bi.reps, "Replications per level");
  bi_cmd->add_option("--seed", bi.seed, "Master seed");
  bi_cmd->add_option("--v", bi.v, "Imaginary part of the z grid");
  bi_cmd->add_option("--points", bi.points, "Number of z grid points across the bulk");
  bi_cmd->add_option("--growth", bi.growth, "Factor applied to p and n for the second level");
  bi_cmd->add_option("--out", bi.out, "Report JSON (default stdout)");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("mpspec");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (mp_cmd->parsed()) return cmd_mp(mp, out);
    if (est_cmd->parsed()) return cmd_estimate(est, out);
    if (qu_cmd->parsed()) return cmd_quantile(qu, out);
    if (sigma_cmd->parsed()) return cmd_sigma2(kernel, sigma_out, out);
    if (verify_cmd->parsed()) return cmd_verify(config_path, verify_out, out, err);
    if (co_cmd->parsed()) return cmd_contour(co, out, err);
    if (bi_cmd->parsed()) return cmd_bias(bi, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kFail;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}

}  // namespace mpspec::cli
