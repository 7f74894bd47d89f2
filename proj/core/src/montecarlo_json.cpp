#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "mpspec/montecarlo.hpp"

namespace mpspec {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string(key) + ": required key is missing");
  return doc.at(key);
}

std::size_t count_field(const json& value, const char* key) {
  if (value.is_number_unsigned()) return value.get<std::size_t>();
  if (value.is_number_integer() && value.get<long long>() >= 0) return static_cast<std::size_t>(value.get<long long>());
  throw ConfigError(std::string(key) + ": expected a non-negative integer");
}

double number_field(const json& value, const char* key) {
  if (!value.is_number()) throw ConfigError(std::string(key) + ": expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string(key) + ": expected a finite number");
  return v;
}

std::vector<double> number_list(const json& value, const char* key) {
  if (!value.is_array()) throw ConfigError(std::string(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : value) out.push_back(number_field(item, key));
  return out;
}

std::string string_field(const json& value, const char* key) {
  if (!value.is_string()) throw ConfigError(std::string(key) + ": expected a string");
  return value.get<std::string>();
}

template <class Enum>
Enum choice(const json& value, const char* key, const std::map<std::string, Enum>& options) {
  const std::string s = string_field(value, key);
  const auto it = options.find(s);
  if (it == options.end()) throw ConfigError(std::string(key) + ": unknown value \"" + s + "\"");
  return it->second;
}

const char* regime_name(BandwidthRegime r) { return r == BandwidthRegime::density ? "density" : "cdf"; }
const char* entry_name(EntryDistribution d) { return d == EntryDistribution::three_point ? "three-point" : "gaussian"; }
const char* rate_name(RateConvention r) { return r == RateConvention::sample_size ? "sample_size" : "dimension"; }

const char* kind_name(StatisticKind k) {
  switch (k) {
    case StatisticKind::cdf: return "cdf";
    case StatisticKind::density: return "density";
    case StatisticKind::density_centered: return "density_centered";
    case StatisticKind::quantile: return "quantile";
  }
  return "?";
}

json config_to_json(const ExperimentConfig& c) {
  json j = {{"p", c.p},
            {"n", c.n},
            {"replications", c.replications},
            {"points", c.points},
            {"alpha_list", c.alpha_list},
            {"bandwidth_kind", regime_name(c.bandwidth_kind)},
            {"bandwidth_scale", c.bandwidth_scale},
            {"master_seed", c.master_seed},
            {"entry_dist", entry_name(c.entry_dist)},
            {"rate", rate_name(c.rate)},
            {"ks_threshold", c.ks_threshold},
            {"covariance_tolerance", c.covariance_tolerance}};
  if (c.bandwidth) j["bandwidth"] = *c.bandwidth;
  if (c.coverage_level) j["coverage_level"] = *c.coverage_level;
  return j;
}

json level_to_json(const BiasLevel& level) {
  return {{"p", level.p},
          {"n", level.n},
          {"replications", level.replications},
          {"scaled_bias", level.scaled_bias},
          {"max_scaled_bias", level.max_scaled_bias}};
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  c.p = count_field(require(doc, "p"), "p");
  c.n = count_field(require(doc, "n"), "n");
  c.replications = count_field(require(doc, "replications"), "replications");
  c.points = number_list(require(doc, "points"), "points");

  for (const auto& [key, value] : doc.items()) {
    if (key == "p" || key == "n" || key == "replications" || key == "points") continue;
    if (key == "alpha_list") {
      c.alpha_list = number_list(value, "alpha_list");
    } else if (key == "bandwidth_kind") {
      c.bandwidth_kind = choice<BandwidthRegime>(value, "bandwidth_kind",
                                                 {{"cdf", BandwidthRegime::cdf}, {"density", BandwidthRegime::density}});
    } else if (key == "bandwidth") {
      c.bandwidth = number_field(value, "bandwidth");
    } else if (key == "bandwidth_scale") {
      c.bandwidth_scale = number_field(value, "bandwidth_scale");
    } else if (key == "master_seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0))
        throw ConfigError("master_seed: expected a non-negative integer");
      c.master_seed = value.get<std::uint64_t>();
    } else if (key == "entry_dist") {
      c.entry_dist = choice<EntryDistribution>(
          value, "entry_dist", {{"gaussian", EntryDistribution::gaussian}, {"three-point", EntryDistribution::three_point}});
    } else if (key == "rate") {
      c.rate = choice<RateConvention>(value, "rate",
                                      {{"dimension", RateConvention::dimension}, {"sample_size", RateConvention::sample_size}});
    } else if (key == "coverage_level") {
      c.coverage_level = number_field(value, "coverage_level");
    } else if (key == "ks_threshold") {
      c.ks_threshold = number_field(value, "ks_threshold");
    } else if (key == "covariance_tolerance") {
      c.covariance_tolerance = number_field(value, "covariance_tolerance");
    } else if (key == "threads") {
      c.threads = static_cast<unsigned>(count_field(value, "threads"));
    } else if (key == "kernel") {
      if (string_field(value, "kernel") != "gaussian") throw ConfigError("kernel: only \"gaussian\" is supported");
    } else {
      throw ConfigError(key + ": unknown config key");
    }
  }
  c.validate();
  return c;
}

std::string report_to_json(const CltReport& report, bool include_timing) {
  json columns = json::array();
  for (const auto& col : report.columns)
    columns.push_back({{"label", col.label},
                       {"kind", kind_name(col.kind)},
                       {"point", col.point},
                       {"reference_variance", col.reference_variance},
                       {"target", col.target}});
  json ks = json::array();
  for (const auto& k : report.ks) ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
  json coverage = json::array();
  for (const auto& c : report.coverage)
    coverage.push_back(
        {{"label", c.label}, {"level", c.level}, {"coverage", c.coverage}, {"standard_error", c.standard_error}});
  json out = {{"config", config_to_json(report.config)},
              {"bandwidth", report.bandwidth},
              {"columns", columns},
              {"statistics", report.statistics},
              {"mean", report.mean},
              {"covariance", report.covariance},
              {"ks", ks},
              {"variance_ratio", report.variance_ratio},
              {"checks",
               {{"ks_pass", report.ks_pass},
                {"mean_pass", report.mean_pass},
                {"covariance_pass", report.covariance_pass}}},
              {"coverage", coverage},
              {"pass", report.pass}};
  if (include_timing) out["seconds"] = report.seconds;
  return out.dump(2);
}

std::string bias_report_to_json(const BiasReport& report, bool include_timing) {
  json out = {{"base", level_to_json(report.base)},
              {"grown", level_to_json(report.grown)},
              {"ratio", report.ratio},
              {"low_confidence", report.low_confidence},
              {"pass", report.pass}};
  if (include_timing) out["seconds"] = report.seconds;
  return out.dump(2);
}

}  // namespace mpspec
