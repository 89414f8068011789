#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drx/forecast.hpp"
#include "drx/spikeprob.hpp"
#include "drx/stats.hpp"
#include "drx/synth.hpp"
#include "drx/sysid.hpp"
#include "drx/welfare.hpp"

namespace drx {

using Json = nlohmann::json;  // keys serialize sorted: stable byte output

// --------------------------------------------------------------------------
// ArxModel files
// Schema: {ar_lags, ar_coeffs, x_lags, x_coeffs, intercept, transform,
//          log_base, noise_std, interval_mins, meta}
// --------------------------------------------------------------------------

inline Json json_of(const ArxModel& m, Json meta = Json::object()) {
  return Json{{"ar_lags", m.ar_lags},
              {"ar_coeffs", m.ar_coeffs},
              {"x_lags", m.x_lags},
              {"x_coeffs", m.x_coeffs},
              {"intercept", m.intercept},
              {"transform", m.transform == Transform::log ? "log" : "identity"},
              {"log_base", m.log_base},
              {"noise_std", m.noise_std},
              {"interval_mins", m.interval_mins},
              {"meta", std::move(meta)}};
}

inline ArxModel arx_model_from_json(const Json& j) {
  ArxModel m;
  try {
    m.ar_lags = j.at("ar_lags").get<std::vector<int>>();
    m.ar_coeffs = j.at("ar_coeffs").get<std::vector<double>>();
    m.x_lags = j.at("x_lags").get<std::vector<int>>();
    m.x_coeffs = j.at("x_coeffs").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    const std::string tr = j.at("transform").get<std::string>();
    if (tr == "log")
      m.transform = Transform::log;
    else if (tr == "identity")
      m.transform = Transform::identity;
    else
      throw ConfigError("unknown transform '" + tr + "'");
    m.log_base = j.value("log_base", 2.718281828459045235);
    m.noise_std = j.value("noise_std", 0.0);
    m.interval_mins = j.value("interval_mins", 15);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
  m.validate();
  return m;
}

// --------------------------------------------------------------------------
// Fit reports: the paper's table layout (Estimate/SE/tStat/pValue rows plus
// RMSE, R^2, F and its p-value).
// --------------------------------------------------------------------------

inline Json json_of(const OlsFit& fit) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i)
    rows.push_back(Json{{"coeff", fit.names[i]},
                        {"estimate", fit.estimates[i]},
                        {"se", fit.std_errors[i]},
                        {"tstat", fit.t_stats[i]},
                        {"pvalue", fit.p_values[i]}});
  return Json{{"rows", rows},       {"rmse", fit.rmse},
              {"r2", fit.r2},       {"f_stat", fit.f_stat},
              {"f_pvalue", fit.f_p_value}, {"n_obs", fit.n_obs}};
}

inline Json json_of(const TwoStepFit& fit) {
  return Json{{"step1", json_of(fit.step1)},
              {"step2", json_of(fit.step2)},
              {"combined_r2", fit.combined_r2},
              {"n_rows", fit.rows.size()},
              {"model", json_of(fit.model)}};
}

inline Json json_of(const TransferFunction& tf) {
  return Json{{"numerator", tf.numerator}, {"denominator", tf.denominator}};
}

// --------------------------------------------------------------------------
// Statistics results
// --------------------------------------------------------------------------

inline Json json_of(const MomentStats& m) {
  return Json{{"n", m.n},
              {"mean", m.mean},
              {"std", m.std},
              {"skewness", m.skewness},
              {"kurtosis", m.kurtosis}};
}

inline Json json_of(const AcfResult& r) {
  return Json{{"values", r.values}, {"confidence_band", r.confidence_band}};
}

inline Json json_of(const AnovaTable& t) {
  return Json{{"ss_groups", t.ss_groups}, {"ss_error", t.ss_error},
              {"ss_total", t.ss_total},   {"df_groups", t.df_groups},
              {"df_error", t.df_error},   {"df_total", t.df_total},
              {"ms_groups", t.ms_groups}, {"ms_error", t.ms_error},
              {"f_stat", t.f_stat},       {"p_value", t.p_value}};
}

inline Json json_of(const BoxStats& b) {
  return Json{{"count", b.count},           {"median", b.median},
              {"q1", b.q1},                 {"q3", b.q3},
              {"lo_whisker", b.lo_whisker}, {"hi_whisker", b.hi_whisker},
              {"outliers", b.outliers},     {"empty", b.empty}};
}

inline Json json_of(const SpikeProbProfile& p) {
  return Json{{"window_start_tod", p.condition.window_start_tod},
              {"window_end_tod", p.condition.window_end_tod},
              {"price_lo", p.condition.price_lo},
              {"price_hi", p.condition.price_hi},
              {"threshold", p.threshold},
              {"delays", p.delays},
              {"conditional", p.conditional},
              {"hits", p.hits},
              {"counts", p.counts},
              {"baseline", p.baseline},
              {"baseline_hits", p.baseline_hits},
              {"baseline_count", p.baseline_count}};
}

// --------------------------------------------------------------------------
// Welfare scenario files: JSON list of
//   {demand: {intercept, slope}, supply: {...} | supplies: [{...}, ...],
//    p0?, event?}
// --------------------------------------------------------------------------

inline LinearCurve curve_from_json(const Json& j) {
  LinearCurve c;
  c.intercept = j.at("intercept").get<double>();
  c.slope = j.at("slope").get<double>();
  if (j.contains("capacity")) c.capacity = j.at("capacity").get<double>();
  return c;
}

inline Json json_of(const LinearCurve& c) {
  Json j{{"intercept", c.intercept}, {"slope", c.slope}};
  if (c.capacity) j["capacity"] = *c.capacity;
  return j;
}

inline std::vector<MarketScenario> scenarios_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("scenario file must be a JSON list");
  std::vector<MarketScenario> out;
  for (const auto& item : j) {
    MarketScenario sc;
    try {
      sc.demand = curve_from_json(item.at("demand"));
      if (item.contains("supplies")) {
        for (const auto& s : item.at("supplies"))
          sc.supplies.push_back(curve_from_json(s));
      } else {
        sc.supplies.push_back(curve_from_json(item.at("supply")));
      }
      if (item.contains("p0") && !item.at("p0").is_null())
        sc.fixed_price = item.at("p0").get<double>();
      sc.event = item.value("event", "");
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("scenario file: ") + e.what());
    }
    out.push_back(std::move(sc));
  }
  return out;
}

inline Json json_of(const DwlResult& r) {
  auto pt = [](const Point& p) {
    return Json{{"quantity", p.quantity}, {"price", p.price}};
  };
  return Json{{"equilibrium", pt(r.equilibrium)},
              {"realized", pt(r.realized)},
              {"deadweight_loss", r.deadweight_loss},
              {"vertex_a", pt(r.vertex_a)},
              {"vertex_b", pt(r.vertex_b)},
              {"vertex_c", pt(r.vertex_c)}};
}

// --------------------------------------------------------------------------
// Synthetic-data specs
// --------------------------------------------------------------------------

inline Json json_of(const PriceProcessSpec& s) {
  return Json{{"log_space", s.log_space},
              {"mean", s.mean},
              {"phi", s.phi},
              {"innov_std", s.innov_std},
              {"min_price", s.min_price},
              {"spike_rate_per_day", s.spike_rate_per_day},
              {"tod_weights", s.tod_weights},
              {"spike_shape", s.spike_shape},
              {"spike_scale", s.spike_scale},
              {"spike_duration_min", s.spike_duration_min},
              {"spike_duration_max", s.spike_duration_max},
              {"interval_mins", s.interval_mins}};
}

inline PriceProcessSpec price_spec_from_json(const Json& j) {
  PriceProcessSpec s;
  try {
    s.log_space = j.value("log_space", s.log_space);
    s.mean = j.value("mean", s.mean);
    s.phi = j.value("phi", s.phi);
    s.innov_std = j.value("innov_std", s.innov_std);
    s.min_price = j.value("min_price", s.min_price);
    s.spike_rate_per_day = j.value("spike_rate_per_day", s.spike_rate_per_day);
    s.tod_weights = j.value("tod_weights", s.tod_weights);
    s.spike_shape = j.value("spike_shape", s.spike_shape);
    s.spike_scale = j.value("spike_scale", s.spike_scale);
    s.spike_duration_min = j.value("spike_duration_min", s.spike_duration_min);
    s.spike_duration_max = j.value("spike_duration_max", s.spike_duration_max);
    s.interval_mins = j.value("interval_mins", s.interval_mins);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("price spec: ") + e.what());
  }
  s.validate();
  return s;
}

inline Json json_of(const PlantSpec& p) {
  Json j{{"base", json_of(p.base)},
         {"surge_delay", p.surge_delay},
         {"surge_log_gain", p.surge_log_gain},
         {"noise_std", p.noise_std},
         {"initial_history", p.initial_history}};
  if (p.surge_threshold < std::numeric_limits<double>::infinity())
    j["surge_threshold"] = p.surge_threshold;
  return j;
}

inline PlantSpec plant_spec_from_json(const Json& j) {
  PlantSpec p;
  try {
    p.base = arx_model_from_json(j.at("base"));
    if (j.contains("surge_threshold") && !j.at("surge_threshold").is_null())
      p.surge_threshold = j.at("surge_threshold").get<double>();
    p.surge_delay = j.value("surge_delay", p.surge_delay);
    p.surge_log_gain = j.value("surge_log_gain", p.surge_log_gain);
    p.noise_std = j.value("noise_std", p.noise_std);
    p.initial_history = j.value("initial_history", p.initial_history);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("plant spec: ") + e.what());
  }
  p.validate();
  return p;
}

// --------------------------------------------------------------------------
// File helpers
// --------------------------------------------------------------------------

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace drx
