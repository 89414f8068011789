#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drx/csv.hpp"
#include "drx/serde.hpp"
#include "drx/synth.hpp"

namespace drx {

// Declarative pipeline configuration. Every field has a default matching
// the reference analysis: 15-minute grid, 95% regime quantile, moderate
// lags {1,3,5}/{1,2}, peak lags {1,2,4}/{4}, 14:00-14:30 surge window,
// natural-log price transform in the peak regime.
struct RunConfig {
  std::string input_csv;
  int interval_mins = 15;
  std::string timestamp_col = "timestamp";
  std::string price_col = "price";
  std::string load_col = "load";
  bool lenient = false;
  bool workdays_only = true;
  std::vector<std::string> holidays;  // "YYYY-MM-DD"

  double regime_quantile = 0.95;
  std::optional<double> regime_threshold;  // overrides the quantile when set

  std::vector<int> moderate_ar_lags{1, 3, 5};
  std::vector<int> moderate_x_lags{1, 2};
  std::vector<int> peak_ar_lags{1, 2, 4};
  std::vector<int> peak_x_lags{4};
  std::string peak_window = "14:00-14:30";
  bool peak_surge_only = true;
  bool fit_peak = true;
  double log_base = 2.718281828459045235;

  std::string forecast_mode = "one-step";  // or "open-loop"

  int max_acf_lag = 50;
  int anova_max_lag = 10;
  std::vector<std::vector<double>> surge_bands;  // [lo, hi] pairs; default from threshold
  int change_max_lag = 12;

  std::vector<std::size_t> spike_delays;  // default 1..24
  std::vector<std::string> spike_windows{"03:00-09:00", "09:00-15:00"};

  std::uint64_t seed = 1;
  double cv_fraction = 0.5;

  std::string welfare_scenario;  // optional scenario file path
  std::string welfare_policy = "rtrp-inertia";

  std::string out_dir = "out";
};

namespace detail {

inline std::pair<int, int> parse_window(const std::string& w) {
  const auto dash = w.find('-');
  if (dash == std::string::npos)
    throw ConfigError("window '" + w + "' must look like HH:MM-HH:MM");
  return {parse_time_of_day(w.substr(0, dash)),
          parse_time_of_day(w.substr(dash + 1))};
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

inline Json json_of(const RunConfig& c) {
  Json j{{"input_csv", c.input_csv},
         {"interval_mins", c.interval_mins},
         {"timestamp_col", c.timestamp_col},
         {"price_col", c.price_col},
         {"load_col", c.load_col},
         {"lenient", c.lenient},
         {"workdays_only", c.workdays_only},
         {"holidays", c.holidays},
         {"regime_quantile", c.regime_quantile},
         {"regime_threshold", c.regime_threshold ? Json(*c.regime_threshold) : Json()},
         {"moderate_ar_lags", c.moderate_ar_lags},
         {"moderate_x_lags", c.moderate_x_lags},
         {"peak_ar_lags", c.peak_ar_lags},
         {"peak_x_lags", c.peak_x_lags},
         {"peak_window", c.peak_window},
         {"peak_surge_only", c.peak_surge_only},
         {"fit_peak", c.fit_peak},
         {"log_base", c.log_base},
         {"forecast_mode", c.forecast_mode},
         {"max_acf_lag", c.max_acf_lag},
         {"anova_max_lag", c.anova_max_lag},
         {"surge_bands", c.surge_bands},
         {"change_max_lag", c.change_max_lag},
         {"spike_delays", c.spike_delays},
         {"spike_windows", c.spike_windows},
         {"seed", c.seed},
         {"cv_fraction", c.cv_fraction},
         {"welfare_scenario", c.welfare_scenario},
         {"welfare_policy", c.welfare_policy},
         {"out_dir", c.out_dir}};
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  const Json defaults = json_of(c);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key))
      throw ConfigError("unknown config key '" + key + "'");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null())
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("input_csv", c.input_csv);
  get("interval_mins", c.interval_mins);
  get("timestamp_col", c.timestamp_col);
  get("price_col", c.price_col);
  get("load_col", c.load_col);
  get("lenient", c.lenient);
  get("workdays_only", c.workdays_only);
  get("holidays", c.holidays);
  get("regime_quantile", c.regime_quantile);
  if (j.contains("regime_threshold") && !j.at("regime_threshold").is_null())
    c.regime_threshold = j.at("regime_threshold").get<double>();
  get("moderate_ar_lags", c.moderate_ar_lags);
  get("moderate_x_lags", c.moderate_x_lags);
  get("peak_ar_lags", c.peak_ar_lags);
  get("peak_x_lags", c.peak_x_lags);
  get("peak_window", c.peak_window);
  get("peak_surge_only", c.peak_surge_only);
  get("fit_peak", c.fit_peak);
  get("log_base", c.log_base);
  get("forecast_mode", c.forecast_mode);
  get("max_acf_lag", c.max_acf_lag);
  get("anova_max_lag", c.anova_max_lag);
  get("surge_bands", c.surge_bands);
  get("change_max_lag", c.change_max_lag);
  get("spike_delays", c.spike_delays);
  get("spike_windows", c.spike_windows);
  get("seed", c.seed);
  get("cv_fraction", c.cv_fraction);
  get("welfare_scenario", c.welfare_scenario);
  get("welfare_policy", c.welfare_policy);
  get("out_dir", c.out_dir);
  return c;
}

struct RunReport {
  std::string out_dir;
  std::vector<std::string> artifacts;  // relative paths, in write order
  Json manifest;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << body;
}

inline void append_fit_table(std::ostringstream& os, const std::string& title,
                             const OlsFit& fit) {
  os << "== " << title << " ==\n";
  os << "Coeff        Estimate      SE            tStat         pValue\n";
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-13.6g %-13.6g %-13.6g %-13.6g\n",
                  fit.names[i].c_str(), fit.estimates[i], fit.std_errors[i],
                  fit.t_stats[i], fit.p_values[i]);
    os << line;
  }
  os << "sqrt(MSE): " << fmt(fit.rmse) << "   R2: " << fmt(fit.r2) << "\n";
  os << "F vs constant model: " << fmt(fit.f_stat)
     << "   p-value: " << fmt(fit.f_p_value) << "\n\n";
}

inline std::string tf_to_string(const TransferFunction& tf) {
  auto poly = [](const std::vector<double>& c) {
    std::string s;
    bool any = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] == 0.0) continue;
      if (any) s += c[i] < 0 ? " - " : " + ";
      else if (c[i] < 0) s += "-";
      const double a = std::fabs(c[i]);
      if (i == 0) {
        s += fmt(a);
      } else {
        s += fmt(a) + " z^-" + std::to_string(i);
      }
      any = true;
    }
    return any ? s : std::string("0");
  };
  return "(" + poly(tf.numerator) + ") / (" + poly(tf.denominator) + ")";
}

}  // namespace detail

// Executes the full analysis on one input file: ingest -> stats -> regime
// split -> two-step fits (both regimes) -> forecast diagnostics ->
// spike-probability profiles -> optional welfare schedule. Artifacts are
// deterministic: identical config + input + seed produce byte-identical
// files. Any stage failure is rethrown as StageError after a partial
// manifest has been written.
inline RunReport run_pipeline(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  RunReport report;
  report.out_dir = cfg.out_dir;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  const std::string config_dump = json_of(cfg).dump();
  char hash_hex[24];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(config_dump)));

  auto emit = [&](const std::string& rel, const Json& j) {
    write_json_file((out / rel).string(), j);
    report.artifacts.push_back(rel);
  };
  auto emit_text = [&](const std::string& rel, const std::string& body) {
    detail::write_text_file(out / rel, body);
    report.artifacts.push_back(rel);
  };
  auto write_manifest = [&](const std::string& status) {
    Json m{{"config_hash", std::string(hash_hex)},
           {"version", DRX_VERSION},
           {"status", status},
           {"artifacts", report.artifacts}};
    write_json_file((out / "manifest.json").string(), m);
    report.manifest = m;
  };
  std::string stage = "config";
  try {
    emit("config.json", json_of(cfg));

    // ---- ingest ------------------------------------------------------
    stage = "ingest";
    CsvSchema schema;
    schema.timestamp_col = cfg.timestamp_col;
    schema.price_col = cfg.price_col;
    schema.load_col = cfg.load_col;
    std::ifstream in(cfg.input_csv);
    if (!in) throw ConfigError("cannot open input '" + cfg.input_csv + "'");
    const ParseResult parsed = parse_csv(in, schema, cfg.lenient);
    AlignedSeries series = align(parsed.records, cfg.interval_mins);
    if (cfg.workdays_only) {
      WorkdayCalendar cal;
      for (const auto& h : cfg.holidays) cal.holidays.push_back(parse_date(h));
      series = filter_workdays(series, cal);
    }
    {
      Json diag = Json::array();
      for (const auto& d : parsed.diagnostics)
        diag.push_back(Json{{"line", d.line}, {"message", d.message}});
      emit("ingest.json",
           Json{{"records", parsed.records.size()},
                {"grid_size", series.size()},
                {"valid", series.valid_count()},
                {"start", format_timestamp(series.start)},
                {"interval_mins", series.interval_mins},
                {"diagnostics", diag}});
    }

    // ---- stats -------------------------------------------------------
    stage = "stats";
    const double threshold =
        cfg.regime_threshold ? *cfg.regime_threshold
                             : quantile(series.prices, cfg.regime_quantile, series.mask);
    const MomentStats mp = moments(series.prices, series.mask);
    const MomentStats mq = moments(series.loads, series.mask);
    const std::size_t acf_lag =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.max_acf_lag),
                              series.valid_count() / 2 - 1);
    const AcfResult load_acf = acf(series.loads, acf_lag, series.mask);
    const AcfResult load_pacf = pacf(series.loads, acf_lag, series.mask);

    // Post-surge load groups by lag: the box-plot/ANOVA view of the drop.
    std::vector<std::size_t> surge_onsets;
    for (std::size_t t = 1; t < series.size(); ++t)
      if (series.mask[t] && series.mask[t - 1] && series.prices[t] > threshold &&
          series.prices[t - 1] <= threshold)
        surge_onsets.push_back(t);
    std::optional<AnovaTable> anova;
    {
      std::vector<std::vector<double>> groups(
          static_cast<std::size_t>(cfg.anova_max_lag) + 1);
      for (std::size_t t : surge_onsets)
        for (std::size_t k = 0; k < groups.size(); ++k)
          if (t + k < series.size() && series.mask[t + k])
            groups[k].push_back(series.loads[t + k]);
      bool ok = groups.size() >= 2;
      for (const auto& g : groups) ok = ok && g.size() >= 2;
      if (ok) anova = anova_oneway(groups);
    }

    {
      Json sj{{"price_moments", json_of(mp)},
              {"load_moments", json_of(mq)},
              {"threshold", threshold},
              {"surge_onsets", surge_onsets.size()},
              {"load_acf", json_of(load_acf)},
              {"load_pacf", json_of(load_pacf)}};
      sj["anova_post_surge"] = anova ? json_of(*anova) : Json();
      emit("stats.json", sj);
    }
    {
      std::ostringstream csv;
      csv << "lag,acf,pacf,band\n";
      for (std::size_t k = 0; k < load_acf.values.size(); ++k)
        csv << k << ',' << detail::fmt(load_acf.values[k]) << ','
            << detail::fmt(load_pacf.values[k]) << ','
            << detail::fmt(load_acf.confidence_band) << '\n';
      emit_text("acf.csv", csv.str());
    }
    {
      std::ostringstream csv;
      csv << "bucket,field,count,median,q1,q3,lo_whisker,hi_whisker,outliers\n";
      for (Field f : {Field::price, Field::load}) {
        const auto boxes = hourly_summary(series, f);
        for (std::size_t b = 0; b < boxes.size(); ++b) {
          csv << b << ',' << (f == Field::price ? "price" : "load") << ','
              << boxes[b].count << ',';
          if (boxes[b].empty) {
            csv << ",,,,,\n";
            continue;
          }
          csv << detail::fmt(boxes[b].median) << ',' << detail::fmt(boxes[b].q1)
              << ',' << detail::fmt(boxes[b].q3) << ','
              << detail::fmt(boxes[b].lo_whisker) << ','
              << detail::fmt(boxes[b].hi_whisker) << ','
              << boxes[b].outliers.size() << '\n';
        }
      }
      emit_text("hourly.csv", csv.str());
    }
    {
      // Average post-surge load change per band and lag, plus the
      // surge-height/load lagged correlation.
      std::vector<std::vector<double>> bands = cfg.surge_bands;
      if (bands.empty())
        bands = {{threshold, 2.0 * threshold},
                 {2.0 * threshold, std::numeric_limits<double>::infinity()}};
      std::ostringstream csv;
      csv << "band_lo,band_hi,lag,avg_change,corr\n";
      std::vector<double> dp(series.size(), 0.0);
      for (std::size_t t = 1; t < series.size(); ++t)
        dp[t] = series.prices[t] - series.prices[t - 1];
      for (const auto& band : bands) {
        if (band.size() != 2) throw ConfigError("surge_bands entries must be [lo, hi]");
        for (int k = 0; k <= cfg.change_max_lag; ++k) {
          std::string avg = "", corr = "";
          try {
            avg = detail::fmt(avg_change_after_surge(series, band[0], band[1],
                                                     static_cast<std::size_t>(k)));
          } catch (const InsufficientDataError&) {
          }
          try {
            corr = detail::fmt(lagged_correlation(surge_onsets, dp, series.loads,
                                                  static_cast<std::size_t>(k)));
          } catch (const Error&) {
          }
          csv << detail::fmt(band[0]) << ',' << detail::fmt(band[1]) << ',' << k
              << ',' << avg << ',' << corr << '\n';
        }
      }
      emit_text("surge_response.csv", csv.str());
    }

    // ---- regime split --------------------------------------------------
    stage = "split";
    const RegimeSplit split = split_regimes_at(series, threshold);
    emit("split.json", Json{{"threshold", split.threshold},
                            {"moderate", split.moderate.size()},
                            {"high", split.high.size()}});

    // ---- fits ----------------------------------------------------------
    stage = "fit";
    TwoStepSpec mod_spec;
    mod_spec.ar_lags = cfg.moderate_ar_lags;
    mod_spec.x_lags = cfg.moderate_x_lags;
    mod_spec.transform = Transform::identity;
    mod_spec.scope = split.moderate;
    const TwoStepFit mod_fit = two_step_arx(series, mod_spec);
    emit("fit_moderate.json", json_of(mod_fit));
    emit("model_moderate.json",
         json_of(mod_fit.model, Json{{"regime", "moderate"},
                                     {"threshold", split.threshold}}));

    std::optional<TwoStepFit> peak_fit;
    if (cfg.fit_peak) {
      const auto [wstart, wend] = detail::parse_window(cfg.peak_window);
      PeakScopeOptions popt;
      popt.window_start_tod = wstart;
      popt.window_end_tod = wend;
      popt.anchor_lag = cfg.peak_x_lags.empty() ? 0 : cfg.peak_x_lags.back();
      popt.surge_threshold = threshold;
      popt.surge_only = cfg.peak_surge_only;
      TwoStepSpec peak_spec;
      peak_spec.ar_lags = cfg.peak_ar_lags;
      peak_spec.x_lags = cfg.peak_x_lags;
      peak_spec.transform = Transform::log;
      peak_spec.log_base = cfg.log_base;
      peak_spec.scope = peak_scope(series, popt);
      peak_fit = two_step_arx(series, peak_spec);
      emit("fit_peak.json", json_of(*peak_fit));
      emit("model_peak.json",
           json_of(peak_fit->model, Json{{"regime", "peak"},
                                         {"threshold", split.threshold},
                                         {"window", cfg.peak_window}}));
    }

    // Cross-validation of the moderate fit.
    const CrossValidation cv = cross_validate(series, mod_spec, cfg.cv_fraction, cfg.seed);
    emit("cv_moderate.json", Json{{"train_r2", cv.train.combined_r2},
                                  {"test_r2", cv.test_r2},
                                  {"test_rmse", cv.test_rmse},
                                  {"n_train", cv.n_train},
                                  {"n_test", cv.n_test},
                                  {"seed", cfg.seed}});

    // ---- forecast diagnostics -----------------------------------------
    stage = "forecast";
    if (cfg.forecast_mode != "one-step" && cfg.forecast_mode != "open-loop")
      throw ConfigError("unknown forecast_mode '" + cfg.forecast_mode + "'");
    const TwoStepFit& fc_fit = peak_fit ? *peak_fit : mod_fit;
    ForecastResult fc;
    std::vector<std::size_t> fc_rows;
    const int delay = fc_fit.model.max_x_lag();
    const bool open_loop = cfg.forecast_mode == "open-loop" && delay >= 1;
    for (std::size_t t : fc_fit.rows) {
      double qhat;
      if (open_loop) {
        // Iterate from the surge anchor, feeding forecasts back into the
        // AR terms. Needs every grid slot under the iteration valid.
        const std::size_t lookback =
            static_cast<std::size_t>(delay + fc_fit.model.max_ar_lag());
        if (t < lookback) continue;
        bool covered = true;
        for (std::size_t u = t - lookback; u < t; ++u) covered = covered && series.mask[u];
        if (!covered) continue;
        const std::vector<double> hist(
            series.loads.begin(),
            series.loads.begin() + static_cast<std::ptrdiff_t>(t - delay + 1));
        const ForecastResult step = forecast_k(fc_fit.model, hist, series.prices,
                                               static_cast<std::size_t>(delay));
        qhat = step.forecasts.back();
      } else {
        qhat = predict_one_step(fc_fit.model, series.loads, series.prices, t);
      }
      fc_rows.push_back(t);
      fc.forecasts.push_back(qhat);
      fc.realized.push_back(series.loads[t]);
      fc.residuals.push_back(series.loads[t] - qhat);
    }
    fc.horizon = fc.forecasts.size();
    {
      std::ostringstream csv;
      csv << "timestamp,qhat,q,residual\n";
      for (std::size_t i = 0; i < fc_rows.size(); ++i)
        csv << format_timestamp(series.time_at(fc_rows[i])) << ','
            << detail::fmt(fc.forecasts[i]) << ',' << detail::fmt(fc.realized[i])
            << ',' << detail::fmt(fc.residuals[i]) << '\n';
      emit_text("forecast.csv", csv.str());
    }
    Json fc_diag;
    if (fc.forecasts.size() >= 4) {
      try {
        const ResidualDiagnostics d = residual_diagnostics(fc);
        fc_diag = Json{{"residual_moments", json_of(d.moments)},
                       {"forecast_realized_corr", d.forecast_realized_corr},
                       {"mode", cfg.forecast_mode}};
      } catch (const DegenerateInputError& e) {
        fc_diag = Json{{"skipped", e.what()}};
      }
    } else {
      fc_diag = Json{{"skipped", "fewer than 4 forecast rows"}};
    }
    emit("forecast.json", fc_diag);

    // ---- spike probabilities -------------------------------------------
    stage = "spikeprob";
    {
      std::vector<std::size_t> delays = cfg.spike_delays;
      if (delays.empty())
        for (std::size_t k = 1; k <= 24; ++k) delays.push_back(k);
      std::ostringstream csv;
      csv << "window,lag,conditional,baseline,hits,count\n";
      Json windows = Json::array();
      for (const auto& w : cfg.spike_windows) {
        const auto [ws, we] = detail::parse_window(w);
        SpikeProbCondition cond;
        cond.window_start_tod = ws;
        cond.window_end_tod = we;
        cond.price_lo = threshold;  // condition on an in-window spike
        const SpikeProbProfile prof =
            conditional_spike_prob(series, cond, delays, threshold);
        windows.push_back(json_of(prof));
        for (std::size_t d = 0; d < delays.size(); ++d)
          csv << w << ',' << delays[d] << ','
              << (prof.counts[d] ? detail::fmt(prof.conditional[d]) : "") << ','
              << detail::fmt(prof.baseline) << ',' << prof.hits[d] << ','
              << prof.counts[d] << '\n';
      }
      emit_text("spikeprob.csv", csv.str());
      emit("spikeprob.json", Json{{"windows", windows}});
    }

    // ---- welfare (optional) ---------------------------------------------
    stage = "welfare";
    if (!cfg.welfare_scenario.empty()) {
      const auto scenarios = scenarios_from_json(load_json_file(cfg.welfare_scenario));
      PricingPolicy policy;
      if (cfg.welfare_policy == "fixed") policy = PricingPolicy::fixed;
      else if (cfg.welfare_policy == "rtrp-instant") policy = PricingPolicy::rtrp_instant;
      else if (cfg.welfare_policy == "rtrp-inertia") policy = PricingPolicy::rtrp_inertia;
      else throw ConfigError("unknown welfare policy '" + cfg.welfare_policy + "'");
      const DwlSchedule sched =
          dwl_series(scenarios, policy, cfg.interval_mins / 60.0);
      std::ostringstream csv;
      csv << "interval,dwl,p_star,q_star,p_realized,q_realized\n";
      for (std::size_t i = 0; i < sched.intervals.size(); ++i) {
        const auto& r = sched.intervals[i];
        csv << i << ',' << detail::fmt(r.deadweight_loss) << ','
            << detail::fmt(r.equilibrium.price) << ','
            << detail::fmt(r.equilibrium.quantity) << ','
            << detail::fmt(r.realized.price) << ','
            << detail::fmt(r.realized.quantity) << '\n';
      }
      emit_text("welfare.csv", csv.str());
      emit("welfare.json", Json{{"policy", cfg.welfare_policy},
                                {"total", sched.total},
                                {"total_dollars", sched.total_dollars},
                                {"intervals", sched.intervals.size()}});
    }

    // ---- summary ---------------------------------------------------------
    stage = "summary";
    {
      std::ostringstream os;
      os << "price-responsive demand analysis\n";
      os << "samples: " << series.size() << " grid slots, " << series.valid_count()
         << " valid, from " << format_timestamp(series.start) << " every "
         << series.interval_mins << " min\n\n";
      os << "== Statistics of price (P) and load (Q) ==\n";
      os << "     Kurtosis      Skewness      Mean          Std\n";
      char line[160];
      std::snprintf(line, sizeof line, "P    %-13.6g %-13.6g %-13.6g %-13.6g\n",
                    mp.kurtosis, mp.skewness, mp.mean, mp.std);
      os << line;
      std::snprintf(line, sizeof line, "Q    %-13.6g %-13.6g %-13.6g %-13.6g\n\n",
                    mq.kurtosis, mq.skewness, mq.mean, mq.std);
      os << line;
      os << "regime threshold: " << detail::fmt(threshold) << " $/MWh ("
         << split.moderate.size() << " moderate / " << split.high.size()
         << " high samples)\n\n";
      if (anova) {
        os << "== ANOVA: load vs lag after surge ==\n";
        std::snprintf(line, sizeof line,
                      "Groups SS %.6g DF %zu MS %.6g F %.6g p %.6g\n",
                      anova->ss_groups, anova->df_groups, anova->ms_groups,
                      anova->f_stat, anova->p_value);
        os << line;
        std::snprintf(line, sizeof line, "Error  SS %.6g DF %zu MS %.6g\n\n",
                      anova->ss_error, anova->df_error, anova->ms_error);
        os << line;
      }
      detail::append_fit_table(os, "Moderate regime: AR step", mod_fit.step1);
      detail::append_fit_table(os, "Moderate regime: residual on prices", mod_fit.step2);
      os << "moderate combined R2: " << detail::fmt(mod_fit.combined_r2) << "\n";
      os << "moderate TF: " << detail::tf_to_string(to_transfer_function(mod_fit.model))
         << "\n\n";
      if (peak_fit) {
        detail::append_fit_table(os, "Peak regime: AR step", peak_fit->step1);
        detail::append_fit_table(os, "Peak regime: residual on log prices",
                                 peak_fit->step2);
        os << "peak combined R2: " << detail::fmt(peak_fit->combined_r2) << "\n";
        os << "peak TF: "
           << detail::tf_to_string(to_transfer_function(peak_fit->model)) << "\n\n";
      }
      if (fc_diag.contains("forecast_realized_corr")) {
        os << "forecast diagnostics (" << cfg.forecast_mode
           << "): corr(Qhat, Q) = " << detail::fmt(fc_diag["forecast_realized_corr"].get<double>())
           << ", residual kurtosis = "
           << detail::fmt(fc_diag["residual_moments"]["kurtosis"].get<double>()) << "\n";
      }
      emit_text("summary.txt", os.str());
    }

    write_manifest("ok");
    return report;
  } catch (const Error& e) {
    write_manifest("failed at " + stage);
    throw StageError(stage, e.what());
  } catch (const std::exception& e) {
    write_manifest("failed at " + stage);
    throw StageError(stage, e.what());
  }
}

}  // namespace drx
