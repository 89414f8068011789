// drx — price-responsive electricity demand modeling toolkit.
//
// Subcommands mirror the analysis pipeline: ingest, stats, fit, forecast,
// spikeprob, welfare, synth, and run (the full config-driven study).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "drx/pipeline.hpp"

namespace {

using drx::Json;

struct IngestFlags {
  std::string input;
  int interval_mins = 15;
  std::string timestamp_col = "timestamp";
  std::string price_col = "price";
  std::string load_col = "load";
  bool lenient = false;
};

void add_ingest_flags(CLI::App* cmd, IngestFlags& f) {
  cmd->add_option("--input", f.input, "input CSV file")->required();
  cmd->add_option("--interval-mins", f.interval_mins, "grid interval in minutes");
  cmd->add_option("--timestamp-col", f.timestamp_col, "timestamp column name");
  cmd->add_option("--price-col", f.price_col, "price column name");
  cmd->add_option("--load-col", f.load_col, "load column name");
  cmd->add_flag("--lenient", f.lenient, "skip malformed rows, report diagnostics");
}

drx::AlignedSeries load_series(const IngestFlags& f, bool workdays_only = false,
                               const std::vector<std::string>& holidays = {}) {
  std::ifstream in(f.input);
  if (!in) throw drx::ConfigError("cannot open input '" + f.input + "'");
  drx::CsvSchema schema;
  schema.timestamp_col = f.timestamp_col;
  schema.price_col = f.price_col;
  schema.load_col = f.load_col;
  const drx::ParseResult parsed = drx::parse_csv(in, schema, f.lenient);
  for (const auto& d : parsed.diagnostics)
    std::cerr << "warning: " << d.message << "\n";
  drx::AlignedSeries s = drx::align(parsed.records, f.interval_mins);
  if (workdays_only) {
    drx::WorkdayCalendar cal;
    for (const auto& h : holidays) cal.holidays.push_back(drx::parse_date(h));
    s = drx::filter_workdays(s, cal);
  }
  return s;
}

void write_output(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw drx::ConfigError("cannot write '" + path + "'");
  out << body;
}

std::vector<std::size_t> default_delays(int max_delay) {
  std::vector<std::size_t> d;
  for (int k = 1; k <= max_delay; ++k) d.push_back(static_cast<std::size_t>(k));
  return d;
}

int run_main(int argc, char** argv) {
  CLI::App app{"price-responsive demand modeling toolkit"};
  app.require_subcommand(1);

  // ---- ingest -----------------------------------------------------------
  IngestFlags ing;
  bool ing_workdays = false;
  std::vector<std::string> ing_holidays;
  std::string ing_window, ing_out;
  auto* c_ingest = app.add_subcommand("ingest", "parse, align and filter a CSV");
  add_ingest_flags(c_ingest, ing);
  c_ingest->add_flag("--workdays", ing_workdays, "mask weekend samples");
  c_ingest->add_option("--holiday", ing_holidays, "holiday date YYYY-MM-DD (repeatable)");
  c_ingest->add_option("--window", ing_window, "keep clock window HH:MM-HH:MM");
  c_ingest->add_option("--out", ing_out, "output CSV ('-' = stdout)");

  // ---- stats ------------------------------------------------------------
  IngestFlags st;
  std::string st_what = "moments", st_field = "load", st_out;
  double st_q = 0.95;
  int st_max_lag = 50, st_anova_lag = 10;
  bool st_per_interval = false;
  std::optional<double> st_threshold;
  auto* c_stats = app.add_subcommand("stats", "descriptive statistics");
  add_ingest_flags(c_stats, st);
  c_stats->add_option("what", st_what, "moments|quantile|acf|pacf|hourly|anova")
      ->check(CLI::IsMember({"moments", "quantile", "acf", "pacf", "hourly", "anova"}));
  c_stats->add_option("--field", st_field, "price|load")
      ->check(CLI::IsMember({"price", "load"}));
  c_stats->add_option("--q", st_q, "quantile fraction");
  c_stats->add_option("--max-lag", st_max_lag, "ACF/PACF max lag");
  c_stats->add_option("--anova-max-lag", st_anova_lag, "post-surge lag groups");
  c_stats->add_option("--threshold", [&st_threshold](const CLI::results_t& r) {
    st_threshold = std::stod(r[0]);
    return true;
  }, "surge threshold $/MWh (default: 95% quantile)");
  c_stats->add_flag("--per-interval", st_per_interval, "bucket per grid interval");
  c_stats->add_option("--out", st_out, "output file ('-' = stdout)");

  // ---- fit ----------------------------------------------------------------
  IngestFlags ft;
  std::string ft_kind = "arx", ft_transform, ft_window = "14:00-14:30";
  std::vector<int> ft_lags{1, 3, 5}, ft_xlags{1, 2};
  double ft_quantile = 0.95, ft_log_base = 2.718281828459045235;
  std::optional<double> ft_threshold;
  bool ft_joint = false, ft_all_days = false, ft_workdays = false;
  std::string ft_out, ft_model_out;
  auto* c_fit = app.add_subcommand("fit", "estimate AR / ARX / peak models");
  add_ingest_flags(c_fit, ft);
  c_fit->add_option("kind", ft_kind, "ar|arx|peak")
      ->check(CLI::IsMember({"ar", "arx", "peak"}));
  c_fit->add_option("--lags", ft_lags, "AR lag set");
  c_fit->add_option("--xlags", ft_xlags, "exogenous (price) lag set");
  c_fit->add_option("--transform", ft_transform, "identity|log (default by kind)");
  c_fit->add_option("--log-base", ft_log_base, "log base for the price transform");
  c_fit->add_option("--quantile", ft_quantile, "regime quantile fraction");
  c_fit->add_option("--threshold", [&ft_threshold](const CLI::results_t& r) {
    ft_threshold = std::stod(r[0]);
    return true;
  }, "explicit regime threshold $/MWh");
  c_fit->add_option("--window", ft_window, "peak surge clock window HH:MM-HH:MM");
  c_fit->add_flag("--joint", ft_joint, "joint OLS instead of the two-step procedure");
  c_fit->add_flag("--all-days", ft_all_days,
                  "peak: pool every in-window day, not only surge anchors");
  c_fit->add_flag("--workdays", ft_workdays, "mask weekend samples first");
  c_fit->add_option("--out", ft_out, "fit report JSON ('-' = stdout)");
  c_fit->add_option("--model-out", ft_model_out, "model file JSON");

  // ---- forecast -----------------------------------------------------------
  IngestFlags fc;
  std::string fc_model, fc_out, fc_origin, fc_mode = "open-loop";
  int fc_horizon = 4;
  auto* c_fc = app.add_subcommand("forecast", "k-step forecast from a model file");
  add_ingest_flags(c_fc, fc);
  c_fc->get_option("--input")->description("history CSV (prices must cover the horizon)");
  c_fc->add_option("--model", fc_model, "model JSON file")->required();
  c_fc->add_option("--horizon", fc_horizon, "steps ahead")->check(CLI::PositiveNumber);
  c_fc->add_option("--origin", fc_origin,
                   "forecast origin timestamp (default: horizon steps before the end)");
  c_fc->add_option("--mode", fc_mode, "open-loop|one-step")
      ->check(CLI::IsMember({"open-loop", "one-step"}));
  c_fc->add_option("--out", fc_out, "output CSV ('-' = stdout)");

  // ---- spikeprob ------------------------------------------------------------
  IngestFlags sp;
  std::string sp_window = "09:00-15:00", sp_range, sp_out;
  int sp_max_delay = 24;
  double sp_quantile = 0.95;
  std::optional<double> sp_threshold;
  auto* c_sp = app.add_subcommand("spikeprob", "conditional spike-recurrence profile");
  add_ingest_flags(c_sp, sp);
  c_sp->add_option("--window", sp_window, "clock window HH:MM-HH:MM");
  c_sp->add_option("--range", sp_range,
                   "conditioning price range lo:hi, absolute or qNN:qNN");
  c_sp->add_option("--max-delay", sp_max_delay, "max delay in grid intervals");
  c_sp->add_option("--quantile", sp_quantile, "spike threshold quantile");
  c_sp->add_option("--threshold", [&sp_threshold](const CLI::results_t& r) {
    sp_threshold = std::stod(r[0]);
    return true;
  }, "explicit spike threshold $/MWh");
  c_sp->add_option("--out", sp_out, "output CSV ('-' = stdout)");

  // ---- welfare ---------------------------------------------------------------
  std::string wf_scenario, wf_policy = "rtrp-inertia", wf_out, wf_json_out;
  double wf_interval_hours = 0.25;
  auto* c_wf = app.add_subcommand("welfare", "deadweight-loss schedule");
  c_wf->add_option("--scenario", wf_scenario, "scenario JSON file")->required();
  c_wf->add_option("--policy", wf_policy, "fixed|rtrp-instant|rtrp-inertia")
      ->check(CLI::IsMember({"fixed", "rtrp-instant", "rtrp-inertia"}));
  c_wf->add_option("--interval-hours", wf_interval_hours, "interval length in hours");
  c_wf->add_option("--out", wf_out, "per-interval CSV ('-' = stdout)");
  c_wf->add_option("--json-out", wf_json_out, "totals JSON");

  // ---- synth -----------------------------------------------------------------
  std::string sy_what = "prices", sy_spec, sy_out, sy_start = "2008-01-01T00:00";
  std::uint64_t sy_seed = 1;
  std::size_t sy_n = 960;
  auto* c_sy = app.add_subcommand("synth", "generate synthetic price/load data");
  c_sy->add_option("what", sy_what, "prices|demand")
      ->check(CLI::IsMember({"prices", "demand"}));
  c_sy->add_option("--spec", sy_spec, "spec JSON file")->required();
  c_sy->add_option("--n", sy_n, "number of samples");
  c_sy->add_option("--seed", sy_seed, "RNG seed");
  c_sy->add_option("--start", sy_start, "first timestamp");
  c_sy->add_option("--out", sy_out, "output CSV ('-' = stdout)");

  // ---- run --------------------------------------------------------------------
  std::string run_config, run_input, run_out_dir;
  std::optional<double> run_quantile, run_threshold;
  std::optional<std::uint64_t> run_seed;
  auto* c_run = app.add_subcommand("run", "full pipeline from a config file");
  c_run->add_option("--config", run_config, "config JSON file")->required();
  c_run->add_option("--input", run_input, "override input_csv");
  c_run->add_option("--out-dir", run_out_dir, "override out_dir");
  c_run->add_option("--quantile", [&run_quantile](const CLI::results_t& r) {
    run_quantile = std::stod(r[0]);
    return true;
  }, "override regime_quantile");
  c_run->add_option("--threshold", [&run_threshold](const CLI::results_t& r) {
    run_threshold = std::stod(r[0]);
    return true;
  }, "override regime_threshold");
  c_run->add_option("--seed", [&run_seed](const CLI::results_t& r) {
    run_seed = std::stoull(r[0]);
    return true;
  }, "override seed");

  CLI11_PARSE(app, argc, argv);

  if (c_ingest->parsed()) {
    drx::AlignedSeries s = load_series(ing, ing_workdays, ing_holidays);
    if (!ing_window.empty()) {
      const auto [ws, we] = drx::detail::parse_window(ing_window);
      s = drx::window_by_time_of_day(s, ws, we);
    }
    std::ostringstream os;
    drx::write_csv(os, s);
    write_output(ing_out, os.str());
    std::cerr << s.valid_count() << " valid samples on a " << s.size()
              << "-slot grid from " << drx::format_timestamp(s.start) << "\n";
    return 0;
  }

  if (c_stats->parsed()) {
    const drx::AlignedSeries s = load_series(st);
    const auto& vals = drx::field_of(s, st_field == "price" ? drx::Field::price
                                                            : drx::Field::load);
    Json out;
    if (st_what == "moments") {
      out = drx::json_of(drx::moments(vals, s.mask));
    } else if (st_what == "quantile") {
      out = Json{{"q", st_q}, {"value", drx::quantile(vals, st_q, s.mask)}};
    } else if (st_what == "acf" || st_what == "pacf") {
      const auto r = st_what == "acf"
                         ? drx::acf(vals, static_cast<std::size_t>(st_max_lag), s.mask)
                         : drx::pacf(vals, static_cast<std::size_t>(st_max_lag), s.mask);
      out = drx::json_of(r);
    } else if (st_what == "hourly") {
      Json buckets = Json::array();
      for (const auto& b : drx::hourly_summary(
               s, st_field == "price" ? drx::Field::price : drx::Field::load,
               st_per_interval))
        buckets.push_back(drx::json_of(b));
      out = Json{{"buckets", buckets}};
    } else {  // anova over post-surge lag groups
      const double thr = st_threshold ? *st_threshold
                                      : drx::quantile(s.prices, st_q, s.mask);
      std::vector<std::vector<double>> groups(static_cast<std::size_t>(st_anova_lag) + 1);
      for (std::size_t t = 1; t < s.size(); ++t) {
        if (!(s.mask[t] && s.mask[t - 1] && s.prices[t] > thr &&
              s.prices[t - 1] <= thr))
          continue;
        for (std::size_t k = 0; k < groups.size(); ++k)
          if (t + k < s.size() && s.mask[t + k]) groups[k].push_back(s.loads[t + k]);
      }
      out = drx::json_of(drx::anova_oneway(groups));
      out["threshold"] = thr;
    }
    write_output(st_out, out.dump(2) + "\n");
    return 0;
  }

  if (c_fit->parsed()) {
    const drx::AlignedSeries s = load_series(ft, ft_workdays);
    const double thr = ft_threshold ? *ft_threshold
                                    : drx::quantile(s.prices, ft_quantile, s.mask);
    drx::TwoStepSpec spec;
    spec.ar_lags = ft_lags;
    spec.log_base = ft_log_base;
    if (ft_kind == "ar") {
      spec.x_lags = {};
      spec.transform = drx::Transform::identity;
      spec.scope = drx::split_regimes_at(s, thr).moderate;
    } else if (ft_kind == "arx") {
      spec.x_lags = ft_xlags;
      spec.transform = ft_transform == "log" ? drx::Transform::log
                                             : drx::Transform::identity;
      spec.scope = drx::split_regimes_at(s, thr).moderate;
    } else {  // peak
      spec.x_lags = ft_xlags == std::vector<int>{1, 2} ? std::vector<int>{4} : ft_xlags;
      if (ft_lags == std::vector<int>{1, 3, 5}) spec.ar_lags = {1, 2, 4};
      spec.transform = ft_transform == "identity" ? drx::Transform::identity
                                                  : drx::Transform::log;
      const auto [ws, we] = drx::detail::parse_window(ft_window);
      drx::PeakScopeOptions popt;
      popt.window_start_tod = ws;
      popt.window_end_tod = we;
      popt.anchor_lag = spec.x_lags.empty() ? 0 : spec.x_lags.back();
      popt.surge_threshold = thr;
      popt.surge_only = !ft_all_days;
      spec.scope = drx::peak_scope(s, popt);
    }
    const drx::TwoStepFit fit =
        ft_joint ? drx::joint_arx(s, spec) : drx::two_step_arx(s, spec);
    Json out = drx::json_of(fit);
    out["threshold"] = thr;
    out["transfer_function"] = drx::json_of(drx::to_transfer_function(fit.model));
    write_output(ft_out, out.dump(2) + "\n");
    if (!ft_model_out.empty())
      drx::write_json_file(ft_model_out,
                           drx::json_of(fit.model, Json{{"kind", ft_kind},
                                                        {"threshold", thr}}));
    return 0;
  }

  if (c_fc->parsed()) {
    const drx::AlignedSeries s = load_series(fc);
    const drx::ArxModel model = drx::arx_model_from_json(drx::load_json_file(fc_model));
    const std::size_t k = static_cast<std::size_t>(fc_horizon);
    std::size_t origin = s.size() >= k ? s.size() - k : 0;
    if (!fc_origin.empty()) {
      const drx::Minutes ts = drx::parse_timestamp(fc_origin);
      if (ts < s.start || (ts - s.start) % s.interval_mins != 0)
        throw drx::DomainError("origin timestamp off the series grid");
      origin = static_cast<std::size_t>((ts - s.start) / s.interval_mins);
    }
    if (origin + k > s.size())
      throw drx::InsufficientDataError("horizon extends past the series end");

    drx::ForecastResult result;
    if (fc_mode == "open-loop") {
      const std::vector<double> hist(s.loads.begin(),
                                     s.loads.begin() + static_cast<std::ptrdiff_t>(origin));
      result = drx::forecast_k(model, hist, s.prices, k);
    } else {
      result.horizon = k;
      for (std::size_t i = 0; i < k; ++i)
        result.forecasts.push_back(
            drx::predict_one_step(model, s.loads, s.prices, origin + i));
      result.innovation_std.assign(k, model.noise_std);
    }
    for (std::size_t i = 0; i < k; ++i) {
      result.realized.push_back(s.loads[origin + i]);
      result.residuals.push_back(s.loads[origin + i] - result.forecasts[i]);
    }

    std::ostringstream csv;
    csv << "timestamp,qhat,q,residual,innovation_std\n";
    for (std::size_t i = 0; i < k; ++i) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g\n",
                    drx::format_timestamp(s.time_at(origin + i)).c_str(),
                    result.forecasts[i], result.realized[i], result.residuals[i],
                    result.innovation_std[i]);
      csv << buf;
    }
    write_output(fc_out, csv.str());

    Json diag{{"mode", fc_mode},
              {"horizon", k},
              {"instability_warning", result.instability_warning}};
    if (k >= 4) {
      try {
        const drx::ResidualDiagnostics d = drx::residual_diagnostics(result);
        diag["residual_moments"] = drx::json_of(d.moments);
        diag["forecast_realized_corr"] = d.forecast_realized_corr;
      } catch (const drx::DegenerateInputError& e) {
        diag["skipped"] = e.what();
      }
    }
    std::cerr << diag.dump(2) << "\n";
    return 0;
  }

  if (c_sp->parsed()) {
    const drx::AlignedSeries s = load_series(sp);
    const double thr = sp_threshold ? *sp_threshold
                                    : drx::quantile(s.prices, sp_quantile, s.mask);
    drx::SpikeProbCondition cond;
    const auto [ws, we] = drx::detail::parse_window(sp_window);
    cond.window_start_tod = ws;
    cond.window_end_tod = we;
    if (!sp_range.empty()) {
      const auto colon = sp_range.find(':');
      if (colon == std::string::npos)
        throw drx::ConfigError("--range must be lo:hi");
      auto bound = [&](const std::string& tok) {
        if (!tok.empty() && (tok[0] == 'q' || tok[0] == 'Q')) {
          const double frac = std::stod(tok.substr(1)) / 100.0;
          return drx::quantile(s.prices, frac, s.mask);
        }
        return std::stod(tok);
      };
      cond.price_lo = bound(sp_range.substr(0, colon));
      cond.price_hi = bound(sp_range.substr(colon + 1));
    } else {
      cond.price_lo = thr;  // default: condition on an in-window spike
    }
    const auto prof = drx::conditional_spike_prob(s, cond, default_delays(sp_max_delay), thr);
    std::ostringstream csv;
    csv << "lag,conditional,baseline,hits,count\n";
    for (std::size_t d = 0; d < prof.delays.size(); ++d) {
      char buf[120];
      if (prof.counts[d])
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%zu,%zu\n", prof.delays[d],
                      prof.conditional[d], prof.baseline, prof.hits[d], prof.counts[d]);
      else
        std::snprintf(buf, sizeof buf, "%zu,,%.10g,0,0\n", prof.delays[d], prof.baseline);
      csv << buf;
    }
    write_output(sp_out, csv.str());
    return 0;
  }

  if (c_wf->parsed()) {
    const auto scenarios = drx::scenarios_from_json(drx::load_json_file(wf_scenario));
    drx::PricingPolicy policy = drx::PricingPolicy::rtrp_inertia;
    if (wf_policy == "fixed") policy = drx::PricingPolicy::fixed;
    if (wf_policy == "rtrp-instant") policy = drx::PricingPolicy::rtrp_instant;
    const drx::DwlSchedule sched = drx::dwl_series(scenarios, policy, wf_interval_hours);
    std::ostringstream csv;
    csv << "interval,dwl,p_star,q_star,p_realized,q_realized\n";
    for (std::size_t i = 0; i < sched.intervals.size(); ++i) {
      const auto& r = sched.intervals[i];
      char buf[160];
      std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", i,
                    r.deadweight_loss, r.equilibrium.price, r.equilibrium.quantity,
                    r.realized.price, r.realized.quantity);
      csv << buf;
    }
    write_output(wf_out, csv.str());
    const Json totals{{"policy", wf_policy},
                      {"total", sched.total},
                      {"total_dollars", sched.total_dollars},
                      {"intervals", sched.intervals.size()}};
    if (!wf_json_out.empty())
      drx::write_json_file(wf_json_out, totals);
    else
      std::cerr << totals.dump(2) << "\n";
    return 0;
  }

  if (c_sy->parsed()) {
    const Json spec_json = drx::load_json_file(sy_spec);
    const drx::Minutes start = drx::parse_timestamp(sy_start);
    std::vector<double> prices, loads;
    int interval = 15;
    if (sy_what == "prices") {
      const drx::PriceProcessSpec ps = drx::price_spec_from_json(spec_json);
      interval = ps.interval_mins;
      prices = drx::gen_prices(ps, sy_n, sy_seed);
      loads.assign(prices.size(), 0.0);
    } else {
      const drx::PriceProcessSpec ps = drx::price_spec_from_json(spec_json.at("price"));
      const drx::PlantSpec plant = drx::plant_spec_from_json(spec_json.at("plant"));
      interval = ps.interval_mins;
      prices = drx::gen_prices(ps, sy_n, sy_seed);
      loads = drx::gen_demand(plant, prices, sy_seed + 1);
    }
    const drx::AlignedSeries s = drx::make_series(prices, loads, interval, start);
    std::ostringstream os;
    drx::write_csv(os, s);
    write_output(sy_out, os.str());
    return 0;
  }

  if (c_run->parsed()) {
    drx::RunConfig cfg = drx::run_config_from_json(drx::load_json_file(run_config));
    if (!run_input.empty()) cfg.input_csv = run_input;
    if (!run_out_dir.empty()) cfg.out_dir = run_out_dir;
    if (run_quantile) cfg.regime_quantile = *run_quantile;
    if (run_threshold) cfg.regime_threshold = *run_threshold;
    if (run_seed) cfg.seed = *run_seed;
    const drx::RunReport report = drx::run_pipeline(cfg);
    std::cerr << "wrote " << report.artifacts.size() + 1 << " artifacts to "
              << report.out_dir << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const drx::StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return 2;
  } catch (const drx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
