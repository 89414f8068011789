#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "drx/forecast.hpp"
#include "drx/rng.hpp"
#include "drx/series.hpp"
#include "drx/sysid.hpp"

namespace drx {

// Synthetic spiky price process: an AR(1) base (in price or log-price
// space) with Pareto-magnitude spikes superimposed at time-of-day-weighted
// arrival times. Spikes last one or two grid intervals. All draws come
// from the pinned xoshiro256++ stream, one pass, fixed order (base
// innovation, arrival uniform, then magnitude/duration on arrival), so
// output is byte-identical for identical (spec, seed).
struct PriceProcessSpec {
  bool log_space = false;   // run the AR(1) base on log(P) instead of P
  double mean = 60.0;       // stationary mean of the base (of log P if log_space)
  double phi = 0.0;         // AR(1) coefficient, |phi| < 1; 0 = i.i.d. base
  double innov_std = 10.0;  // base innovation std
  double min_price = 1.0;   // floor applied in price space (keeps log usable)

  double spike_rate_per_day = 0.0;
  std::vector<double> tod_weights;  // 24 hourly weights; empty = uniform
  double spike_shape = 2.5;         // Pareto tail index
  double spike_scale = 150.0;       // minimum spike magnitude, $/MWh
  int spike_duration_min = 1;       // grid intervals (15-30 min at 15-min grid)
  int spike_duration_max = 2;
  int interval_mins = 15;

  void validate() const {
    if (!(std::fabs(phi) < 1.0)) throw DomainError("price spec: |phi| must be < 1");
    if (!(innov_std > 0.0)) throw DomainError("price spec: base std must be positive");
    if (spike_rate_per_day < 0.0) throw DomainError("price spec: negative spike rate");
    if (!tod_weights.empty() && tod_weights.size() != 24)
      throw DomainError("price spec: tod_weights must have 24 entries");
    for (double w : tod_weights)
      if (w < 0.0) throw DomainError("price spec: negative tod weight");
    if (!(spike_shape > 0.0) || !(spike_scale > 0.0))
      throw DomainError("price spec: spike magnitude parameters must be positive");
    if (spike_duration_min < 1 || spike_duration_max < spike_duration_min)
      throw DomainError("price spec: bad spike duration range");
    if (interval_mins <= 0 || 1440 % interval_mins != 0)
      throw DomainError("price spec: interval must divide a day");
  }
};

inline std::vector<double> gen_prices(const PriceProcessSpec& spec, std::size_t n,
                                      std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw DomainError("gen_prices: n must be >= 1");
  Rng rng(seed);

  const std::size_t per_day = static_cast<std::size_t>(1440 / spec.interval_mins);
  double weight_mean = 1.0;
  if (!spec.tod_weights.empty()) {
    weight_mean = 0.0;
    for (double w : spec.tod_weights) weight_mean += w;
    weight_mean /= 24.0;
    if (weight_mean <= 0.0) throw DomainError("gen_prices: all tod weights zero");
  }

  std::vector<double> base(n), spike(n, 0.0);
  const double stat_std = spec.innov_std / std::sqrt(1.0 - spec.phi * spec.phi);
  double x = spec.mean + stat_std * rng.gaussian();
  base[0] = x;
  for (std::size_t t = 1; t < n; ++t) {
    x = spec.mean + spec.phi * (x - spec.mean) + spec.innov_std * rng.gaussian();
    base[t] = x;
  }

  if (spec.spike_rate_per_day > 0.0) {
    for (std::size_t t = 0; t < n; ++t) {
      const int hour = static_cast<int>((t % per_day) * spec.interval_mins / 60);
      const double w =
          spec.tod_weights.empty() ? 1.0 : spec.tod_weights[hour] / weight_mean;
      const double p_arrival =
          spec.spike_rate_per_day * w / static_cast<double>(per_day);
      if (rng.uniform() >= p_arrival) continue;
      const double magnitude = rng.pareto(spec.spike_shape, spec.spike_scale);
      int duration = spec.spike_duration_min;
      if (spec.spike_duration_max > spec.spike_duration_min)
        duration += static_cast<int>(rng.below(static_cast<std::uint64_t>(
            spec.spike_duration_max - spec.spike_duration_min + 1)));
      for (int d = 0; d < duration && t + static_cast<std::size_t>(d) < n; ++d)
        spike[t + static_cast<std::size_t>(d)] += magnitude;
    }
  }

  std::vector<double> prices(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double b = spec.log_space ? std::exp(base[t]) : base[t];
    prices[t] = std::max(b + spike[t], spec.min_price);
  }
  return prices;
}

// Demand plant: the moderate-regime ARX ground truth everywhere, plus an
// optional delayed log-price response that activates only when the price
// at t - surge_delay exceeded the surge threshold. With the overlay off
// this is exactly forecast::simulate on the base model (same noise draw
// order, so outputs are bit-identical).
struct PlantSpec {
  ArxModel base;
  double surge_threshold = std::numeric_limits<double>::infinity();
  int surge_delay = 4;
  double surge_log_gain = 0.0;  // added as gain * log P(t-d) when active
  double noise_std = 0.0;
  std::vector<double> initial_history;  // optional; default: DC fixed point

  bool overlay_active() const {
    return surge_log_gain != 0.0 &&
           surge_threshold < std::numeric_limits<double>::infinity();
  }

  void validate() const {
    base.validate();
    if (!base.ar_lags.empty() && !stability(base).stable)
      throw DomainError("plant spec: base model is not stable");
    if (surge_delay < 0) throw DomainError("plant spec: negative surge delay");
    if (noise_std < 0.0) throw DomainError("plant spec: negative noise std");
  }
};

inline std::vector<double> gen_demand(const PlantSpec& plant,
                                      const std::vector<double>& prices,
                                      std::uint64_t seed) {
  plant.validate();
  const std::size_t warmup = static_cast<std::size_t>(
      std::max(plant.base.max_lag(), plant.overlay_active() ? plant.surge_delay : 0));
  if (prices.size() <= warmup)
    throw InsufficientDataError("gen_demand: price path shorter than max lag");

  std::vector<double> history = plant.initial_history;
  if (history.empty()) {
    double pbar = 0.0;
    for (double p : prices) pbar += p;
    pbar /= static_cast<double>(prices.size());
    history.assign(warmup, plant.base.ar_lags.empty()
                               ? plant.base.intercept
                               : dc_fixed_point(plant.base, pbar));
  }
  if (history.size() < warmup)
    throw InsufficientDataError("gen_demand: initial history shorter than max lag");

  Rng rng(seed);
  std::vector<double> q = history;
  q.reserve(prices.size());
  for (std::size_t t = history.size(); t < prices.size(); ++t) {
    double v = predict_one_step(plant.base, q, prices, t);
    if (plant.overlay_active()) {
      const double p_anchor = prices[t - static_cast<std::size_t>(plant.surge_delay)];
      if (p_anchor > plant.surge_threshold)
        v += plant.surge_log_gain * std::log(p_anchor);
    }
    if (plant.noise_std > 0.0) v += rng.gaussian(0.0, plant.noise_std);
    q.push_back(v);
  }
  return q;
}

// Wraps generated vectors into the canonical series (midnight start).
inline AlignedSeries make_series(const std::vector<double>& prices,
                                 const std::vector<double>& loads,
                                 int interval_mins = 15,
                                 Minutes start = 0) {
  if (prices.size() != loads.size())
    throw DomainError("make_series: price/load length mismatch");
  AlignedSeries s;
  s.start = start;
  s.interval_mins = interval_mins;
  s.prices = prices;
  s.loads = loads;
  s.mask.assign(prices.size(), true);
  return s;
}

}  // namespace drx
