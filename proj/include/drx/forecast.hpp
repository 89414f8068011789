#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "drx/rng.hpp"
#include "drx/stats.hpp"
#include "drx/sysid.hpp"

namespace drx {

struct ForecastResult {
  std::size_t horizon = 0;
  std::vector<double> forecasts;       // Q-hat per step, 1..horizon
  std::vector<double> innovation_std;  // forecast-error std per step
  std::vector<double> realized;        // empty unless supplied
  std::vector<double> residuals;       // realized - forecast
  bool instability_warning = false;
};

namespace detail {

inline void require_history(const ArxModel& m, std::size_t q_len, std::size_t p_len,
                            std::size_t t) {
  if (t < static_cast<std::size_t>(m.max_lag()))
    throw InsufficientDataError("prediction index precedes the model's max lag");
  if (t > q_len)
    throw InsufficientDataError("load history shorter than prediction index");
  for (int lag : m.x_lags)
    if (t - static_cast<std::size_t>(lag) >= p_len)
      throw InsufficientDataError("price history does not cover lag " +
                                  std::to_string(lag));
}

}  // namespace detail

// Deterministic one-step prediction: the ARX linear combination with the
// innovation set to zero. q covers indices < t, prices cover the lags.
inline double predict_one_step(const ArxModel& m, const std::vector<double>& q,
                               const std::vector<double>& prices, std::size_t t) {
  m.validate();
  detail::require_history(m, q.size(), prices.size(), t);
  double out = m.intercept;
  for (std::size_t i = 0; i < m.ar_lags.size(); ++i)
    out += m.ar_coeffs[i] * q[t - static_cast<std::size_t>(m.ar_lags[i])];
  for (std::size_t j = 0; j < m.x_lags.size(); ++j)
    out += m.x_coeffs[j] *
           m.apply_transform(prices[t - static_cast<std::size_t>(m.x_lags[j])]);
  return out;
}

// Psi weights of the AR polynomial's inverse: the moving-average expansion
// that scales how innovations accumulate across forecast steps.
inline std::vector<double> psi_weights(const ArxModel& m, std::size_t count) {
  std::vector<double> psi(count, 0.0);
  if (count == 0) return psi;
  psi[0] = 1.0;
  for (std::size_t j = 1; j < count; ++j)
    for (std::size_t i = 0; i < m.ar_lags.size(); ++i) {
      const std::size_t lag = static_cast<std::size_t>(m.ar_lags[i]);
      if (lag <= j) psi[j] += m.ar_coeffs[i] * psi[j - lag];
    }
  return psi;
}

// k-step-ahead forecast: iterated one-step predictions feeding forecasts
// back into the AR terms. Future exogenous prices must be supplied —
// prices must cover indices up to history.size() + k - 1 as needed by the
// model's x lags. An unstable model still forecasts, but the result
// carries a warning flag.
inline ForecastResult forecast_k(const ArxModel& m, const std::vector<double>& history,
                                 const std::vector<double>& prices, std::size_t k) {
  if (k == 0) throw DomainError("forecast_k: horizon must be >= 1");
  m.validate();
  const std::size_t t0 = history.size();
  detail::require_history(m, t0, prices.size(), t0);

  ForecastResult r;
  r.horizon = k;
  r.forecasts.reserve(k);
  std::vector<double> q = history;
  for (std::size_t step = 0; step < k; ++step) {
    const double qhat = predict_one_step(m, q, prices, t0 + step);
    r.forecasts.push_back(qhat);
    q.push_back(qhat);
  }

  const auto psi = psi_weights(m, k);
  double cum = 0.0;
  r.innovation_std.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    cum += psi[step] * psi[step];
    r.innovation_std.push_back(m.noise_std * std::sqrt(cum));
  }
  if (!m.ar_lags.empty())
    r.instability_warning = !stability(m).stable;
  return r;
}

// Stochastic simulation of the difference equation: the first
// history.size() samples are copied verbatim, the rest driven by i.i.d.
// zero-mean Gaussian innovations of the given std. Deterministic per seed.
inline std::vector<double> simulate(const ArxModel& m,
                                    const std::vector<double>& initial_history,
                                    const std::vector<double>& prices,
                                    double noise_std, std::uint64_t seed,
                                    std::size_t n) {
  m.validate();
  if (noise_std < 0.0) throw DomainError("simulate: negative noise std");
  const std::size_t h = initial_history.size();
  if (h < static_cast<std::size_t>(m.max_lag()))
    throw InsufficientDataError("simulate: initial history shorter than max lag");
  if (n < h) throw DomainError("simulate: n shorter than initial history");
  if (prices.size() < n)
    throw InsufficientDataError("simulate: price path shorter than n");

  Rng rng(seed);
  std::vector<double> q = initial_history;
  q.reserve(n);
  for (std::size_t t = h; t < n; ++t) {
    double v = predict_one_step(m, q, prices, t);
    if (noise_std > 0.0) v += rng.gaussian(0.0, noise_std);
    q.push_back(v);
  }
  return q;
}

// Fixed point of the deterministic recursion under a constant price: the
// model's DC gain applied to (intercept, transformed price).
inline double dc_fixed_point(const ArxModel& m, double price) {
  double ar_sum = 0.0;
  for (double a : m.ar_coeffs) ar_sum += a;
  if (std::fabs(1.0 - ar_sum) < 1e-12)
    throw DomainError("dc_fixed_point: unit AR gain, no fixed point");
  double x_sum = 0.0;
  for (double b : m.x_coeffs) x_sum += b;
  return (m.intercept + x_sum * m.apply_transform(price)) / (1.0 - ar_sum);
}

struct ResidualDiagnostics {
  MomentStats moments;                                // of the residuals
  double forecast_realized_corr = 0.0;                // r(Q-hat, Q)
  std::vector<std::pair<double, double>> prob_plot;   // residual normality data
};

// Fig-9-style diagnostics: residual moments, forecast/realized Pearson
// correlation, and normal-probability-plot pairs for the residuals.
inline ResidualDiagnostics residual_diagnostics(const ForecastResult& r) {
  if (r.realized.size() != r.forecasts.size() || r.realized.empty())
    throw DegenerateInputError("residual_diagnostics: realized values absent");
  std::vector<double> resid(r.realized.size());
  for (std::size_t i = 0; i < resid.size(); ++i)
    resid[i] = r.realized[i] - r.forecasts[i];

  ResidualDiagnostics d;
  d.moments = moments(resid);  // throws DegenerateInputError on all-zero residuals

  std::vector<std::size_t> all(r.realized.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  d.forecast_realized_corr = lagged_correlation(all, r.forecasts, r.realized, 0);
  d.prob_plot = normal_probability_plot(resid);
  return d;
}

}  // namespace drx
