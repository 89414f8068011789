#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "drx/dist.hpp"
#include "drx/error.hpp"
#include "drx/series.hpp"

namespace drx {

constexpr double kZ975 = 1.959963984540054;  // Phi^-1(0.975)

// Central-moment summary. Estimators are the biased (population) ones:
// mu_k = mean((x - mean)^k), std = sqrt(mu_2), so skewness = mu3/sigma^3
// and kurtosis = mu4/sigma^4 (non-excess; normal reference value 3).
struct MomentStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

namespace detail {

inline std::vector<double> valid_values(const std::vector<double>& x,
                                        const std::vector<bool>& mask) {
  if (mask.empty()) return x;
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (mask[i]) out.push_back(x[i]);
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

inline MomentStats moments(const std::vector<double>& x,
                           const std::vector<bool>& mask = {}) {
  const auto v = detail::valid_values(x, mask);
  if (v.size() < 4)
    throw DegenerateInputError("moments: need at least 4 valid samples");
  MomentStats m;
  m.n = v.size();
  m.mean = detail::mean_of(v);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double xi : v) {
    const double d = xi - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(v.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0)
    throw DegenerateInputError("moments: constant input, higher moments undefined");
  m.std = std::sqrt(m2);
  m.skewness = m3 / (m2 * m.std);
  m.kurtosis = m4 / (m2 * m2);
  return m;
}

// Empirical quantile, linear interpolation between order statistics
// (the "R-7" rule: h = (n-1)q). q=0 is the minimum, q=1 the maximum.
inline double quantile(const std::vector<double>& x, double q,
                       const std::vector<bool>& mask = {}) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0,1]");
  auto v = detail::valid_values(x, mask);
  if (v.empty()) throw DegenerateInputError("quantile: no valid samples");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

struct AcfResult {
  std::vector<double> values;   // index = lag, values[0] == 1
  double confidence_band = 0.0; // +- bound under the white-noise null
};

// Sample autocorrelation. Covariances use the biased 1/N convention over
// pairs whose endpoints are both valid; the variance runs over all valid
// samples, which keeps every value in [-1, 1] on masked input too.
inline AcfResult acf(const std::vector<double>& x, std::size_t max_lag,
                     const std::vector<bool>& mask = {}) {
  const std::vector<bool> m = mask.empty() ? std::vector<bool>(x.size(), true) : mask;
  std::size_t n_valid = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (m[i]) {
      ++n_valid;
      sum += x[i];
    }
  if (n_valid < 2 || max_lag >= n_valid / 2)
    throw DegenerateInputError("acf: need max_lag < valid samples / 2");
  const double mean = sum / static_cast<double>(n_valid);
  double c0 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (m[i]) c0 += (x[i] - mean) * (x[i] - mean);
  c0 /= static_cast<double>(n_valid);
  if (c0 <= 0.0) throw DegenerateInputError("acf: constant series");

  AcfResult r;
  r.values.resize(max_lag + 1);
  r.values[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < x.size(); ++i)
      if (m[i] && m[i + k]) ck += (x[i] - mean) * (x[i + k] - mean);
    r.values[k] = ck / static_cast<double>(n_valid) / c0;
  }
  r.confidence_band = kZ975 / std::sqrt(static_cast<double>(n_valid));
  return r;
}

// Partial autocorrelation by the Durbin-Levinson recursion on the sample
// ACF. values[0] = 1 by convention; values[k] = phi_kk.
inline AcfResult pacf(const std::vector<double>& x, std::size_t max_lag,
                      const std::vector<bool>& mask = {}) {
  const AcfResult ac = acf(x, max_lag, mask);
  const auto& r = ac.values;
  AcfResult out;
  out.confidence_band = ac.confidence_band;
  out.values.assign(max_lag + 1, 0.0);
  out.values[0] = 1.0;
  if (max_lag == 0) return out;

  std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
  double v = 1.0;  // prediction error variance (in units of c0)
  phi[1] = r[1];
  out.values[1] = r[1];
  v *= 1.0 - r[1] * r[1];
  for (std::size_t k = 2; k <= max_lag; ++k) {
    if (v < 1e-14)
      throw ConditioningError("pacf: Toeplitz system numerically singular at lag " +
                              std::to_string(k));
    prev = phi;
    double num = r[k];
    for (std::size_t j = 1; j < k; ++j) num -= prev[j] * r[k - j];
    const double phikk = num / v;
    phi[k] = phikk;
    for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - phikk * prev[k - j];
    v *= 1.0 - phikk * phikk;
    out.values[k] = phikk;
  }
  return out;
}

// (theoretical standard-normal quantile, empirical quantile) pairs using
// Hazen plotting positions (i - 0.5)/n. Data for a probability plot; the
// caller draws the picture.
inline std::vector<std::pair<double, double>> normal_probability_plot(
    const std::vector<double>& x, const std::vector<bool>& mask = {}) {
  auto v = detail::valid_values(x, mask);
  if (v.size() < 2)
    throw DegenerateInputError("normal_probability_plot: need >= 2 valid samples");
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> pts;
  pts.reserve(v.size());
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    pts.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / n), v[i]);
  return pts;
}

// Five-number summary per time-of-day bucket, 1.5*IQR outlier rule.
struct BoxStats {
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double lo_whisker = 0.0;
  double hi_whisker = 0.0;
  std::vector<double> outliers;
  bool empty = true;
};

// Buckets a series field by time of day: 24 hourly buckets by default, or
// one bucket per sampling interval (e.g. 96 at 15 minutes) when
// per_interval is set.
inline std::vector<BoxStats> hourly_summary(const AlignedSeries& s, Field f,
                                            bool per_interval = false) {
  if (s.size() * static_cast<std::size_t>(s.interval_mins) < 1440)
    throw DegenerateInputError("hourly_summary: series must span at least one day");
  const std::size_t buckets =
      per_interval ? static_cast<std::size_t>(1440 / s.interval_mins) : 24;
  const int bucket_mins = static_cast<int>(1440 / buckets);
  std::vector<std::vector<double>> by_bucket(buckets);
  const auto& vals = field_of(s, f);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.mask[i])
      by_bucket[minute_of_day(s.time_at(i)) / bucket_mins].push_back(vals[i]);

  std::vector<BoxStats> out(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    auto& v = by_bucket[b];
    auto& box = out[b];
    box.count = v.size();
    if (v.empty()) continue;
    box.empty = false;
    std::sort(v.begin(), v.end());
    box.median = quantile(v, 0.5);
    box.q1 = quantile(v, 0.25);
    box.q3 = quantile(v, 0.75);
    const double iqr = box.q3 - box.q1;
    const double lo_fence = box.q1 - 1.5 * iqr;
    const double hi_fence = box.q3 + 1.5 * iqr;
    box.lo_whisker = box.hi_whisker = box.median;
    bool first = true;
    for (double xv : v) {
      if (xv < lo_fence || xv > hi_fence) {
        box.outliers.push_back(xv);
      } else if (first) {
        box.lo_whisker = box.hi_whisker = xv;
        first = false;
      } else {
        box.hi_whisker = xv;
      }
    }
    if (first) {  // everything was an outlier; degenerate but representable
      box.lo_whisker = box.q1;
      box.hi_whisker = box.q3;
    }
  }
  return out;
}

struct AnovaTable {
  double ss_groups = 0.0, ss_error = 0.0, ss_total = 0.0;
  std::size_t df_groups = 0, df_error = 0, df_total = 0;
  double ms_groups = 0.0, ms_error = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;
};

// Classic one-way ANOVA. A zero error mean square with nonzero group
// spread reports F as overflow-to-max with p = 0.
inline AnovaTable anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DegenerateInputError("anova: need >= 2 groups");
  std::size_t n_total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw DegenerateInputError("anova: empty group");
    n_total += g.size();
    for (double x : g) grand_sum += x;
  }
  if (n_total < groups.size() + 1)
    throw DegenerateInputError("anova: error degrees of freedom < 1");
  const double grand_mean = grand_sum / static_cast<double>(n_total);

  AnovaTable t;
  for (const auto& g : groups) {
    const double gm = detail::mean_of(g);
    t.ss_groups += static_cast<double>(g.size()) * (gm - grand_mean) * (gm - grand_mean);
    for (double x : g) t.ss_error += (x - gm) * (x - gm);
  }
  t.ss_total = t.ss_groups + t.ss_error;
  t.df_groups = groups.size() - 1;
  t.df_error = n_total - groups.size();
  t.df_total = n_total - 1;
  t.ms_groups = t.ss_groups / static_cast<double>(t.df_groups);
  t.ms_error = t.ss_error / static_cast<double>(t.df_error);
  if (t.ms_error <= 0.0) {
    if (t.ms_groups <= 0.0)
      throw DegenerateInputError("anova: all groups constant and equal");
    t.f_stat = std::numeric_limits<double>::max();
    t.p_value = 0.0;
    return t;
  }
  t.f_stat = t.ms_groups / t.ms_error;
  t.p_value = f_tail_p(t.f_stat, static_cast<double>(t.df_groups),
                       static_cast<double>(t.df_error));
  return t;
}

// Pearson correlation between x(t) and y(t+k) over the trigger times t.
inline double lagged_correlation(const std::vector<std::size_t>& events,
                                 const std::vector<double>& x,
                                 const std::vector<double>& y, std::size_t k) {
  std::vector<double> xs, ys;
  for (std::size_t t : events) {
    if (t >= x.size() || t + k >= y.size()) continue;
    xs.push_back(x[t]);
    ys.push_back(y[t + k]);
  }
  if (xs.size() < 3)
    throw InsufficientDataError("lagged_correlation: fewer than 3 usable pairs");
  const double mx = detail::mean_of(xs), my = detail::mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw DegenerateInputError("lagged_correlation: constant inputs");
  return sxy / std::sqrt(sxx * syy);
}

// Mean load change k steps after prices inside [p_min, p_max]:
//   mean over {t : p_min <= P(t) <= p_max} of Q(t+k) - Q(t).
inline double avg_change_after_surge(const AlignedSeries& s, double p_min,
                                     double p_max, std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t + k < s.size(); ++t) {
    if (!s.mask[t] || !s.mask[t + k]) continue;
    if (s.prices[t] < p_min || s.prices[t] > p_max) continue;
    sum += s.loads[t + k] - s.loads[t];
    ++n;
  }
  if (n == 0)
    throw InsufficientDataError("avg_change_after_surge: empty conditioning set");
  return sum / static_cast<double>(n);
}

}  // namespace drx
