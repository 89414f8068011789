#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "drx/series.hpp"

namespace drx {

// True where the price exceeds the spike threshold and the sample is valid.
inline std::vector<bool> spike_indicator(const AlignedSeries& s, double threshold) {
  std::vector<bool> out(s.size(), false);
  for (std::size_t i = 0; i < s.size(); ++i)
    out[i] = s.mask[i] && s.prices[i] > threshold;
  return out;
}

// Conditioning set: valid samples inside a clock window whose price falls
// in [price_lo, price_hi].
struct SpikeProbCondition {
  int window_start_tod = 0;
  int window_end_tod = 1440;
  double price_lo = -std::numeric_limits<double>::infinity();
  double price_hi = std::numeric_limits<double>::infinity();
};

// Empirical spike-recurrence profile. For each delay k the probability is
// the exact ratio hits[k]/count[k]; lags with an empty conditioning set
// carry count 0 and NaN probability.
struct SpikeProbProfile {
  SpikeProbCondition condition;
  double threshold = 0.0;
  std::vector<std::size_t> delays;
  std::vector<double> conditional;    // P(spike at t+k | condition at t)
  std::vector<std::size_t> hits;
  std::vector<std::size_t> counts;
  double baseline = 0.0;              // unconditional spike rate in the window
  std::size_t baseline_hits = 0;
  std::size_t baseline_count = 0;
};

inline SpikeProbProfile conditional_spike_prob(const AlignedSeries& s,
                                               const SpikeProbCondition& cond,
                                               const std::vector<std::size_t>& delays,
                                               double threshold) {
  if (cond.window_start_tod >= cond.window_end_tod)
    throw DomainError("conditional_spike_prob: degenerate window");
  const auto spikes = spike_indicator(s, threshold);

  SpikeProbProfile prof;
  prof.condition = cond;
  prof.threshold = threshold;
  prof.delays = delays;
  prof.conditional.assign(delays.size(), std::numeric_limits<double>::quiet_NaN());
  prof.hits.assign(delays.size(), 0);
  prof.counts.assign(delays.size(), 0);

  auto in_window = [&](std::size_t t) {
    const int tod = minute_of_day(s.time_at(t));
    return tod >= cond.window_start_tod && tod < cond.window_end_tod;
  };
  auto conditioned = [&](std::size_t t) {
    return s.mask[t] && in_window(t) && s.prices[t] >= cond.price_lo &&
           s.prices[t] <= cond.price_hi;
  };

  for (std::size_t t = 0; t < s.size(); ++t) {
    if (!s.mask[t] || !in_window(t)) continue;
    ++prof.baseline_count;
    if (spikes[t]) ++prof.baseline_hits;
  }
  prof.baseline = prof.baseline_count
                      ? static_cast<double>(prof.baseline_hits) /
                            static_cast<double>(prof.baseline_count)
                      : std::numeric_limits<double>::quiet_NaN();

  for (std::size_t d = 0; d < delays.size(); ++d) {
    const std::size_t k = delays[d];
    for (std::size_t t = 0; t + k < s.size(); ++t) {
      if (!conditioned(t) || !s.mask[t + k]) continue;
      ++prof.counts[d];
      if (spikes[t + k]) ++prof.hits[d];
    }
    if (prof.counts[d])
      prof.conditional[d] = static_cast<double>(prof.hits[d]) /
                            static_cast<double>(prof.counts[d]);
  }
  return prof;
}

}  // namespace drx
