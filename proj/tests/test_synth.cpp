#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "drx/stats.hpp"
#include "drx/synth.hpp"
#include "plants.hpp"

using namespace drx;

TEST_CASE("spikeless base process is near-normal") {
  PriceProcessSpec spec;
  spec.mean = 60.0;
  spec.phi = 0.6;
  spec.innov_std = 8.0;
  spec.min_price = -1e300;  // leave the base untouched
  const auto prices = gen_prices(spec, 100000, 5);
  const MomentStats m = moments(prices);
  REQUIRE_THAT(m.kurtosis, Catch::Matchers::WithinAbs(3.0, 0.2));
  REQUIRE_THAT(m.skewness, Catch::Matchers::WithinAbs(0.0, 0.05));
  REQUIRE_THAT(m.mean, Catch::Matchers::WithinAbs(60.0, 0.5));
}

TEST_CASE("spiky calibration reaches the heavy-tail regime") {
  const auto prices = gen_prices(plants::spiky_prices(), 100000, 9);
  const MomentStats m = moments(prices);
  REQUIRE(m.kurtosis > 50.0);
  REQUIRE(m.skewness > 5.0);
  for (double p : prices) REQUIRE(p >= 1.0);
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = gen_prices(plants::spiky_prices(), 5000, 123);
  const auto b = gen_prices(plants::spiky_prices(), 5000, 123);
  REQUIRE(a == b);
  const auto c = gen_prices(plants::spiky_prices(), 5000, 124);
  REQUIRE(a != c);
}

TEST_CASE("time-of-day weighting concentrates spikes in the afternoon") {
  PriceProcessSpec spec = plants::spiky_prices();
  spec.spike_rate_per_day = 4.0;
  const auto prices = gen_prices(spec, 96 * 2000, 3);
  std::size_t afternoon = 0, night = 0;
  for (std::size_t t = 0; t < prices.size(); ++t) {
    if (prices[t] < 160.0) continue;
    const int hour = static_cast<int>(t % 96) / 4;
    if (hour >= 12 && hour < 18) ++afternoon;
    if (hour < 6) ++night;
  }
  REQUIRE(afternoon > 4 * night);
}

TEST_CASE("invalid price specs are rejected") {
  PriceProcessSpec spec;
  spec.phi = 1.0;
  REQUIRE_THROWS_AS(gen_prices(spec, 10, 1), DomainError);
  spec = {};
  spec.tod_weights = {1.0, 2.0};
  REQUIRE_THROWS_AS(gen_prices(spec, 10, 1), DomainError);
  spec = {};
  spec.spike_duration_min = 3;
  spec.spike_duration_max = 2;
  REQUIRE_THROWS_AS(gen_prices(spec, 10, 1), DomainError);
  REQUIRE_THROWS_AS(gen_prices({}, 0, 1), DomainError);
}

TEST_CASE("noiseless plant satisfies the difference equation exactly") {
  PlantSpec plant;
  plant.base = plants::reference_moderate_model();
  plant.base.noise_std = 0.0;
  plant.noise_std = 0.0;
  const auto prices = gen_prices(plants::white_prices(), 2000, 21);
  const auto q = gen_demand(plant, prices, 22);
  for (std::size_t t = 5; t < q.size(); ++t) {
    const double rhs = 0.81268 * q[t - 1] + 0.046086 * q[t - 3] +
                       0.036614 * q[t - 5] - 0.8555 * prices[t - 1] +
                       0.5273 * prices[t - 2] + plant.base.intercept;
    REQUIRE_THAT(q[t], Catch::Matchers::WithinAbs(rhs, 1e-9));
  }
}

TEST_CASE("disabled overlay reproduces forecast-simulate exactly") {
  PlantSpec plant;
  plant.base = plants::reference_moderate_model();
  plant.base.noise_std = 0.0;
  plant.noise_std = 301.0;
  plant.initial_history.assign(5, 2000.0);
  const auto prices = gen_prices(plants::white_prices(), 3000, 31);
  const auto via_plant = gen_demand(plant, prices, 77);
  const auto via_simulate =
      simulate(plant.base, plant.initial_history, prices, 301.0, 77, 3000);
  REQUIRE(via_plant == via_simulate);
}

TEST_CASE("a single spike produces the delayed dip-and-recovery shape") {
  PlantSpec plant = plants::delayed_response_plant();
  const std::size_t t0 = 40, n = 80;
  std::vector<double> mean_q(n, 0.0);
  const int runs = 1000;
  for (int run = 0; run < runs; ++run) {
    std::vector<double> prices(n, 60.0);
    prices[t0] = 500.0;  // one injected spike
    const auto q = gen_demand(plant, prices, static_cast<std::uint64_t>(run));
    for (std::size_t t = 0; t < n; ++t) mean_q[t] += q[t] / runs;
  }
  // Locate the dip: must fall in t0+4..t0+6 and be deep.
  std::size_t argmin = 0;
  double minval = 1e18;
  for (std::size_t t = t0; t < t0 + 12; ++t)
    if (mean_q[t] < minval) {
      minval = mean_q[t];
      argmin = t;
    }
  REQUIRE(argmin >= t0 + 4);
  REQUIRE(argmin <= t0 + 6);
  const double pre = mean_q[t0 - 1];
  REQUIRE(pre - minval > 800.0);          // deep drop
  REQUIRE(mean_q[t0 + 40] > pre - 150.0); // mostly recovered
}

TEST_CASE("zero-gain overlay leaves no dip beyond noise") {
  PlantSpec plant = plants::delayed_response_plant();
  plant.surge_log_gain = 0.0;
  const auto prices = gen_prices(plants::spiky_prices(), 40000, 3);
  const auto q = gen_demand(plant, prices, 4);
  const auto s = make_series(prices, q);
  // Without the overlay the post-surge change is sampling noise, an order
  // of magnitude below the planted dip of the active plant.
  for (std::size_t k = 1; k <= 8; ++k) {
    const double change = avg_change_after_surge(s, 144.4187, 1e18, k);
    REQUIRE(std::fabs(change) < 300.0);
  }
  const auto q_active =
      gen_demand(plants::delayed_response_plant(), prices, 4);
  const auto s_active = make_series(prices, q_active);
  REQUIRE(avg_change_after_surge(s_active, 144.4187, 1e18, 4) < -800.0);
}

TEST_CASE("two-step estimation round-trips the plant coefficients") {
  const ArxModel truth = plants::reference_moderate_model();
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = plants::simulate_plant(truth, plants::white_prices(), 20000, seed);
    TwoStepSpec spec;
    spec.ar_lags = truth.ar_lags;
    spec.x_lags = truth.x_lags;
    if (plants::recovers_within(two_step_arx(s, spec), truth, 60.0, 3.0)) ++hits;
  }
  REQUIRE(hits >= 9);
}

TEST_CASE("plant validation rejects unstable bases") {
  PlantSpec plant;
  plant.base.ar_lags = {1};
  plant.base.ar_coeffs = {1.2};
  const std::vector<double> prices(100, 50.0);
  REQUIRE_THROWS_AS(gen_demand(plant, prices, 1), DomainError);
}
