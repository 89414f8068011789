#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "drx/rng.hpp"
#include "drx/welfare.hpp"
#include "oracles.hpp"

using namespace drx;

namespace {

LinearCurve demand_100() { return {100.0, -1.0, {}}; }   // Q = 100 - P
LinearCurve supply_unit() { return {0.0, 1.0, {}}; }     // Q = P

MarketScenario scenario(LinearCurve d, std::vector<LinearCurve> s,
                        std::optional<double> p0 = {}) {
  MarketScenario sc;
  sc.demand = d;
  sc.supplies = std::move(s);
  sc.fixed_price = p0;
  return sc;
}

}  // namespace

TEST_CASE("symmetric equilibrium") {
  const Point eq = equilibrium(demand_100(), supply_unit());
  REQUIRE(eq.price == 50.0);
  REQUIRE(eq.quantity == 50.0);
}

TEST_CASE("asymmetric equilibrium solves the hand-derived intersection") {
  // 100 - 2P = 3P  =>  P* = 20, Q* = 60
  const Point eq = equilibrium({100.0, -2.0, {}}, {0.0, 3.0, {}});
  REQUIRE_THAT(eq.price, Catch::Matchers::WithinAbs(20.0, 1e-12));
  REQUIRE_THAT(eq.quantity, Catch::Matchers::WithinAbs(60.0, 1e-12));
}

TEST_CASE("invalid slopes and non-intersecting curves are errors") {
  REQUIRE_THROWS_AS(equilibrium({100.0, 1.0, {}}, {0.0, 1.0, {}}), DomainError);
  REQUIRE_THROWS_AS(equilibrium({100.0, -1.0, {}}, {0.0, -1.0, {}}), DomainError);
  // Intersection at negative quantity.
  REQUIRE_THROWS_AS(equilibrium({-10.0, -1.0, {}}, {0.0, 1.0, {}}),
                    NoEquilibriumError);
}

TEST_CASE("fixed tariff at the clearing price causes no loss") {
  const DwlResult r = dwl_fixed_price(demand_100(), supply_unit(), 50.0);
  REQUIRE(r.deadweight_loss == 0.0);
  REQUIRE(r.realized.quantity == r.equilibrium.quantity);
}

TEST_CASE("the hand-derived fixed-tariff triangle") {
  const DwlResult r = dwl_fixed_price(demand_100(), supply_unit(), 40.0);
  REQUIRE(r.realized.quantity == 60.0);
  REQUIRE(r.vertex_b.price == 60.0);  // supply price at the realized quantity
  REQUIRE_THAT(r.deadweight_loss, Catch::Matchers::WithinAbs(100.0, 1e-12));
  REQUIRE_THAT(r.deadweight_loss,
               Catch::Matchers::WithinAbs(
                   oracle::shoelace(60, 40, 60, 60, 50, 50), 1e-12));
}

TEST_CASE("symmetric tariffs around the clearing price lose equally") {
  for (double delta : {1.0, 5.0, 12.0}) {
    const double lo = dwl_fixed_price(demand_100(), supply_unit(), 50.0 - delta)
                          .deadweight_loss;
    const double hi = dwl_fixed_price(demand_100(), supply_unit(), 50.0 + delta)
                          .deadweight_loss;
    REQUIRE_THAT(lo, Catch::Matchers::WithinAbs(hi, 1e-12));
  }
}

TEST_CASE("loss is continuous in the tariff and minimized at the clearing price") {
  double prev = dwl_fixed_price(demand_100(), supply_unit(), 20.0).deadweight_loss;
  for (double p0 = 21.0; p0 <= 50.0; p0 += 1.0) {
    const double cur = dwl_fixed_price(demand_100(), supply_unit(), p0).deadweight_loss;
    REQUIRE(cur < prev);
    REQUIRE(cur >= 0.0);
    prev = cur;
  }
  REQUIRE(prev == 0.0);
}

TEST_CASE("tariff that extinguishes demand is degenerate") {
  REQUIRE_THROWS_AS(dwl_fixed_price(demand_100(), supply_unit(), 100.0), DomainError);
}

TEST_CASE("VER drop-off inertia triangle") {
  // supply shifts from Q = P to Q = P - 20; inherited demand stays at 50.
  const DwlResult r =
      dwl_inertia(demand_100(), supply_unit(), {-20.0, 1.0, {}}, VerShift::drop);
  REQUIRE(r.vertex_a.quantity == 50.0);
  REQUIRE(r.vertex_a.price == 50.0);
  REQUIRE(r.vertex_b.price == 70.0);
  REQUIRE_THAT(r.vertex_c.quantity, Catch::Matchers::WithinAbs(40.0, 1e-12));
  REQUIRE_THAT(r.vertex_c.price, Catch::Matchers::WithinAbs(60.0, 1e-12));
  REQUIRE_THAT(r.deadweight_loss,
               Catch::Matchers::WithinAbs(oracle::shoelace(50, 50, 50, 70, 40, 60), 1e-12));
  REQUIRE_THAT(r.deadweight_loss, Catch::Matchers::WithinAbs(100.0, 1e-12));
}

TEST_CASE("VER restoration mirrors the drop case") {
  const double drop =
      dwl_inertia(demand_100(), supply_unit(), {-20.0, 1.0, {}}).deadweight_loss;
  const double restore =
      dwl_inertia(demand_100(), supply_unit(), {20.0, 1.0, {}}).deadweight_loss;
  REQUIRE_THAT(drop, Catch::Matchers::WithinAbs(restore, 1e-12));
}

TEST_CASE("no supply shift means no inertia loss") {
  const DwlResult r = dwl_inertia(demand_100(), supply_unit(), supply_unit());
  REQUIRE(r.deadweight_loss == 0.0);
}

TEST_CASE("scarcity is reported distinctly") {
  LinearCurve cramped{-20.0, 1.0, 30.0};  // capacity 30 < inherited 50
  REQUIRE_THROWS_AS(dwl_inertia(demand_100(), supply_unit(), cramped), ScarcityError);
}

TEST_CASE("constant-supply schedules are lossless after the first interval") {
  std::vector<MarketScenario> sched(5, scenario(demand_100(), {supply_unit()}, 50.0));
  for (PricingPolicy policy : {PricingPolicy::fixed, PricingPolicy::rtrp_instant,
                               PricingPolicy::rtrp_inertia}) {
    const DwlSchedule out = dwl_series(sched, policy);
    for (const auto& r : out.intervals) REQUIRE(r.deadweight_loss == 0.0);
    REQUIRE(out.total == 0.0);
  }
}

TEST_CASE("alternating VER schedule: inertia loses, instant pricing does not") {
  std::vector<MarketScenario> sched;
  for (int i = 0; i < 6; ++i)
    sched.push_back(scenario(demand_100(),
                             {i % 2 == 0 ? supply_unit() : LinearCurve{-20.0, 1.0, {}}}));
  const DwlSchedule instant = dwl_series(sched, PricingPolicy::rtrp_instant);
  REQUIRE(instant.total == 0.0);

  const DwlSchedule inertia = dwl_series(sched, PricingPolicy::rtrp_inertia);
  REQUIRE(inertia.total > 0.0);
  // every post-shift interval matches the shoelace oracle on its vertices
  for (std::size_t i = 1; i < inertia.intervals.size(); ++i) {
    const auto& r = inertia.intervals[i];
    const double ref = oracle::shoelace(r.vertex_a.quantity, r.vertex_a.price,
                                        r.vertex_b.quantity, r.vertex_b.price,
                                        r.vertex_c.quantity, r.vertex_c.price);
    REQUIRE_THAT(r.deadweight_loss, Catch::Matchers::WithinRel(ref, 1e-12));
  }
  REQUIRE_THAT(inertia.total_dollars,
               Catch::Matchers::WithinRel(inertia.total * 0.25, 1e-12));
}

TEST_CASE("single-interval schedule equals the per-interval op") {
  const auto sched = std::vector<MarketScenario>{
      scenario(demand_100(), {supply_unit(), {-20.0, 1.0, {}}})};
  const DwlSchedule out = dwl_series(sched, PricingPolicy::rtrp_inertia);
  const DwlResult direct = dwl_inertia(demand_100(), supply_unit(), {-20.0, 1.0, {}});
  REQUIRE(out.intervals.size() == 1);
  REQUIRE(out.intervals[0].deadweight_loss == direct.deadweight_loss);
  REQUIRE(out.total == direct.deadweight_loss);
}

TEST_CASE("fixed policy requires a tariff in every scenario") {
  const auto sched = std::vector<MarketScenario>{scenario(demand_100(), {supply_unit()})};
  REQUIRE_THROWS_AS(dwl_series(sched, PricingPolicy::fixed), ConfigError);
}

TEST_CASE("axis scaling scales the loss by the area factor") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double di = rng.uniform() * 200 + 50;
    const double ds = -(rng.uniform() * 3 + 0.2);
    const double si = -rng.uniform() * 20;
    const double ss = rng.uniform() * 3 + 0.2;
    const LinearCurve d{di, ds, {}}, s{si, ss, {}};
    double p0;
    try {
      p0 = equilibrium(d, s).price * 0.8;
      if (d.quantity_at(p0) <= 0) continue;
    } catch (const Error&) {
      continue;
    }
    const double base = dwl_fixed_price(d, s, p0).deadweight_loss;

    const double a = 2.5, b = 4.0;  // Q -> aQ, P -> bP
    const LinearCurve d2{a * di, a * ds / b, {}}, s2{a * si, a * ss / b, {}};
    const double scaled = dwl_fixed_price(d2, s2, b * p0).deadweight_loss;
    REQUIRE_THAT(scaled, Catch::Matchers::WithinRel(a * b * base, 1e-9));
  }
}

TEST_CASE("instant pricing never loses on random valid schedules") {
  Rng rng(17);
  std::vector<MarketScenario> sched;
  for (int i = 0; i < 30; ++i) {
    const double shift = rng.gaussian(0, 15);
    sched.push_back(scenario(demand_100(), {{shift, 1.0, {}}}));
  }
  const DwlSchedule out = dwl_series(sched, PricingPolicy::rtrp_instant);
  REQUIRE(out.total == 0.0);
}
