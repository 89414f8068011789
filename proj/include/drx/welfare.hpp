#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "drx/error.hpp"

namespace drx {

// Linear quantity-as-function-of-price curve: Q(P) = intercept + slope * P.
// Demand slopes are strictly negative, supply slopes strictly positive;
// a vertical (perfectly inelastic) demand is its own scenario variant, not
// a curve with infinite slope.
struct LinearCurve {
  double intercept = 0.0;  // MW at zero price
  double slope = 0.0;      // MW per $/MWh
  std::optional<double> capacity;  // max deliverable quantity, if any

  double quantity_at(double price) const { return intercept + slope * price; }
  double price_at(double quantity) const {
    if (slope == 0.0) throw DomainError("price_at: vertical/horizontal curve");
    return (quantity - intercept) / slope;
  }
};

struct Point {
  double quantity = 0.0;  // MW
  double price = 0.0;     // $/MWh
};

// Exact triangle area from vertices in the (Q, P) plane.
inline double shoelace_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * std::fabs(a.quantity * (b.price - c.price) +
                         b.quantity * (c.price - a.price) +
                         c.quantity * (a.price - b.price));
}

inline Point equilibrium(const LinearCurve& demand, const LinearCurve& supply) {
  if (!(demand.slope < 0.0)) throw DomainError("equilibrium: demand slope must be negative");
  if (!(supply.slope > 0.0)) throw DomainError("equilibrium: supply slope must be positive");
  const double denom = supply.slope - demand.slope;
  if (denom == 0.0) throw NoEquilibriumError("parallel curves");
  const double p = (demand.intercept - supply.intercept) / denom;
  const double q = supply.quantity_at(p);
  if (!(p > 0.0) || !(q > 0.0))
    throw NoEquilibriumError("curves intersect at nonpositive price or quantity");
  return {q, p};
}

// Welfare triangle between realized and efficient market points. The
// vertex labels follow the paper's figures: A and B bracket the price gap
// at the realized quantity, C is the efficient clearing point.
struct DwlResult {
  Point equilibrium;      // efficient clearing point
  Point realized;         // where the market actually lands
  double deadweight_loss = 0.0;  // $/h per interval (price x quantity area)
  Point vertex_a, vertex_b, vertex_c;
};

// Fixed retail tariff P0: consumers demand Q0 = demand(P0) while the
// efficient point is the curve intersection. DWL is the triangle between
// the demand and supply curves over the quantity gap — exact for linear
// curves.
inline DwlResult dwl_fixed_price(const LinearCurve& demand, const LinearCurve& supply,
                                 double p0) {
  DwlResult r;
  r.equilibrium = equilibrium(demand, supply);
  const double q0 = demand.quantity_at(p0);
  if (!(q0 > 0.0))
    throw DomainError("dwl_fixed_price: tariff extinguishes demand");
  r.realized = {q0, p0};
  r.vertex_a = {q0, p0};                        // on the demand curve
  r.vertex_b = {q0, supply.price_at(q0)};       // on the supply curve
  r.vertex_c = r.equilibrium;
  r.deadweight_loss = shoelace_area(r.vertex_a, r.vertex_b, r.vertex_c);
  return r;
}

enum class VerShift { drop, restore };

// Demand-inertia geometry after a VER supply shift: the pre-shift
// equilibrium A fixes a vertical demand line; the market realizes B on the
// new supply curve at the inherited quantity while the efficient point is
// C on the nominal demand curve.
inline DwlResult dwl_inertia(const LinearCurve& nominal_demand,
                             const LinearCurve& supply_before,
                             const LinearCurve& supply_after,
                             VerShift /*mode*/ = VerShift::drop) {
  DwlResult r;
  const Point a = equilibrium(nominal_demand, supply_before);
  if (supply_after.capacity && a.quantity > *supply_after.capacity)
    throw ScarcityError("post-shift supply cannot serve inherited demand of " +
                        std::to_string(a.quantity) + " MW");
  const Point b{a.quantity, supply_after.price_at(a.quantity)};
  const Point c = equilibrium(nominal_demand, supply_after);
  r.vertex_a = a;
  r.vertex_b = b;
  r.vertex_c = c;
  r.equilibrium = c;
  r.realized = b;
  r.deadweight_loss = shoelace_area(a, b, c);
  return r;
}

// One market interval: nominal demand, one or two supply curves (a pair
// means an intra-interval VER shift), and an optional fixed tariff.
struct MarketScenario {
  LinearCurve demand;
  std::vector<LinearCurve> supplies;  // 1 = static, 2 = before/after shift
  std::optional<double> fixed_price;
  std::string event;  // free-form label ("drop", "restore", ...)

  const LinearCurve& supply_initial() const {
    if (supplies.empty()) throw ConfigError("scenario without supply curve");
    return supplies.front();
  }
  const LinearCurve& supply_final() const {
    if (supplies.empty()) throw ConfigError("scenario without supply curve");
    return supplies.back();
  }
};

enum class PricingPolicy { fixed, rtrp_instant, rtrp_inertia };

struct DwlSchedule {
  std::vector<DwlResult> intervals;
  double total = 0.0;          // sum of per-interval triangle areas
  double total_dollars = 0.0;  // total x interval length in hours
};

// Runs the per-interval DWL geometry across a scenario schedule.
//  - fixed: every interval pays the scenario's fixed tariff (Fig. 2/7).
//  - rtrp_instant: demand tracks price immediately; DWL is identically 0.
//  - rtrp_inertia: the vertical demand inherited from the previous
//    interval's equilibrium meets the current supply (Fig. 8). A scenario
//    carrying its own before/after supply pair uses that pair directly.
inline DwlSchedule dwl_series(const std::vector<MarketScenario>& schedule,
                              PricingPolicy policy, double interval_hours = 0.25) {
  DwlSchedule out;
  const LinearCurve* prev_supply = nullptr;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const MarketScenario& sc = schedule[i];
    DwlResult r;
    switch (policy) {
      case PricingPolicy::fixed: {
        if (!sc.fixed_price)
          throw ConfigError("fixed policy needs fixed_price in every scenario");
        r = dwl_fixed_price(sc.demand, sc.supply_final(), *sc.fixed_price);
        break;
      }
      case PricingPolicy::rtrp_instant: {
        const Point eq = equilibrium(sc.demand, sc.supply_final());
        r.equilibrium = r.realized = eq;
        r.vertex_a = r.vertex_b = r.vertex_c = eq;
        r.deadweight_loss = 0.0;
        break;
      }
      case PricingPolicy::rtrp_inertia: {
        const LinearCurve* before = nullptr;
        if (sc.supplies.size() >= 2)
          before = &sc.supply_initial();
        else if (prev_supply)
          before = prev_supply;
        if (before == nullptr) {
          // first interval, nothing inherited: market starts at equilibrium
          const Point eq = equilibrium(sc.demand, sc.supply_final());
          r.equilibrium = r.realized = eq;
          r.vertex_a = r.vertex_b = r.vertex_c = eq;
          r.deadweight_loss = 0.0;
        } else {
          r = dwl_inertia(sc.demand, *before, sc.supply_final());
        }
        break;
      }
    }
    out.intervals.push_back(r);
    out.total += r.deadweight_loss;
    prev_supply = &sc.supply_final();
  }
  out.total_dollars = out.total * interval_hours;
  return out;
}

}  // namespace drx
