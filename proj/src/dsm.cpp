#include "mlnv/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlnv/errors.hpp"

namespace mlnv {
namespace {

constexpr double kFractileGuard = 1e-9;

void check_quantities(const Instance& inst, std::span<const double> q) {
  if (q.size() != inst.size()) {
    throw ArgumentError("expected " + std::to_string(inst.size()) + " order quantities, got " +
                        std::to_string(q.size()));
  }
  for (double x : q) {
    if (!std::isfinite(x) || x < 0.0) throw ArgumentError("order quantities must be finite and >= 0");
  }
}

// Expected profit components of retailer i at order level q, excluding K_0.
ProfitBreakdown retailer_terms(const Instance& inst, std::size_t i, double q) {
  const auto& r = inst.retailers[i];
  const auto& e = inst.econ;
  const auto pe = partial_expectations(r.demand, q);
  ProfitBreakdown out;
  out.revenue = e.s * r.demand.mu();
  out.shortage = e.b * pe.underage;
  out.salvage = e.v * pe.overage;
  out.procurement = e.c * q;
  out.transport = direct_transport_cost(inst.transport, q, direct_distance(inst, i));
  out.fixed = r.fixed_cost;
  return out;
}

double marginal_direct_cost(const Instance& inst, std::size_t i) {
  const auto& t = inst.transport;
  switch (t.mode) {
    case TransportMode::Quantity:
      return t.direct_rate;
    case TransportMode::Distance:
      return 0.0;
    case TransportMode::QuantityDistance:
      return t.direct_rate * direct_distance(inst, i);
  }
  return 0.0;
}

}  // namespace

ProfitBreakdown& ProfitBreakdown::operator+=(const ProfitBreakdown& o) {
  revenue += o.revenue;
  shortage += o.shortage;
  salvage += o.salvage;
  procurement += o.procurement;
  transport += o.transport;
  fixed += o.fixed;
  return *this;
}

double clamp_fractile(double beta) { return std::clamp(beta, kFractileGuard, 1.0 - kFractileGuard); }

double critical_fractile(const EconomicParams& econ, double marginal_transport) {
  return (econ.b - econ.c - marginal_transport) / (econ.b - econ.v);
}

OrderLevel newsvendor_order(const NormalDist& demand, double beta, double floor) {
  const double fractile_level = demand.quantile(clamp_fractile(beta));
  if (floor >= fractile_level) return {floor, true};
  return {fractile_level, false};
}

double PartyPayoffs::total() const {
  double sum = supplier;
  for (double r : retailers) sum += r;
  return sum;
}

double direct_distance(const Instance& inst, std::size_t retailer_index) {
  return distance(inst.supplier_location, inst.retailers[retailer_index].location, 0.0);
}

double direct_transport_cost(const TransportParams& t, double quantity, double dist) {
  switch (t.mode) {
    case TransportMode::Quantity:
      return t.direct_fixed + t.direct_rate * quantity;
    case TransportMode::Distance:
      return t.direct_fixed + t.direct_rate * dist;
    case TransportMode::QuantityDistance:
      return t.direct_fixed + t.direct_rate * quantity * dist;
  }
  return 0.0;
}

DsmSolution solve_dsm(const Instance& inst) {
  inst.validate();
  const std::size_t n = inst.size();
  DsmSolution sol;
  sol.order_quantity.resize(n);
  sol.fractile.resize(n);
  sol.floor_binding.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& demand = inst.retailers[i].demand;
    const double beta = critical_fractile(inst.econ, marginal_direct_cost(inst, i));
    const auto order = newsvendor_order(demand, beta, demand.quantile(inst.econ.gamma));
    sol.order_quantity[i] = order.quantity;
    sol.fractile[i] = beta;
    sol.floor_binding[i] = order.floor_binding;
  }
  auto eval = dsm_expected_profit(inst, sol.order_quantity);
  sol.retailer_profit = std::move(eval.retailer_profit);
  sol.total_profit = eval.total_profit;
  sol.breakdown = eval.breakdown;
  return sol;
}

DsmEvaluation dsm_expected_profit(const Instance& inst, std::span<const double> quantities) {
  check_quantities(inst, quantities);
  DsmEvaluation out;
  out.retailer_profit.reserve(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto terms = retailer_terms(inst, i, quantities[i]);
    out.retailer_profit.push_back(terms.total());
    out.breakdown += terms;
  }
  out.breakdown.fixed += inst.econ.supplier_fixed_cost;
  out.total_profit = out.breakdown.total();
  return out;
}

PartyPayoffs party_payoffs(const Instance& inst, std::span<const double> quantities) {
  check_quantities(inst, quantities);
  const auto& e = inst.econ;
  PartyPayoffs out;
  out.supplier = -e.supplier_fixed_cost;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double q = quantities[i];
    const auto terms = retailer_terms(inst, i, q);
    out.supplier += (e.w - e.c) * q;
    // Retailer buys at w instead of c; the difference is the supplier's margin.
    out.retailers.push_back(terms.total() + e.c * q - e.w * q);
  }
  return out;
}

ProfitBreakdown dsm_realized_profit(const Instance& inst, std::span<const double> quantities,
                                    const DemandSample& sample) {
  check_quantities(inst, quantities);
  if (sample.demand.size() != inst.size()) throw ArgumentError("demand sample length mismatch");
  const auto& e = inst.econ;
  ProfitBreakdown out;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double q = quantities[i];
    const double d = sample.demand[i];
    out.revenue += e.s * d;
    out.shortage += e.b * std::max(0.0, d - q);
    out.salvage += e.v * std::max(0.0, q - d);
    out.procurement += e.c * q;
    out.transport += direct_transport_cost(inst.transport, q, direct_distance(inst, i));
    out.fixed += inst.retailers[i].fixed_cost;
  }
  out.fixed += e.supplier_fixed_cost;
  return out;
}

}  // namespace mlnv
