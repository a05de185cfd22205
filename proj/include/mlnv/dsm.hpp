#pragma once

// Decentralized system: every retailer orders straight from the supplier, so
// the network splits into n independent newsvendor problems with a service
// floor F_i(Q_i) >= gamma.

#include <span>
#include <vector>

#include "mlnv/model.hpp"

namespace mlnv {

/// Expected (or realized) profit split into its economic components. All
/// entries are nonnegative magnitudes; total() applies the signs.
struct ProfitBreakdown {
  double revenue = 0.0;      // s * demand
  double shortage = 0.0;     // b * (X - Q)^+
  double salvage = 0.0;      // v * (Q - X)^+
  double procurement = 0.0;  // c * Q
  double transport = 0.0;
  double fixed = 0.0;        // K_i and K_0

  double total() const { return revenue - shortage + salvage - procurement - transport - fixed; }
  /// Everything except transport; the "revenue" side of a system comparison.
  double before_transport() const { return total() + transport; }

  ProfitBreakdown& operator+=(const ProfitBreakdown& o);
};

// --- newsvendor building blocks shared with the centralized solver ---------

/// Clamps a critical fractile into [1e-9, 1 - 1e-9] so its quantile exists.
double clamp_fractile(double beta);

/// (b - c - marginal_transport) / (b - v).
double critical_fractile(const EconomicParams& econ, double marginal_transport);

struct OrderLevel {
  double quantity = 0.0;
  bool floor_binding = false;  // the gamma quantile dominated the fractile
};

/// max{ floor, F^{-1}(clamp(beta)) }.
OrderLevel newsvendor_order(const NormalDist& demand, double beta, double floor);

// --- decentralized model ----------------------------------------------------

struct DsmSolution {
  std::vector<double> order_quantity;
  std::vector<double> retailer_profit;  // system profit attributable to retailer i (before K_0)
  std::vector<double> fractile;         // unclamped beta_i
  std::vector<bool> floor_binding;
  double total_profit = 0.0;
  ProfitBreakdown breakdown;
};

struct DsmEvaluation {
  std::vector<double> retailer_profit;
  double total_profit = 0.0;
  ProfitBreakdown breakdown;
};

struct PartyPayoffs {
  double supplier = 0.0;
  std::vector<double> retailers;
  double total() const;
};

/// Supplier -> retailer distance used by the decentralized model (unsmoothed).
double direct_distance(const Instance& inst, std::size_t retailer_index);

/// Cost of one direct shipment of `quantity` over `dist` miles.
double direct_transport_cost(const TransportParams& t, double quantity, double dist);

DsmSolution solve_dsm(const Instance& inst);

/// Throws ArgumentError on a length mismatch or a negative quantity.
DsmEvaluation dsm_expected_profit(const Instance& inst, std::span<const double> quantities);

/// Supplier earns (w - c) per unit; retailers pay w. Sums to the system profit.
PartyPayoffs party_payoffs(const Instance& inst, std::span<const double> quantities);

/// Profit for one realized demand vector (revenue on full demand, shortage
/// and salvage on the realized mismatch).
ProfitBreakdown dsm_realized_profit(const Instance& inst, std::span<const double> quantities,
                                    const DemandSample& sample);

}  // namespace mlnv
