#pragma once

// Centralized system: the supplier ships one consolidated order Q_0 to a
// distribution center at X = (x, y), which forwards realized demand to each
// retailer. Quantity-only and distance-only transport have closed forms; the
// quantity-distance case is solved by Q-search, a grid over Q_0 with a
// smoothed Weber location problem inside.

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "mlnv/dsm.hpp"
#include "mlnv/model.hpp"

namespace mlnv {

// --- Weber (weighted Fermat) location problem -------------------------------

struct WeberAnchor {
  Point location;
  double weight = 0.0;
};

struct Box {
  Point lo;
  Point hi;
  Point project(const Point& p) const;
};

struct WeberProblem {
  std::vector<WeberAnchor> anchors;
  double epsilon = 0.0;
  std::optional<Box> bounds;

  double objective(const Point& p) const;
  Point gradient(const Point& p) const;
  /// Gradient with components zeroed where a bound is active and the descent
  /// direction points out of the box.
  Point projected_gradient(const Point& p) const;
  /// Throws ArgumentError unless weights are >= 0 with at least one > 0.
  void validate() const;
};

struct WeberResult {
  Point location;
  std::size_t iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
};

/// Damped Weiszfeld iteration on the smoothed distances, projected onto the
/// bounds when present. The objective is non-increasing across iterations.
/// Throws ConvergenceError (with the last iterate) when max_iter is exceeded,
/// or when no descent step is representable while the projected gradient
/// still exceeds 1e-6 times the total anchor weight.
WeberResult weber_solve(const WeberProblem& problem, const Point& start, double tol,
                        std::size_t max_iter = 10000);

// --- centralized solutions ---------------------------------------------------

struct CsmDiagnostics {
  std::size_t grid_points = 0;
  std::size_t weber_iterations = 0;
  std::size_t refinement_rounds = 0;
  bool gamma_floor_binding = false;
  // Distance mode: the centre of gravity versus the true Weber point.
  std::optional<Point> weber_location;
  double weber_objective_gain = 0.0;  // transport(centroid) - transport(weber) >= 0
};

struct GridTuple {
  double profit = 0.0;
  double q0 = 0.0;
  Point location;
};

struct CsmSolution {
  double q0 = 0.0;
  std::optional<Point> dc_location;  // absent in quantity mode
  double expected_profit = 0.0;
  ProfitBreakdown breakdown;
  double trunk_transport = 0.0;      // supplier -> DC
  double last_mile_transport = 0.0;  // DC -> retailers
  CsmDiagnostics diagnostics;
  std::vector<GridTuple> trace;      // q_search only: every evaluated point, grid first, then refinement
};

struct CsmEvaluation {
  double profit = 0.0;
  ProfitBreakdown breakdown;
  double trunk_transport = 0.0;
  double last_mile_transport = 0.0;
};

/// N(sum mu_i, sqrt(sum sigma_i^2)) for independent retailer demands.
NormalDist total_demand_dist(const Instance& inst);

/// Aggregate service floor Q_lb = sum_i F_i^{-1}(gamma).
double service_floor(const Instance& inst);

/// Expected centralized profit at (Q_0, X) under the instance's transport mode.
/// Last-mile shipments use expected demand mu_i. `loc` is ignored in quantity
/// mode and required otherwise.
CsmEvaluation csm_expected_profit(const Instance& inst, double q0, const std::optional<Point>& loc);

/// The quantity-distance objective, whatever the instance's mode field says.
CsmEvaluation csm_case3_objective(const Instance& inst, double q0, const Point& loc);

/// Profit of a centralized plan for one realized demand vector.
ProfitBreakdown csm_realized_profit(const Instance& inst, const CsmSolution& sol, const DemandSample& sample);

/// Optimal Q_0 for a DC fixed at `loc`, under the instance's mode.
OrderLevel csm_order_for_location(const Instance& inst, const std::optional<Point>& loc);

/// Weighted centre of gravity over supplier and retailers with per-leg
/// distance rates as weights.
Point center_of_gravity(const Instance& inst);

CsmSolution solve_csm_case1(const Instance& inst);
CsmSolution solve_csm_case2(const Instance& inst);

struct QSearchOptions {
  std::size_t steps = 200;
  double tol = 1e-9;          // inner gradient tolerance, relative to the total anchor weight
  std::size_t max_iter = 20000;
  bool refine = true;         // alternate closed-form Q_0 and Weber steps from the best grid point
};

/// Grid search over Q_0 in [Q_lb, 2 Q_lb]; requires quantity-distance mode.
CsmSolution q_search(const Instance& inst, const QSearchOptions& options = {});

/// Dispatches on the instance's transport mode.
CsmSolution solve_csm(const Instance& inst, const QSearchOptions& options = {});

struct RetailerDcSolution {
  CsmSolution solution;
  int retailer_id = 0;
  double separation = 0.0;  // miles between the chosen retailer and opt.dc_location
};

/// Moves the DC to the retailer nearest opt.dc_location (ties to the lowest
/// id) and re-optimizes Q_0 for the fixed distances.
RetailerDcSolution retailer_as_dc(const Instance& inst, const CsmSolution& opt);

// --- non-concavity witness ----------------------------------------------------

/// One supplier, one retailer, one DC; both legs share the bundling cost p
/// and the unit-mile rate r. Defaults are the textbook witness point.
struct Theorem1Inputs {
  double s = 200.0;
  double c = 50.0;
  double v = 20.0;
  double b = 25.0;
  double p = 100.0;
  double r = 0.05;
  Point supplier{100.0, 100.0};
  Point retailer{500.0, 500.0};
  Point dc{300.0, 300.0};
  double q0 = 1000.0;
  double mu = 100.0;
  double sigma = 10.0;
  double epsilon = 0.0;

  /// The matching single-retailer instance in quantity-distance mode.
  Instance as_instance() const;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Analytic Hessian of the expected profit in (Q_0, x, y). Throws
/// SingularityError if the DC coincides with a facility while epsilon = 0.
Matrix3 profit_hessian(const Theorem1Inputs& in);

/// z^T H z for the analytic Hessian above.
double hessian_quadratic_form(const Theorem1Inputs& in, const std::array<double, 3>& z);

}  // namespace mlnv
