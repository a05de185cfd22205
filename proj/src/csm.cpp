#include "mlnv/csm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlnv/errors.hpp"

namespace mlnv {
namespace {

constexpr double kStallGradient = 1e-6;

double norm(const Point& p) { return std::hypot(p.x, p.y); }

double trunk_cost(const TransportParams& t, double q0, double d0) {
  switch (t.mode) {
    case TransportMode::Quantity:
      return t.trunk_fixed + t.trunk_rate * q0;
    case TransportMode::Distance:
      return t.trunk_fixed + t.trunk_rate * d0;
    case TransportMode::QuantityDistance:
      return t.trunk_fixed + t.trunk_rate * q0 * d0;
  }
  return 0.0;
}

double last_mile_cost(const TransportParams& t, double shipped, double di) {
  switch (t.mode) {
    case TransportMode::Quantity:
      return t.last_fixed + t.last_rate * shipped;
    case TransportMode::Distance:
      return t.last_fixed + t.last_rate * di;
    case TransportMode::QuantityDistance:
      return t.last_fixed + t.last_rate * shipped * di;
  }
  return 0.0;
}

double fixed_costs(const Instance& inst) {
  double k = inst.econ.supplier_fixed_cost;
  for (const auto& r : inst.retailers) k += r.fixed_cost;
  return k;
}

void require_mode(const Instance& inst, TransportMode mode, const char* who) {
  if (inst.transport.mode != mode) {
    throw ArgumentError(std::string(who) + " requires " + std::string(to_string(mode)) + " mode, instance is " +
                        std::string(to_string(inst.transport.mode)));
  }
}

Box solver_box(const Instance& inst) {
  const double pad = 0.1 * inst.map_size;
  return {{-pad, -pad}, {inst.map_size + pad, inst.map_size + pad}};
}

// Anchors of the fixed-Q_0 location problem in quantity-distance mode.
WeberProblem case3_location_problem(const Instance& inst, double q0) {
  WeberProblem p;
  p.epsilon = inst.epsilon;
  p.bounds = solver_box(inst);
  p.anchors.reserve(inst.size() + 1);
  p.anchors.push_back({inst.supplier_location, inst.transport.trunk_rate * q0});
  for (const auto& r : inst.retailers) {
    p.anchors.push_back({r.location, inst.transport.last_rate * r.demand.mu()});
  }
  return p;
}

double total_weight(const WeberProblem& p) {
  double w = 0.0;
  for (const auto& a : p.anchors) w += a.weight;
  return w;
}

// f(to) - f(from) without cancellation: each distance difference is formed
// from coordinate differences.
double objective_change(const WeberProblem& p, const Point& from, const Point& to) {
  const double sx = to.x - from.x;
  const double sy = to.y - from.y;
  double change = 0.0;
  for (const auto& a : p.anchors) {
    const double d_from = distance(from, a.location, p.epsilon);
    const double d_to = distance(to, a.location, p.epsilon);
    const double sum = d_from + d_to;
    if (sum == 0.0) continue;
    const double sq = sx * (to.x + from.x - 2.0 * a.location.x) + sy * (to.y + from.y - 2.0 * a.location.y);
    change += a.weight * sq / sum;
  }
  return change;
}

// Newton step on the smoothed objective; nullopt if the Hessian is singular.
std::optional<Point> newton_target(const WeberProblem& p, const Point& x, const Point& g) {
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  for (const auto& a : p.anchors) {
    const double d = distance(x, a.location, p.epsilon);
    if (d == 0.0 || a.weight == 0.0) continue;
    const double dx = x.x - a.location.x;
    const double dy = x.y - a.location.y;
    const double k = a.weight / d;
    const double d2 = d * d;
    hxx += k * (1.0 - dx * dx / d2);
    hyy += k * (1.0 - dy * dy / d2);
    hxy -= k * dx * dy / d2;
  }
  const double det = hxx * hyy - hxy * hxy;
  if (!(det > 0.0) || !std::isfinite(det)) return std::nullopt;
  return Point{x.x - (hyy * g.x - hxy * g.y) / det, x.y - (hxx * g.y - hxy * g.x) / det};
}

CsmSolution make_solution(const Instance& inst, double q0, const std::optional<Point>& loc) {
  const auto eval = csm_expected_profit(inst, q0, loc);
  CsmSolution sol;
  sol.q0 = q0;
  sol.dc_location = loc;
  sol.expected_profit = eval.profit;
  sol.breakdown = eval.breakdown;
  sol.trunk_transport = eval.trunk_transport;
  sol.last_mile_transport = eval.last_mile_transport;
  return sol;
}

}  // namespace

// --- Weber -------------------------------------------------------------------

Point Box::project(const Point& p) const {
  return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y)};
}

double WeberProblem::objective(const Point& p) const {
  double f = 0.0;
  for (const auto& a : anchors) f += a.weight * distance(p, a.location, epsilon);
  return f;
}

Point WeberProblem::gradient(const Point& p) const {
  Point g;
  for (const auto& a : anchors) {
    const double d = distance(p, a.location, epsilon);
    if (d == 0.0) continue;  // subgradient 0 at an unsmoothed anchor
    g.x += a.weight * (p.x - a.location.x) / d;
    g.y += a.weight * (p.y - a.location.y) / d;
  }
  return g;
}

Point WeberProblem::projected_gradient(const Point& p) const {
  Point g = gradient(p);
  if (bounds) {
    if ((p.x <= bounds->lo.x && g.x > 0.0) || (p.x >= bounds->hi.x && g.x < 0.0)) g.x = 0.0;
    if ((p.y <= bounds->lo.y && g.y > 0.0) || (p.y >= bounds->hi.y && g.y < 0.0)) g.y = 0.0;
  }
  return g;
}

void WeberProblem::validate() const {
  bool any_positive = false;
  for (const auto& a : anchors) {
    if (!std::isfinite(a.weight) || a.weight < 0.0) throw ArgumentError("Weber weights must be finite and >= 0");
    any_positive = any_positive || a.weight > 0.0;
  }
  if (!any_positive) throw ArgumentError("Weber problem needs at least one positive weight");
  if (!(epsilon >= 0.0)) throw ArgumentError("Weber epsilon must be >= 0");
}

WeberResult weber_solve(const WeberProblem& problem, const Point& start, double tol, std::size_t max_iter) {
  problem.validate();
  if (!(tol > 0.0)) throw ArgumentError("weber_solve: tol must be > 0");

  Point x = problem.bounds ? problem.bounds->project(start) : start;
  double f = problem.objective(x);
  for (std::size_t it = 0;; ++it) {
    const double gn = norm(problem.projected_gradient(x));
    if (gn <= tol) return {x, it, f, gn};
    if (it == max_iter) {
      throw ConvergenceError("weber_solve: no convergence after " + std::to_string(max_iter) +
                                 " iterations (gradient norm " + std::to_string(gn) + ")",
                             x.x, x.y, gn);
    }

    // Weiszfeld step: minimizer of the quadratic majorizer at x. Anchors
    // coinciding with x in the unsmoothed problem are skipped.
    double sw = 0.0;
    Point acc;
    for (const auto& a : problem.anchors) {
      const double d = distance(x, a.location, problem.epsilon);
      if (d == 0.0 || a.weight == 0.0) continue;
      const double k = a.weight / d;
      sw += k;
      acc.x += k * a.location.x;
      acc.y += k * a.location.y;
    }
    Point target = sw > 0.0 ? Point{acc.x / sw, acc.y / sw} : x;
    if (problem.bounds) target = problem.bounds->project(target);

    // Damping guards against round-off near a smoothed anchor.
    auto damp = [&](Point cand, double& change) {
      change = objective_change(problem, x, cand);
      for (int halvings = 0; change > 0.0 && halvings < 60; ++halvings) {
        cand = {0.5 * (x.x + cand.x), 0.5 * (x.y + cand.y)};
        change = objective_change(problem, x, cand);
      }
      return cand;
    };
    double change = 0.0;
    Point next = damp(target, change);
    // Weiszfeld is sublinear when the optimum sits next to an anchor; a
    // Newton candidate is taken whenever it descends further.
    if (auto nt = newton_target(problem, x, problem.gradient(x))) {
      if (problem.bounds) *nt = problem.bounds->project(*nt);
      double nchange = 0.0;
      const Point ncand = damp(*nt, nchange);
      if (nchange < change) {
        next = ncand;
        change = nchange;
      }
    }
    if (change > 0.0 || next == x) {
      // No representable descent step remains. Near a smoothed anchor the
      // computed gradient carries round-off of this order.
      if (gn <= kStallGradient * total_weight(problem)) return {x, it, f, gn};
      throw ConvergenceError("weber_solve: stalled at gradient norm " + std::to_string(gn) + " above tolerance",
                             x.x, x.y, gn);
    }
    x = next;
    f = problem.objective(x);
  }
}

// --- evaluation ------------------------------------------------------------

NormalDist total_demand_dist(const Instance& inst) {
  if (inst.retailers.empty()) throw ArgumentError("total_demand_dist: no retailers");
  double mu = 0.0;
  double var = 0.0;
  for (const auto& r : inst.retailers) {
    mu += r.demand.mu();
    var += r.demand.sigma() * r.demand.sigma();
  }
  return NormalDist(mu, std::sqrt(var));
}

double service_floor(const Instance& inst) {
  double q = 0.0;
  for (const auto& r : inst.retailers) q += r.demand.quantile(inst.econ.gamma);
  return q;
}

CsmEvaluation csm_expected_profit(const Instance& inst, double q0, const std::optional<Point>& loc) {
  if (!std::isfinite(q0) || q0 < 0.0) throw ArgumentError("csm: Q_0 must be finite and >= 0");
  const bool needs_location = inst.transport.mode != TransportMode::Quantity;
  if (needs_location && !loc) throw ArgumentError("csm: a DC location is required in this transport mode");

  const auto& e = inst.econ;
  const auto total = total_demand_dist(inst);
  const auto pe = partial_expectations(total, q0);

  CsmEvaluation out;
  out.breakdown.revenue = e.s * total.mu();
  out.breakdown.shortage = e.b * pe.underage;
  out.breakdown.salvage = e.v * pe.overage;
  out.breakdown.procurement = e.c * q0;
  out.breakdown.fixed = fixed_costs(inst);

  const Point dc = loc.value_or(Point{});
  const double d0 = needs_location ? distance(inst.supplier_location, dc, inst.epsilon) : 0.0;
  out.trunk_transport = trunk_cost(inst.transport, q0, d0);
  for (const auto& r : inst.retailers) {
    const double di = needs_location ? distance(r.location, dc, inst.epsilon) : 0.0;
    out.last_mile_transport += last_mile_cost(inst.transport, r.demand.mu(), di);
  }
  out.breakdown.transport = out.trunk_transport + out.last_mile_transport;
  out.profit = out.breakdown.total();
  return out;
}

CsmEvaluation csm_case3_objective(const Instance& inst, double q0, const Point& loc) {
  if (inst.transport.mode == TransportMode::QuantityDistance) return csm_expected_profit(inst, q0, loc);
  Instance qd = inst;
  qd.transport.mode = TransportMode::QuantityDistance;
  return csm_expected_profit(qd, q0, loc);
}

ProfitBreakdown csm_realized_profit(const Instance& inst, const CsmSolution& sol, const DemandSample& sample) {
  if (sample.demand.size() != inst.size()) throw ArgumentError("demand sample length mismatch");
  const bool needs_location = inst.transport.mode != TransportMode::Quantity;
  if (needs_location && !sol.dc_location) throw ArgumentError("csm: solution lacks a DC location");
  const auto& e = inst.econ;
  const Point dc = sol.dc_location.value_or(Point{});
  const double d0 = needs_location ? distance(inst.supplier_location, dc, inst.epsilon) : 0.0;

  const double total = sample.total();
  ProfitBreakdown out;
  out.revenue = e.s * total;
  out.shortage = e.b * std::max(0.0, total - sol.q0);
  out.salvage = e.v * std::max(0.0, sol.q0 - total);
  out.procurement = e.c * sol.q0;
  out.fixed = fixed_costs(inst);
  out.transport = trunk_cost(inst.transport, sol.q0, d0);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double di = needs_location ? distance(inst.retailers[i].location, dc, inst.epsilon) : 0.0;
    out.transport += last_mile_cost(inst.transport, sample.demand[i], di);
  }
  return out;
}

OrderLevel csm_order_for_location(const Instance& inst, const std::optional<Point>& loc) {
  const auto& t = inst.transport;
  double marginal = 0.0;
  switch (t.mode) {
    case TransportMode::Quantity:
      marginal = t.trunk_rate;
      break;
    case TransportMode::Distance:
      marginal = 0.0;
      break;
    case TransportMode::QuantityDistance:
      if (!loc) throw ArgumentError("csm: a DC location is required in this transport mode");
      marginal = t.trunk_rate * distance(inst.supplier_location, *loc, inst.epsilon);
      break;
  }
  const double beta = critical_fractile(inst.econ, marginal);
  return newsvendor_order(total_demand_dist(inst), beta, service_floor(inst));
}

Point center_of_gravity(const Instance& inst) {
  double w0 = inst.transport.trunk_rate;
  double wi = inst.transport.last_rate;
  if (w0 + wi * static_cast<double>(inst.size()) <= 0.0) {
    w0 = 1.0;  // location is irrelevant at zero rates; fall back to the plain centroid
    wi = 1.0;
  }
  double sw = w0;
  Point acc{w0 * inst.supplier_location.x, w0 * inst.supplier_location.y};
  for (const auto& r : inst.retailers) {
    sw += wi;
    acc.x += wi * r.location.x;
    acc.y += wi * r.location.y;
  }
  return {acc.x / sw, acc.y / sw};
}

// --- closed forms ------------------------------------------------------------

CsmSolution solve_csm_case1(const Instance& inst) {
  require_mode(inst, TransportMode::Quantity, "solve_csm_case1");
  inst.validate();
  const auto order = csm_order_for_location(inst, std::nullopt);
  auto sol = make_solution(inst, order.quantity, std::nullopt);
  sol.diagnostics.gamma_floor_binding = order.floor_binding;
  return sol;
}

CsmSolution solve_csm_case2(const Instance& inst) {
  require_mode(inst, TransportMode::Distance, "solve_csm_case2");
  inst.validate();
  const Point centroid = center_of_gravity(inst);
  const auto order = csm_order_for_location(inst, centroid);
  auto sol = make_solution(inst, order.quantity, centroid);
  sol.diagnostics.gamma_floor_binding = order.floor_binding;

  // Cross-check: the centre of gravity solves the squared-distance problem;
  // the plain-distance optimum is the Weber point.
  WeberProblem p;
  p.epsilon = inst.epsilon;
  p.anchors.push_back({inst.supplier_location, inst.transport.trunk_rate});
  for (const auto& r : inst.retailers) p.anchors.push_back({r.location, inst.transport.last_rate});
  if (total_weight(p) > 0.0) {
    try {
      const auto w = weber_solve(p, centroid, 1e-9 * total_weight(p));
      sol.diagnostics.weber_location = w.location;
      sol.diagnostics.weber_iterations = w.iterations;
      sol.diagnostics.weber_objective_gain = p.objective(centroid) - w.objective;
    } catch (const ConvergenceError&) {
      // Diagnostic only; the closed-form answer stands.
    }
  }
  return sol;
}

// --- Q-search ------------------------------------------------------------------

CsmSolution q_search(const Instance& inst, const QSearchOptions& options) {
  require_mode(inst, TransportMode::QuantityDistance, "q_search");
  inst.validate();
  if (options.steps < 2) throw ArgumentError("q_search: steps must be >= 2");
  if (!(options.tol > 0.0)) throw ArgumentError("q_search: tol must be > 0");

  const double q_lb = service_floor(inst);
  if (!(q_lb > 0.0)) throw ArgumentError("q_search: the service floor sum F_i^{-1}(gamma) must be positive");
  const double q_hi = 2.0 * q_lb;
  const double step = (q_hi - q_lb) / static_cast<double>(options.steps - 1);

  std::size_t iterations = 0;
  auto locate = [&](double q0, const Point& start) -> Point {
    const auto problem = case3_location_problem(inst, q0);
    const double w = total_weight(problem);
    if (w <= 0.0) return start;  // zero rates: every location is optimal
    try {
      const auto res = weber_solve(problem, start, options.tol * w, options.max_iter);
      iterations += res.iterations;
      return res.location;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("q_search: location solve failed at Q_0 = " + std::to_string(q0) + ": " + e.what(),
                             e.x(), e.y(), e.gradient_norm());
    }
  };

  CsmSolution best;
  std::vector<GridTuple> trace;
  trace.reserve(options.steps);
  Point start = center_of_gravity(inst);
  std::size_t best_index = 0;
  for (std::size_t k = 0; k < options.steps; ++k) {
    const double q0 = k + 1 == options.steps ? q_hi : q_lb + static_cast<double>(k) * step;
    const Point loc = locate(q0, start);
    start = loc;
    const double profit = csm_case3_objective(inst, q0, loc).profit;
    trace.push_back({profit, q0, loc});
    if (profit > trace[best_index].profit) best_index = k;  // strict: ties keep the smaller Q_0
  }

  GridTuple incumbent = trace[best_index];
  std::size_t rounds = 0;
  if (options.refine) {
    for (; rounds < 50; ++rounds) {
      const double q0 = std::clamp(csm_order_for_location(inst, incumbent.location).quantity, q_lb, q_hi);
      const Point loc = locate(q0, incumbent.location);
      const double profit = csm_case3_objective(inst, q0, loc).profit;
      trace.push_back({profit, q0, loc});
      if (!(profit > incumbent.profit + 1e-12 * std::abs(incumbent.profit))) break;
      incumbent = {profit, q0, loc};
    }
  }

  best = make_solution(inst, incumbent.q0, incumbent.location);
  best.diagnostics.grid_points = options.steps;
  best.diagnostics.weber_iterations = iterations;
  best.diagnostics.refinement_rounds = rounds;
  best.diagnostics.gamma_floor_binding = incumbent.q0 <= q_lb;
  best.trace = std::move(trace);
  return best;
}

CsmSolution solve_csm(const Instance& inst, const QSearchOptions& options) {
  switch (inst.transport.mode) {
    case TransportMode::Quantity:
      return solve_csm_case1(inst);
    case TransportMode::Distance:
      return solve_csm_case2(inst);
    case TransportMode::QuantityDistance:
      return q_search(inst, options);
  }
  throw ArgumentError("solve_csm: unknown transport mode");
}

RetailerDcSolution retailer_as_dc(const Instance& inst, const CsmSolution& opt) {
  if (!opt.dc_location) throw ArgumentError("retailer_as_dc: solution has no DC location");
  inst.validate();
  const Point target = *opt.dc_location;

  const Retailer* chosen = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : inst.retailers) {
    const double d = distance(r.location, target, 0.0);
    if (d < best || (d == best && chosen != nullptr && r.id < chosen->id)) {
      best = d;
      chosen = &r;
    }
  }

  const auto order = csm_order_for_location(inst, chosen->location);
  RetailerDcSolution out;
  out.solution = make_solution(inst, order.quantity, chosen->location);
  out.solution.diagnostics.gamma_floor_binding = order.floor_binding;
  out.retailer_id = chosen->id;
  out.separation = best;
  return out;
}

// --- Hessian witness -------------------------------------------------------------

Instance Theorem1Inputs::as_instance() const {
  Instance inst;
  inst.seed = 0;
  inst.map_size = std::max({1000.0, supplier.x, supplier.y, retailer.x, retailer.y});
  inst.epsilon = epsilon > 0.0 ? epsilon : 1e-12;
  inst.supplier_location = supplier;
  inst.econ = {.s = s, .w = c, .c = c, .v = v, .b = b, .gamma = 0.3, .supplier_fixed_cost = 0.0};
  inst.transport = {TransportMode::QuantityDistance, p, r, p, r, p, r};
  Retailer one;
  one.id = 1;
  one.location = retailer;
  one.demand = NormalDist(mu, sigma);
  inst.retailers.push_back(one);
  return inst;
}

Matrix3 profit_hessian(const Theorem1Inputs& in) {
  const double d0 = distance(in.dc, in.supplier, in.epsilon);
  const double d1 = distance(in.dc, in.retailer, in.epsilon);
  if (d0 == 0.0 || d1 == 0.0) {
    throw SingularityError("profit_hessian: DC coincides with a facility and epsilon = 0");
  }
  const double dx0 = in.dc.x - in.supplier.x;
  const double dy0 = in.dc.y - in.supplier.y;
  const double dx1 = in.dc.x - in.retailer.x;
  const double dy1 = in.dc.y - in.retailer.y;
  const double d0c = d0 * d0 * d0;
  const double d1c = d1 * d1 * d1;
  // Trunk leg carries Q_0, last leg carries expected demand mu.
  const double w0 = in.r * in.q0;
  const double w1 = in.r * in.mu;

  Matrix3 h{};
  h[0][0] = (in.v - in.b) * std_pdf((in.q0 - in.mu) / in.sigma) / in.sigma;
  h[0][1] = h[1][0] = -in.r * dx0 / d0;
  h[0][2] = h[2][0] = -in.r * dy0 / d0;
  h[1][1] = -w0 * (1.0 / d0 - dx0 * dx0 / d0c) - w1 * (1.0 / d1 - dx1 * dx1 / d1c);
  h[2][2] = -w0 * (1.0 / d0 - dy0 * dy0 / d0c) - w1 * (1.0 / d1 - dy1 * dy1 / d1c);
  h[1][2] = h[2][1] = w0 * dx0 * dy0 / d0c + w1 * dx1 * dy1 / d1c;
  return h;
}

double hessian_quadratic_form(const Theorem1Inputs& in, const std::array<double, 3>& z) {
  const auto h = profit_hessian(in);
  double q = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) q += z[i] * h[i][j] * z[j];
  }
  return q;
}

}  // namespace mlnv
