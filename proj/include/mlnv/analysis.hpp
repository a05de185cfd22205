#pragma once

// Centralized-versus-decentralized comparison: analytic profit gaps for the
// quantity and distance modes, the dominance predicate for the quantity mode,
// realized-demand simulation with fulfillment metrics, and sensitivity sweeps.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlnv/csm.hpp"
#include "mlnv/dsm.hpp"
#include "mlnv/model.hpp"

namespace mlnv {

/// Homogeneous network: n retailers with common mean and stdev, uniform rates.
struct GapInputs {
  std::size_t n = 1;
  double mu = 150.0;
  double sigma = 15.0;
  EconomicParams econ;
  double rs = 0.0;  // direct supplier -> retailer rate
  double r0 = 0.0;  // trunk rate
  double rq = 0.0;  // last-mile rate
};

/// Builds the homogeneous instance (all fixed costs zero) in the given mode.
/// Retailers sit on a circle around the supplier; the layout only matters in
/// the distance-bearing modes.
Instance gap_instance(const GapInputs& g, TransportMode mode);

enum class GapRegime { Fractile, Floor, Mixed };
std::string_view to_string(GapRegime regime);

struct Case1Gap {
  double direct = 0.0;                 // P_CSM - P_DSM from the two profit evaluators
  std::optional<double> closed_form;   // analytic expression for the regime, absent when mixed
  std::optional<double> corrected_closed_form;
  GapRegime regime = GapRegime::Mixed;
  double z_retailer = 0.0;
  double z_center = 0.0;

  /// |closed_form - direct| <= 1e-6 (1 + |direct|).
  bool closed_form_agrees() const;
};

/// Quantity-mode gap. The regime comes from the solvers' own floor flags.
Case1Gap case1_profit_gap(const GapInputs& g);

/// Fractile-regime closed form:
///   (rs - r0 - rq) mu0 + (c - v)(n sigma z_i - sigma0 z_0) + rs n sigma z_i - r0 sigma0 z_0
///   + (b - v) sqrt(n) sigma [sqrt(n) R(z_i) - R(z_0)].
double fractile_regime_gap(const GapInputs& g, double z_retailer, double z_center);

/// The floor-regime expression as usually stated,
///   -rq mu0 + (rs - r0) Q_0 sigma + (b - v) sqrt(n) sigma R(z_gamma) (sqrt(n) - 1).
/// It treats the pooled shortage as sigma0 R(z_gamma) and scales the rate
/// difference by sigma, so it does not match direct evaluation.
double floor_regime_gap_textbook(const GapInputs& g);

/// Floor regime with Q_0 = sum Q_i, hence z_0 = sqrt(n) z_gamma:
///   -rq mu0 + (rs - r0) Q_0 + (b - v) sigma [n R(z_gamma) - sqrt(n) R(sqrt(n) z_gamma)].
double floor_regime_gap_corrected(const GapInputs& g);

struct Lemma1Certificate {
  bool holds = false;
  double delta = 0.0;  // rs - r0 - rq
  double z_retailer = 0.0;
  double z_center = 0.0;
};

/// delta > 0 and sqrt(n) z_i >= z_0.
Lemma1Certificate lemma1_holds(const GapInputs& g);

struct PoolingGap {
  double inventory_gap = 0.0;  // (b - v) sqrt(n) sigma (sqrt(n) - 1) R(z)
  double z = 0.0;
  bool common_fractile = false;  // both systems order at z (no floor binds)
};

/// Distance-mode risk-pooling benefit with the common fractile (b - c)/(b - v).
PoolingGap case2_pooling_gap(const GapInputs& g);

/// Extra distance cost of routing through a DC at `dc`:
///   sum_i (r0 d0 + ri d_i - rs ds_i), unsmoothed distances.
double case2_transport_gap(const Instance& inst, const Point& dc);

struct Case2Comparison {
  double inventory_gap = 0.0;
  double transport_gap = 0.0;
  double net() const { return inventory_gap - transport_gap; }
};

Case2Comparison compare_case2(const GapInputs& g, const Instance& inst, const Point& dc);

/// Measured shortage-integral gap (b - v)(sum_i E[X_i - Q_i]^+ - E[X_0 - Q_0]^+).
double pooling_loss_gap(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm);

// --- simulation and reports -------------------------------------------------

struct ProfitComparison {
  ProfitBreakdown dsm;
  ProfitBreakdown csm;

  double p_dsm() const { return dsm.total(); }
  double p_csm() const { return csm.total(); }
  double delta() const { return p_csm() - p_dsm(); }
  double delta_revenue() const { return csm.before_transport() - dsm.before_transport(); }
  double delta_transport() const { return csm.transport - dsm.transport; }
};

struct FulfillmentMetrics {
  double m1 = 0.0;  // mean_i Q_i / mu_i
  double m2 = 0.0;  // mean_i Q_i / D_i over retailers with D_i > 0
  double m3 = 0.0;  // Q_0 / sum mu_i
  double m4 = 0.0;  // Q_0 / sum D_i
  std::size_t m2_excluded = 0;  // retailers with D_i = 0
};

struct ComparisonReport {
  ProfitComparison expected;
  ProfitComparison realized;
  FulfillmentMetrics metrics;
  DemandSample sample;
  std::uint64_t sample_seed = 0;
  std::uint64_t stream_id = 0;
  TransportMode mode = TransportMode::QuantityDistance;
};

/// One demand draw per retailer (retailer i uses stream position
/// rng.position() + i) and the resulting realized profits and metrics.
ComparisonReport simulate_realized(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm,
                                   const RngStream& rng);

struct AveragedRealized {
  std::size_t samples = 0;
  double mean_dsm = 0.0;
  double mean_csm = 0.0;
  double stderr_dsm = 0.0;
  double stderr_csm = 0.0;
  double mean_m2 = 0.0;
  double mean_m4 = 0.0;
};

/// Realized profits averaged over `samples` independent demand vectors.
AveragedRealized simulate_average(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm,
                                  const RngStream& rng, std::size_t samples);

/// Solutions and report for one instance.
struct ComparisonRun {
  DsmSolution dsm;
  CsmSolution csm;
  ComparisonReport report;
};

ComparisonRun run_comparison(const Instance& inst, const RngStream& rng, const QSearchOptions& options = {});

// --- sensitivity sweeps -------------------------------------------------------

enum class SweepParameter { Gamma, MapSize, Rates };
std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view text);

/// Rates use both fields (trunk rate, retail-leg rate); the others use `value`.
struct SweepValue {
  double value = 0.0;
  double second = 0.0;
  std::string label(SweepParameter p) const;
};

/// The instance with one parameter replaced. Rates set the trunk rate and the
/// retail-leg rate; direct shipments are priced at the retail-leg rate.
Instance apply_sweep_value(const Instance& base, SweepParameter p, const SweepValue& v);

struct SweepRow {
  SweepValue value;
  ComparisonRun run;
};

/// Re-solves both systems per value. Row k draws demand from stream id k of
/// `sample_seed`. Rows are independent and evaluated concurrently.
std::vector<SweepRow> sweep(const Instance& base, SweepParameter p, std::span<const SweepValue> values,
                            std::uint64_t sample_seed, const QSearchOptions& options = {});

}  // namespace mlnv
