#include "mlnv/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>

#include "mlnv/errors.hpp"

namespace mlnv {
namespace {

double fractile_z(double beta) { return std_quantile(clamp_fractile(beta)); }

struct RunningStat {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stderr_of_mean() const {
    return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
};

FulfillmentMetrics compute_metrics(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm,
                                   const DemandSample& sample) {
  FulfillmentMetrics m;
  const auto n = static_cast<double>(inst.size());
  double mu0 = 0.0;
  double m2_sum = 0.0;
  std::size_t m2_terms = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double mu = inst.retailers[i].demand.mu();
    mu0 += mu;
    m.m1 += dsm.order_quantity[i] / mu;
    if (sample.demand[i] > 0.0) {
      m2_sum += dsm.order_quantity[i] / sample.demand[i];
      ++m2_terms;
    } else {
      ++m.m2_excluded;
    }
  }
  m.m1 /= n;
  m.m2 = m2_terms > 0 ? m2_sum / static_cast<double>(m2_terms) : 0.0;
  m.m3 = csm.q0 / mu0;
  const double d0 = sample.total();
  m.m4 = d0 > 0.0 ? csm.q0 / d0 : 0.0;
  return m;
}

}  // namespace

Instance gap_instance(const GapInputs& g, TransportMode mode) {
  if (g.n < 1) throw ArgumentError("gap_instance: n must be >= 1");
  Instance inst;
  inst.map_size = 1000.0;
  inst.epsilon = 1e-9;
  inst.econ = g.econ;
  inst.transport = {mode, 0.0, g.rs, 0.0, g.r0, 0.0, g.rq};
  inst.supplier_location = {500.0, 500.0};
  for (std::size_t k = 0; k < g.n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(g.n);
    Retailer r;
    r.id = static_cast<int>(k + 1);
    r.location = {500.0 + 300.0 * std::cos(angle), 500.0 + 300.0 * std::sin(angle)};
    r.demand = NormalDist(g.mu, g.sigma);
    inst.retailers.push_back(r);
  }
  inst.validate();
  return inst;
}

std::string_view to_string(GapRegime regime) {
  switch (regime) {
    case GapRegime::Fractile:
      return "fractile";
    case GapRegime::Floor:
      return "floor";
    case GapRegime::Mixed:
      return "mixed";
  }
  return "unknown";
}

bool Case1Gap::closed_form_agrees() const {
  return closed_form && std::abs(*closed_form - direct) <= 1e-6 * (1.0 + std::abs(direct));
}

double fractile_regime_gap(const GapInputs& g, double z_retailer, double z_center) {
  const auto& e = g.econ;
  const double n = static_cast<double>(g.n);
  const double rn = std::sqrt(n);
  const double mu0 = n * g.mu;
  const double sigma0 = rn * g.sigma;
  return (g.rs - g.r0 - g.rq) * mu0 + (e.c - e.v) * (n * g.sigma * z_retailer - sigma0 * z_center) +
         g.rs * n * g.sigma * z_retailer - g.r0 * sigma0 * z_center +
         (e.b - e.v) * rn * g.sigma * (rn * unit_loss(z_retailer) - unit_loss(z_center));
}

double floor_regime_gap_textbook(const GapInputs& g) {
  const auto& e = g.econ;
  const double n = static_cast<double>(g.n);
  const double rn = std::sqrt(n);
  const double zg = std_quantile(e.gamma);
  const double q0 = n * (g.mu + zg * g.sigma);
  return -g.rq * n * g.mu + (g.rs - g.r0) * q0 * g.sigma + (e.b - e.v) * rn * g.sigma * unit_loss(zg) * (rn - 1.0);
}

double floor_regime_gap_corrected(const GapInputs& g) {
  const auto& e = g.econ;
  const double n = static_cast<double>(g.n);
  const double rn = std::sqrt(n);
  const double zg = std_quantile(e.gamma);
  const double q0 = n * (g.mu + zg * g.sigma);
  return -g.rq * n * g.mu + (g.rs - g.r0) * q0 +
         (e.b - e.v) * g.sigma * (n * unit_loss(zg) - rn * unit_loss(rn * zg));
}

Case1Gap case1_profit_gap(const GapInputs& g) {
  const Instance inst = gap_instance(g, TransportMode::Quantity);
  const auto dsm = solve_dsm(inst);
  const auto csm = solve_csm_case1(inst);

  Case1Gap out;
  out.direct = csm.expected_profit - dsm.total_profit;
  out.z_retailer = fractile_z(critical_fractile(g.econ, g.rs));
  out.z_center = fractile_z(critical_fractile(g.econ, g.r0));

  const bool dsm_floor = std::all_of(dsm.floor_binding.begin(), dsm.floor_binding.end(), [](bool b) { return b; });
  const bool dsm_fractile = std::none_of(dsm.floor_binding.begin(), dsm.floor_binding.end(), [](bool b) { return b; });
  const bool csm_floor = csm.diagnostics.gamma_floor_binding;
  if (dsm_fractile && !csm_floor) {
    out.regime = GapRegime::Fractile;
    out.closed_form = fractile_regime_gap(g, out.z_retailer, out.z_center);
    out.corrected_closed_form = out.closed_form;
  } else if (dsm_floor && csm_floor) {
    out.regime = GapRegime::Floor;
    out.closed_form = floor_regime_gap_textbook(g);
    out.corrected_closed_form = floor_regime_gap_corrected(g);
  } else {
    out.regime = GapRegime::Mixed;
  }
  return out;
}

Lemma1Certificate lemma1_holds(const GapInputs& g) {
  Lemma1Certificate c;
  c.delta = g.rs - g.r0 - g.rq;
  c.z_retailer = fractile_z(critical_fractile(g.econ, g.rs));
  c.z_center = fractile_z(critical_fractile(g.econ, g.r0));
  c.holds = c.delta > 0.0 && std::sqrt(static_cast<double>(g.n)) * c.z_retailer >= c.z_center;
  return c;
}

PoolingGap case2_pooling_gap(const GapInputs& g) {
  const auto& e = g.econ;
  const double rn = std::sqrt(static_cast<double>(g.n));
  PoolingGap out;
  out.z = fractile_z(critical_fractile(e, 0.0));
  out.inventory_gap = (e.b - e.v) * rn * g.sigma * (rn - 1.0) * unit_loss(out.z);
  const double zg = std_quantile(e.gamma);
  const double beta = critical_fractile(e, 0.0);
  out.common_fractile = beta > 0.0 && beta < 1.0 && out.z >= zg && out.z >= rn * zg;
  return out;
}

double case2_transport_gap(const Instance& inst, const Point& dc) {
  const auto& t = inst.transport;
  const double d0 = distance(inst.supplier_location, dc, 0.0);
  double gap = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double di = distance(inst.retailers[i].location, dc, 0.0);
    gap += t.trunk_rate * d0 + t.last_rate * di - t.direct_rate * direct_distance(inst, i);
  }
  return gap;
}

Case2Comparison compare_case2(const GapInputs& g, const Instance& inst, const Point& dc) {
  return {case2_pooling_gap(g).inventory_gap, case2_transport_gap(inst, dc)};
}

double pooling_loss_gap(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm) {
  double retail = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    retail += partial_expectations(inst.retailers[i].demand, dsm.order_quantity[i]).underage;
  }
  const double pooled = partial_expectations(total_demand_dist(inst), csm.q0).underage;
  return (inst.econ.b - inst.econ.v) * (retail - pooled);
}

ComparisonReport simulate_realized(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm,
                                   const RngStream& rng) {
  if (dsm.order_quantity.size() != inst.size()) throw ArgumentError("simulate_realized: DSM solution size mismatch");
  ComparisonReport rep;
  rep.mode = inst.transport.mode;
  rep.sample_seed = rng.seed();
  rep.stream_id = rng.stream_id();
  rep.sample.demand.resize(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    rep.sample.demand[i] = demand_draw(inst.retailers[i].demand, rng, i);
  }
  rep.expected = {dsm.breakdown, csm.breakdown};
  rep.realized = {dsm_realized_profit(inst, dsm.order_quantity, rep.sample),
                  csm_realized_profit(inst, csm, rep.sample)};
  rep.metrics = compute_metrics(inst, dsm, csm, rep.sample);
  return rep;
}

AveragedRealized simulate_average(const Instance& inst, const DsmSolution& dsm, const CsmSolution& csm,
                                  const RngStream& rng, std::size_t samples) {
  if (samples < 1) throw ArgumentError("simulate_average: samples must be >= 1");
  const std::size_t n = inst.size();
  RunningStat pd, pc, m2, m4;
  DemandSample sample;
  sample.demand.resize(n);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      sample.demand[i] = demand_draw(inst.retailers[i].demand, rng, k * n + i);
    }
    pd.add(dsm_realized_profit(inst, dsm.order_quantity, sample).total());
    pc.add(csm_realized_profit(inst, csm, sample).total());
    const auto m = compute_metrics(inst, dsm, csm, sample);
    m2.add(m.m2);
    m4.add(m.m4);
  }
  return {samples, pd.mean, pc.mean, pd.stderr_of_mean(), pc.stderr_of_mean(), m2.mean, m4.mean};
}

ComparisonRun run_comparison(const Instance& inst, const RngStream& rng, const QSearchOptions& options) {
  ComparisonRun run;
  run.dsm = solve_dsm(inst);
  run.csm = solve_csm(inst, options);
  run.report = simulate_realized(inst, run.dsm, run.csm, rng);
  return run;
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Gamma:
      return "gamma";
    case SweepParameter::MapSize:
      return "map_size";
    case SweepParameter::Rates:
      return "rates";
  }
  return "unknown";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "gamma") return SweepParameter::Gamma;
  if (lower == "map" || lower == "map_size") return SweepParameter::MapSize;
  if (lower == "rates") return SweepParameter::Rates;
  throw ArgumentError("unknown sweep parameter '" + std::string(text) + "'");
}

std::string SweepValue::label(SweepParameter p) const {
  char buf[64];
  if (p == SweepParameter::Rates) {
    std::snprintf(buf, sizeof buf, "%g:%g", value, second);
  } else {
    std::snprintf(buf, sizeof buf, "%g", value);
  }
  return buf;
}

Instance apply_sweep_value(const Instance& base, SweepParameter p, const SweepValue& v) {
  Instance inst = base;
  switch (p) {
    case SweepParameter::Gamma:
      inst.econ.gamma = v.value;
      break;
    case SweepParameter::MapSize:
      inst = rescale_map(base, v.value);
      break;
    case SweepParameter::Rates:
      inst.transport.trunk_rate = v.value;
      inst.transport.last_rate = v.second;
      inst.transport.direct_rate = v.second;
      break;
  }
  inst.validate();
  return inst;
}

std::vector<SweepRow> sweep(const Instance& base, SweepParameter p, std::span<const SweepValue> values,
                            std::uint64_t sample_seed, const QSearchOptions& options) {
  if (values.empty()) throw ArgumentError("sweep: at least one value required");
  std::vector<Instance> instances;
  instances.reserve(values.size());
  for (const auto& v : values) instances.push_back(apply_sweep_value(base, p, v));

  std::vector<std::future<ComparisonRun>> pending;
  pending.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    pending.push_back(std::async(std::launch::async, [&instances, k, sample_seed, &options] {
      return run_comparison(instances[k], RngStream(sample_seed, k), options);
    }));
  }
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) rows.push_back({values[k], pending[k].get()});
  return rows;
}

}  // namespace mlnv
