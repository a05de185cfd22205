#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlnv/analysis.hpp"
#include "mlnv/errors.hpp"
#include "oracles.hpp"

using namespace mlnv;

namespace {

GapInputs homogeneous(std::size_t n, double sigma) {
  GapInputs g;
  g.n = n;
  g.sigma = sigma;
  return g;
}

}  // namespace

TEST_CASE("identical systems have no gap") {
  auto g = homogeneous(1, 15);
  g.rs = 3;
  g.r0 = 3;
  const auto gap = case1_profit_gap(g);
  CHECK(std::abs(gap.direct) < 1e-9);
  REQUIRE(gap.closed_form);
  CHECK(std::abs(*gap.closed_form) < 1e-9);
  CHECK(case2_pooling_gap(g).inventory_gap == 0.0);
}

TEST_CASE("fractile regime closed form matches direct evaluation") {
  for (std::size_t n : {2u, 4u, 9u, 25u}) {
    auto g = homogeneous(n, 12);
    g.rs = 4;
    g.r0 = 1.5;
    g.rq = 0.5;
    const auto gap = case1_profit_gap(g);
    CAPTURE(n);
    CHECK(gap.regime == GapRegime::Fractile);
    CHECK(gap.closed_form_agrees());
    CHECK(*gap.closed_form == doctest::Approx(fractile_regime_gap(g, gap.z_retailer, gap.z_center)));
  }
}

TEST_CASE("floor regime: corrected form agrees, textbook form does not") {
  auto g = homogeneous(4, 10);
  g.econ.b = 60;
  g.econ.gamma = 0.7;
  const auto gap = case1_profit_gap(g);
  CHECK(gap.regime == GapRegime::Floor);
  REQUIRE(gap.corrected_closed_form);
  CHECK(std::abs(*gap.corrected_closed_form - gap.direct) <= 1e-6 * (1 + std::abs(gap.direct)));
  CHECK(std::abs(floor_regime_gap_textbook(g) - gap.direct) > 1.0);
}

TEST_CASE("default-b example with gamma = 0.3 is not in the floor regime") {
  // z_gamma < 0 while the fractile is about 0.83, so no floor binds. The
  // textbook floor expression evaluates to 180 * 20 * R(-0.5244) = 2573.18.
  const auto g = homogeneous(4, 10);
  CHECK(floor_regime_gap_textbook(g) == doctest::Approx(2573.18).epsilon(1e-5));
  const auto gap = case1_profit_gap(g);
  CHECK(gap.regime == GapRegime::Fractile);
  CHECK(gap.closed_form_agrees());
  CHECK(gap.direct == doctest::Approx(899.4634).epsilon(1e-6));
}

TEST_CASE("mixed regime omits the closed form") {
  auto g = homogeneous(4, 10);
  g.econ.b = 60;
  const auto gap = case1_profit_gap(g);
  CHECK(gap.regime == GapRegime::Mixed);
  CHECK_FALSE(gap.closed_form.has_value());
  CHECK_FALSE(gap.closed_form_agrees());
  CHECK(gap.direct > 0.0);
}

TEST_CASE("dominance predicate") {
  auto g = homogeneous(4, 15);
  g.rs = 12;
  g.r0 = 5;
  g.rq = 2;
  auto c = lemma1_holds(g);
  CHECK(c.holds);
  CHECK(c.delta == doctest::Approx(5));
  CHECK(c.z_retailer >= 0.0);
  CHECK(case1_profit_gap(g).direct > 0.0);

  g.rs = 7;
  c = lemma1_holds(g);
  CHECK_FALSE(c.holds);
  CHECK(c.delta == 0.0);
  CHECK(case1_profit_gap(g).direct >= 0.0);

  g.rs = 6;
  CHECK_FALSE(lemma1_holds(g).holds);
}

TEST_CASE("dominance region implies a positive gap (random draws)") {
  const RngStream rng(808, 0);
  int inside = 0;
  for (int k = 0; k < 300; ++k) {
    GapInputs g;
    g.n = 1 + static_cast<std::size_t>(30 * rng.uniform(6 * k));
    g.sigma = 10 + 10 * rng.uniform(6 * k + 1);
    g.r0 = 10 * rng.uniform(6 * k + 2);
    g.rq = 10 * rng.uniform(6 * k + 3);
    g.rs = g.r0 + g.rq + 0.01 + 20 * rng.uniform(6 * k + 4);
    g.econ.gamma = 0.05 + 0.9 * rng.uniform(6 * k + 5);
    const auto c = lemma1_holds(g);
    if (!c.holds) continue;
    ++inside;
    CHECK(case1_profit_gap(g).direct > 0.0);
  }
  CHECK(inside > 50);
}

TEST_CASE("case 2 pooling gap") {
  auto g = homogeneous(4, 10);
  const auto p = case2_pooling_gap(g);
  const double z = std_quantile((200.0 - 50.0) / 180.0);
  CHECK(p.z == doctest::Approx(z));
  CHECK(p.inventory_gap == doctest::Approx(180.0 * 2 * 10 * unit_loss(z)));
  CHECK(p.common_fractile);

  g.n = 1;
  CHECK(case2_pooling_gap(g).inventory_gap == 0.0);

  g = homogeneous(9, 10);
  g.econ.gamma = 0.9;
  CHECK_FALSE(case2_pooling_gap(g).common_fractile);
}

TEST_CASE("case 2 transport gap") {
  GapInputs g = homogeneous(6, 10);
  g.rs = 0.5;
  g.r0 = 0.3;
  g.rq = 0.5;
  const auto inst = gap_instance(g, TransportMode::Distance);
  // DC at the supplier: the last-mile and direct legs coincide.
  const double at_supplier = case2_transport_gap(inst, inst.supplier_location);
  CHECK(std::abs(at_supplier) < 1e-9);

  const Point dc{650, 420};
  double expect = 0.0;
  for (const auto& r : inst.retailers) {
    expect += 0.3 * distance(inst.supplier_location, dc) + 0.5 * distance(dc, r.location) -
              0.5 * distance(inst.supplier_location, r.location);
  }
  CHECK(case2_transport_gap(inst, dc) == doctest::Approx(expect));

  const auto cmp = compare_case2(g, inst, dc);
  CHECK(cmp.net() == doctest::Approx(cmp.inventory_gap - cmp.transport_gap));
  CHECK(cmp.inventory_gap == doctest::Approx(case2_pooling_gap(g).inventory_gap));
}

TEST_CASE("measured pooling gap matches the identity") {
  for (std::size_t n : {1u, 2u, 4u, 9u}) {
    auto g = homogeneous(n, 15);
    g.rs = 0.5;
    g.r0 = 0.3;
    g.rq = 0.5;
    const auto inst = gap_instance(g, TransportMode::Distance);
    const auto dsm = solve_dsm(inst);
    const auto csm = solve_csm_case2(inst);
    const double measured = pooling_loss_gap(inst, dsm, csm);
    const double formula = case2_pooling_gap(g).inventory_gap;
    CAPTURE(n);
    CHECK(std::abs(measured - formula) <= 1e-6 * std::max(1.0, std::abs(formula)));
  }
}

TEST_CASE("gap instance layout") {
  auto g = homogeneous(8, 11);
  const auto inst = gap_instance(g, TransportMode::QuantityDistance);
  CHECK(inst.size() == 8);
  CHECK_NOTHROW(inst.validate());
  for (const auto& r : inst.retailers) {
    CHECK(distance(r.location, inst.supplier_location) == doctest::Approx(300));
    CHECK(r.demand.sigma() == 11.0);
    CHECK(r.fixed_cost == 0.0);
  }
}

TEST_CASE("simulate_realized: determinism, identities, metrics") {
  const auto inst = generate_instance(15, 77);
  const auto run = run_comparison(inst, RngStream(5, 0));
  const auto& rep = run.report;
  CHECK(rep.sample.demand.size() == 15);
  const auto again = simulate_realized(inst, run.dsm, run.csm, RngStream(5, 0));
  CHECK(again.sample.demand == rep.sample.demand);
  CHECK(again.realized.delta() == rep.realized.delta());
  CHECK(simulate_realized(inst, run.dsm, run.csm, RngStream(5, 1)).sample.demand != rep.sample.demand);

  for (std::size_t i = 0; i < inst.size(); ++i) {
    CHECK(rep.sample.demand[i] == demand_draw(inst.retailers[i].demand, RngStream(5, 0), i));
  }

  CHECK(rep.expected.delta() == rep.expected.p_csm() - rep.expected.p_dsm());
  CHECK(rep.expected.p_dsm() == doctest::Approx(run.dsm.total_profit));
  CHECK(rep.expected.p_csm() == doctest::Approx(run.csm.expected_profit));
  CHECK(rep.expected.delta_revenue() - rep.expected.delta_transport() == doctest::Approx(rep.expected.delta()));

  double m1 = 0, m2 = 0, mu = 0, d = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    m1 += run.dsm.order_quantity[i] / inst.retailers[i].demand.mu();
    m2 += run.dsm.order_quantity[i] / rep.sample.demand[i];
    mu += inst.retailers[i].demand.mu();
    d += rep.sample.demand[i];
  }
  CHECK(rep.metrics.m1 == doctest::Approx(m1 / 15));
  CHECK(rep.metrics.m2 == doctest::Approx(m2 / 15));
  CHECK(rep.metrics.m3 == doctest::Approx(run.csm.q0 / mu));
  CHECK(rep.metrics.m4 == doctest::Approx(run.csm.q0 / d));
  CHECK(rep.metrics.m2_excluded == 0);
  CHECK(rep.metrics.m1 > 0);
  CHECK(rep.metrics.m3 > 0);
}

TEST_CASE("M1 is exactly one when orders equal means") {
  auto inst = generate_instance(5, 3);
  inst.transport.mode = TransportMode::Quantity;
  DsmSolution dsm = solve_dsm(inst);
  for (std::size_t i = 0; i < inst.size(); ++i) dsm.order_quantity[i] = inst.retailers[i].demand.mu();
  const auto csm = solve_csm(inst);
  const auto rep = simulate_realized(inst, dsm, csm, RngStream(1, 0));
  CHECK(rep.metrics.m1 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("zero realized demand is excluded from M2") {
  auto inst = generate_instance(3, 3);
  inst.transport.mode = TransportMode::Quantity;
  for (auto& r : inst.retailers) r.demand = NormalDist(1.0, 200.0);
  const auto dsm = solve_dsm(inst);
  const auto csm = solve_csm(inst);
  std::size_t excluded = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto rep = simulate_realized(inst, dsm, csm, RngStream(9, s));
    std::size_t zeros = 0;
    for (double x : rep.sample.demand) zeros += x == 0.0;
    CHECK(rep.metrics.m2_excluded == zeros);
    CHECK(std::isfinite(rep.metrics.m2));
    excluded += zeros;
  }
  CHECK(excluded > 0);
}

TEST_CASE("averaged realized profit converges to the expectation") {
  auto inst = generate_instance(6, 12);
  const auto run = run_comparison(inst, RngStream(2, 0));
  const auto avg = simulate_average(inst, run.dsm, run.csm, RngStream(31, 0), 20000);
  CHECK(avg.samples == 20000);
  CHECK(std::abs(avg.mean_dsm - run.dsm.total_profit) <= 4 * avg.stderr_dsm);
  CHECK(std::abs(avg.mean_csm - run.csm.expected_profit) <= 4 * avg.stderr_csm);
  CHECK_THROWS_AS(simulate_average(inst, run.dsm, run.csm, RngStream(31, 0), 0), ArgumentError);
}

TEST_CASE("sweep parameters and labels") {
  CHECK(parse_sweep_parameter("gamma") == SweepParameter::Gamma);
  CHECK(parse_sweep_parameter("MAP") == SweepParameter::MapSize);
  CHECK(parse_sweep_parameter("map_size") == SweepParameter::MapSize);
  CHECK(parse_sweep_parameter("rates") == SweepParameter::Rates);
  CHECK_THROWS_AS(parse_sweep_parameter("b"), ArgumentError);
  CHECK(SweepValue{0.1, 0}.label(SweepParameter::Gamma) == "0.1");
  CHECK(SweepValue{0.03, 0.05}.label(SweepParameter::Rates) == "0.03:0.05");

  const auto base = generate_instance(5, 8);
  auto r = apply_sweep_value(base, SweepParameter::Rates, {0.05, 0.04});
  CHECK(r.transport.trunk_rate == 0.05);
  CHECK(r.transport.last_rate == 0.04);
  CHECK(r.transport.direct_rate == 0.04);
  auto m = apply_sweep_value(base, SweepParameter::MapSize, {500, 0});
  CHECK(m.map_size == 500);
  CHECK(m.retailers[2].location.x == doctest::Approx(0.5 * base.retailers[2].location.x));
  CHECK(m.retailers[2].demand == base.retailers[2].demand);
  CHECK(apply_sweep_value(base, SweepParameter::Gamma, {0.6, 0}).econ.gamma == 0.6);
  CHECK_THROWS(apply_sweep_value(base, SweepParameter::Gamma, {1.5, 0}));
}

TEST_CASE("gamma sweep: rows, streams and monotone service levels") {
  const auto base = generate_instance(10, 1);
  std::vector<SweepValue> values;
  for (int k = 1; k <= 9; ++k) values.push_back({0.1 * k, 0});
  const auto rows = sweep(base, SweepParameter::Gamma, values, 4);
  REQUIRE(rows.size() == 9);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].run.report.metrics.m1 >= rows[k - 1].run.report.metrics.m1 - 1e-12);
    CHECK(rows[k].run.report.metrics.m3 >= rows[k - 1].run.report.metrics.m3 - 1e-9);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].run.report.stream_id == k);
    CHECK(rows[k].run.report.sample_seed == 4);
  }
  const auto again = sweep(base, SweepParameter::Gamma, values, 4);
  for (std::size_t k = 0; k < rows.size(); ++k) CHECK(again[k].run.report.realized.delta() == rows[k].run.report.realized.delta());
}

TEST_CASE("quantity-mode results do not depend on map scale") {
  auto base = generate_instance(8, 2);
  base.transport.mode = TransportMode::Quantity;
  const std::vector<SweepValue> values{{1000, 0}, {250, 0}, {4000, 0}};
  const auto rows = sweep(base, SweepParameter::MapSize, values, 1);
  for (const auto& r : rows) {
    CHECK(r.run.report.expected.p_dsm() == doctest::Approx(rows[0].run.report.expected.p_dsm()).epsilon(1e-13));
    CHECK(r.run.report.expected.p_csm() == doctest::Approx(rows[0].run.report.expected.p_csm()).epsilon(1e-13));
  }
}

TEST_CASE("a higher trunk rate narrows the CSM advantage") {
  const auto base = generate_instance(30, 1);
  const std::vector<SweepValue> values{{0.03, 0.05}, {0.05, 0.05}};
  const auto rows = sweep(base, SweepParameter::Rates, values, 1);
  CHECK(rows[1].run.report.expected.delta() < rows[0].run.report.expected.delta());
}
