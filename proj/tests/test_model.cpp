#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mlnv/errors.hpp"
#include "mlnv/model.hpp"

using namespace mlnv;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mlnv_test_model_" + name);
}

}  // namespace

TEST_CASE("distance examples") {
  CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(distance({1, 1}, {1, 1}, 1e-9) == doctest::Approx(3.162e-5).epsilon(1e-3));
  CHECK(std::abs(distance({100, 100}, {500, 500}) - 565.685) < 1e-3);
  CHECK(distance({2, 7}, {9, -3}, 0.5) == distance({9, -3}, {2, 7}, 0.5));
  CHECK(distance({2, 7}, {2, 7}, 0.25) >= std::sqrt(0.25));
}

TEST_CASE("triangle inequality on random triples") {
  const RngStream rng(17, 0);
  for (int k = 0; k < 1000; ++k) {
    const Point a{1000 * rng.uniform(6 * k), 1000 * rng.uniform(6 * k + 1)};
    const Point b{1000 * rng.uniform(6 * k + 2), 1000 * rng.uniform(6 * k + 3)};
    const Point c{1000 * rng.uniform(6 * k + 4), 1000 * rng.uniform(6 * k + 5)};
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
  }
}

TEST_CASE("economic parameter validation") {
  EconomicParams e;
  CHECK_NOTHROW(e.validate());
  auto bad = [](auto mutate) {
    EconomicParams x;
    mutate(x);
    return x;
  };
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.c = 250; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.v = 60; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.gamma = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.gamma = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.w = 40; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.w = 210; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.b = 10; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](EconomicParams& x) { x.supplier_fixed_cost = -1; }).validate(), ConfigError);
}

TEST_CASE("transport mode names") {
  for (auto m : {TransportMode::Quantity, TransportMode::Distance, TransportMode::QuantityDistance}) {
    CHECK(parse_transport_mode(to_string(m)) == m);
  }
  CHECK(parse_transport_mode("qd") == TransportMode::QuantityDistance);
  CHECK(parse_transport_mode("Quantity") == TransportMode::Quantity);
  CHECK(parse_transport_mode("d") == TransportMode::Distance);
  CHECK_THROWS_AS(parse_transport_mode("volume"), ArgumentError);
  TransportParams t;
  t.trunk_rate = -0.1;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("generate_instance is deterministic and respects the data ranges") {
  const auto a = generate_instance(10, 42);
  const auto b = generate_instance(10, 42);
  CHECK(a == b);
  CHECK(serialize_instance(a) == serialize_instance(b));
  CHECK(a.seed == 42);
  CHECK(generate_instance(10, 43) != a);

  const auto big = generate_instance(100, 7);
  REQUIRE(big.size() == 100);
  for (std::size_t i = 0; i < big.size(); ++i) {
    const auto& r = big.retailers[i];
    CHECK(r.id == static_cast<int>(i + 1));
    CHECK(r.demand.mu() >= 100.0);
    CHECK(r.demand.mu() <= 200.0);
    CHECK(r.demand.sigma() >= 10.0);
    CHECK(r.demand.sigma() <= 20.0);
    CHECK(r.location.x >= 0.0);
    CHECK(r.location.x <= 1000.0);
    CHECK(r.location.y >= 0.0);
    CHECK(r.location.y <= 1000.0);
    CHECK(r.fixed_cost == 0.0);
  }
  CHECK(big.supplier_location.x >= 0.0);
  CHECK(big.supplier_location.x <= 1000.0);
  CHECK_NOTHROW(big.validate());

  const auto& t = big.transport;
  CHECK(t.trunk_fixed == 200.0);
  CHECK(t.last_fixed == 100.0);
  CHECK(t.trunk_rate == 0.3);
  CHECK(t.last_rate == 0.5);
  CHECK(big.econ.s == 200.0);
  CHECK(big.econ.c == 50.0);
  CHECK(big.econ.v == 20.0);
  CHECK(big.econ.gamma == 0.3);
}

TEST_CASE("smaller instances are prefixes of larger ones") {
  const auto small = generate_instance(10, 5);
  const auto large = generate_instance(40, 5);
  CHECK(small.supplier_location == large.supplier_location);
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small.retailers[i] == large.retailers[i]);
}

TEST_CASE("single-retailer instance and bad configurations") {
  const auto one = generate_instance(1, 3);
  CHECK(one.size() == 1);
  CHECK_NOTHROW(one.validate());
  CHECK_THROWS_AS(generate_instance(0, 3), ConfigError);

  GenerationConfig cfg;
  cfg.demand_mean = {200.0, 100.0};
  CHECK_THROWS_AS(generate_instance(5, 1, cfg), ConfigError);
  cfg = {};
  cfg.demand_stdev = {-1.0, 5.0};
  CHECK_THROWS_AS(generate_instance(5, 1, cfg), ConfigError);
  cfg = {};
  cfg.map_size = 0.0;
  CHECK_THROWS_AS(generate_instance(5, 1, cfg), ConfigError);
}

TEST_CASE("instances generated on a smaller map stay inside it") {
  GenerationConfig cfg;
  cfg.map_size = 200.0;
  const auto inst = generate_instance(100, 11, cfg);
  for (const auto& r : inst.retailers) {
    CHECK(r.location.x <= 200.0);
    CHECK(r.location.y <= 200.0);
  }
}

TEST_CASE("rescale_map") {
  const auto inst = generate_instance(20, 9);
  const auto half = rescale_map(inst, 500.0);
  CHECK(half.map_size == 500.0);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    CHECK(half.retailers[i].location.x == doctest::Approx(0.5 * inst.retailers[i].location.x));
    CHECK(half.retailers[i].demand == inst.retailers[i].demand);
  }
  CHECK(half.supplier_location.y == doctest::Approx(0.5 * inst.supplier_location.y));
  CHECK_THROWS(rescale_map(inst, -1.0));
}

TEST_CASE("instance validation") {
  auto inst = generate_instance(3, 1);
  inst.retailers[1].location.x = 1001.0;
  CHECK_THROWS_AS(inst.validate(), ConfigError);
  inst = generate_instance(3, 1);
  inst.epsilon = 0.0;
  CHECK_THROWS_AS(inst.validate(), ConfigError);
  inst = generate_instance(3, 1);
  inst.retailers.clear();
  CHECK_THROWS_AS(inst.validate(), ConfigError);
  inst = generate_instance(3, 1);
  inst.retailers[0].fixed_cost = -5.0;
  CHECK_THROWS_AS(inst.validate(), ConfigError);
}

TEST_CASE("save and load roundtrip") {
  auto inst = generate_instance(25, 1234567890123ULL);
  inst.retailers[3].fixed_cost = 12.5;
  inst.econ.supplier_fixed_cost = 7.25;
  inst.transport.mode = TransportMode::Distance;
  const auto path = temp_file("roundtrip.json");
  save_instance(inst, path);
  const auto back = load_instance(path);
  CHECK(back == inst);
  CHECK(back.seed == 1234567890123ULL);
  std::filesystem::remove(path);
}

TEST_CASE("n = 100 instance loads quickly") {
  const auto inst = generate_instance(100, 1);
  const auto path = temp_file("big.json");
  save_instance(inst, path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto back = load_instance(path);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(back == inst);
  CHECK(s < 1.0);
  std::filesystem::remove(path);
}

TEST_CASE("parse errors name the offending field") {
  const auto inst = generate_instance(2, 1);
  auto doc = nlohmann::json::parse(serialize_instance(inst));

  auto expect_field = [](const nlohmann::json& d, const std::string& field) {
    try {
      parse_instance(d.dump());
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.field() == field);
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };

  auto missing = doc;
  missing.erase("retailers");
  expect_field(missing, "retailers");

  auto wrong = doc;
  wrong["retailers"][0]["demand"]["mu"] = "lots";
  expect_field(wrong, "retailers[0].demand.mu");

  auto bad_sigma = doc;
  bad_sigma["retailers"][1]["demand"]["sigma"] = -3.0;
  expect_field(bad_sigma, "retailers[1].demand.sigma");

  auto bad_mode = doc;
  bad_mode["transport"]["mode"] = "TELEPORT";
  expect_field(bad_mode, "transport.mode");

  CHECK_THROWS_AS(parse_instance("{not json"), ParseError);

  auto version = doc;
  version["format_version"] = 2;
  CHECK_THROWS_AS(parse_instance(version.dump()), VersionError);

  CHECK_THROWS(load_instance(temp_file("does_not_exist.json")));
}
