#pragma once

// Supply-chain network description: one supplier, n retailers with normal
// demand, economics and a transport-cost mode. Money in dollars, distances
// in miles, demand in units.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mlnv/stochastics.hpp"

namespace mlnv {

inline constexpr int kInstanceFormatVersion = 1;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Euclidean distance smoothed as sqrt(dx^2 + dy^2 + epsilon).
double distance(const Point& a, const Point& b, double epsilon = 0.0);

struct Retailer {
  int id = 0;  // 1-based; the supplier is index 0
  Point location;
  NormalDist demand{0.0, 1.0};
  double fixed_cost = 0.0;
  friend bool operator==(const Retailer&, const Retailer&) = default;
};

struct EconomicParams {
  double s = 200.0;  // selling price
  double w = 100.0;  // wholesale price (only splits profit between parties)
  double c = 50.0;   // supplier unit cost
  double v = 20.0;   // salvage value
  double b = 200.0;  // shortage cost
  double gamma = 0.3;
  double supplier_fixed_cost = 0.0;  // K_0

  /// Throws ConfigError unless s > c > v, b > v, c <= w <= s, 0 < gamma < 1.
  void validate() const;
  friend bool operator==(const EconomicParams&, const EconomicParams&) = default;
};

enum class TransportMode { Quantity, Distance, QuantityDistance };

std::string_view to_string(TransportMode mode);
/// Accepts QUANTITY, DISTANCE, QUANTITY_DISTANCE (case-insensitive) and the
/// short forms q, d, qd. Throws ArgumentError otherwise.
TransportMode parse_transport_mode(std::string_view text);

// Rates are per unit (Quantity), per mile (Distance) or per unit-mile
// (QuantityDistance). Fixed terms are charged once per shipment leg.
struct TransportParams {
  TransportMode mode = TransportMode::QuantityDistance;
  double direct_fixed = 100.0;  // supplier -> retailer (decentralized)
  double direct_rate = 0.5;
  double trunk_fixed = 200.0;   // supplier -> DC
  double trunk_rate = 0.3;
  double last_fixed = 100.0;    // DC -> retailer
  double last_rate = 0.5;

  void validate() const;
  friend bool operator==(const TransportParams&, const TransportParams&) = default;
};

struct Instance {
  Point supplier_location;
  std::vector<Retailer> retailers;
  EconomicParams econ;
  TransportParams transport;
  double epsilon = 1e-9;  // distance smoothing, mi^2
  double map_size = 1000.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return retailers.size(); }
  /// Throws ConfigError on any violated invariant.
  void validate() const;
  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Realized demand, one entry per retailer.
struct DemandSample {
  std::vector<double> demand;
  double total() const;
};

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const UniformRange&, const UniformRange&) = default;
};

// Defaults reproduce the experimental data setting, with the shortage cost b
// (not given there) set to the selling price and w to the midpoint of c and s.
struct GenerationConfig {
  UniformRange demand_mean{100.0, 200.0};
  UniformRange demand_stdev{10.0, 20.0};
  double map_size = 1000.0;
  double retailer_fixed_cost = 0.0;
  double epsilon = 1e-9;
  EconomicParams econ;
  TransportParams transport;

  void validate() const;
  friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

/// Pure function of (n, seed, config). The supplier is drawn first, then the
/// retailers in id order, so a smaller instance is a prefix of a larger one
/// generated from the same seed.
Instance generate_instance(std::size_t n, std::uint64_t seed, const GenerationConfig& config = {});

/// Scales every coordinate and the map by new_map_size / map_size.
Instance rescale_map(const Instance& inst, double new_map_size);

std::string serialize_instance(const Instance& inst);
/// Throws ParseError naming the offending field, or VersionError.
Instance parse_instance(std::string_view text);

void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

}  // namespace mlnv
