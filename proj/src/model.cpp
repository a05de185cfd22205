#include "mlnv/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mlnv/errors.hpp"

namespace mlnv {
namespace {

using nlohmann::json;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool valid_cost(double x) { return std::isfinite(x) && x >= 0.0; }

// --- serialization helpers -------------------------------------------------

json point_json(const Point& p) { return {{"x", p.x}, {"y", p.y}}; }

const json& field(const json& j, const char* key, const std::string& path) {
  const std::string full = path.empty() ? key : path + "." + key;
  if (!j.is_object()) throw ParseError(path, "expected an object at '" + path + "'");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(full, "missing field '" + full + "'");
  return *it;
}

double number(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  const std::string full = path.empty() ? key : path + "." + key;
  if (!v.is_number()) throw ParseError(full, "field '" + full + "' must be a number");
  return v.get<double>();
}

Point point(const json& j, const char* key, const std::string& path) {
  const std::string full = path.empty() ? key : path + "." + key;
  const json& p = field(j, key, path);
  return {number(p, "x", full), number(p, "y", full)};
}

}  // namespace

double distance(const Point& a, const Point& b, double epsilon) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy + epsilon);
}

void EconomicParams::validate() const {
  for (double x : {s, w, c, v, b, gamma, supplier_fixed_cost}) {
    require(std::isfinite(x), "economic parameters must be finite");
  }
  require(s > c && c > v, "economics: require s > c > v");
  require(b > v, "economics: require b > v (fractile denominator)");
  require(c <= w && w <= s, "economics: require c <= w <= s");
  require(gamma > 0.0 && gamma < 1.0, "economics: require 0 < gamma < 1");
  require(supplier_fixed_cost >= 0.0, "economics: supplier fixed cost must be >= 0");
}

std::string_view to_string(TransportMode mode) {
  switch (mode) {
    case TransportMode::Quantity:
      return "QUANTITY";
    case TransportMode::Distance:
      return "DISTANCE";
    case TransportMode::QuantityDistance:
      return "QUANTITY_DISTANCE";
  }
  return "UNKNOWN";
}

TransportMode parse_transport_mode(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (upper == "QUANTITY" || upper == "Q") return TransportMode::Quantity;
  if (upper == "DISTANCE" || upper == "D") return TransportMode::Distance;
  if (upper == "QUANTITY_DISTANCE" || upper == "QD") return TransportMode::QuantityDistance;
  throw ArgumentError("unknown transport mode '" + std::string(text) + "'");
}

void TransportParams::validate() const {
  for (double x : {direct_fixed, direct_rate, trunk_fixed, trunk_rate, last_fixed, last_rate}) {
    require(valid_cost(x), "transport: fixed costs and rates must be finite and >= 0");
  }
}

void Instance::validate() const {
  require(!retailers.empty(), "instance: at least one retailer required");
  require(std::isfinite(map_size) && map_size > 0.0, "instance: map_size must be > 0");
  require(std::isfinite(epsilon) && epsilon > 0.0, "instance: epsilon must be > 0");
  econ.validate();
  transport.validate();
  auto on_map = [this](const Point& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
           p.x <= map_size && p.y <= map_size;
  };
  require(on_map(supplier_location), "instance: supplier outside the map");
  for (const auto& r : retailers) {
    require(on_map(r.location), "instance: retailer " + std::to_string(r.id) + " outside the map");
    require(valid_cost(r.fixed_cost), "instance: retailer fixed cost must be >= 0");
  }
}

double DemandSample::total() const {
  double sum = 0.0;
  for (double d : demand) sum += d;
  return sum;
}

void GenerationConfig::validate() const {
  require(demand_mean.lo <= demand_mean.hi, "config: demand mean range has lo > hi");
  require(demand_stdev.lo <= demand_stdev.hi, "config: demand stdev range has lo > hi");
  require(demand_stdev.lo > 0.0, "config: demand stdev must be > 0");
  require(std::isfinite(demand_mean.lo) && std::isfinite(demand_mean.hi) &&
              std::isfinite(demand_stdev.hi),
          "config: ranges must be finite");
  require(std::isfinite(map_size) && map_size > 0.0, "config: map size must be > 0");
  require(std::isfinite(epsilon) && epsilon > 0.0, "config: epsilon must be > 0");
  require(valid_cost(retailer_fixed_cost), "config: retailer fixed cost must be >= 0");
  econ.validate();
  transport.validate();
}

Instance generate_instance(std::size_t n, std::uint64_t seed, const GenerationConfig& config) {
  require(n >= 1, "generate_instance: n must be >= 1");
  config.validate();

  const RngStream rng(seed, 0);
  auto draw = [&rng](std::uint64_t index, const UniformRange& range) {
    return range.lo + rng.uniform(index) * (range.hi - range.lo);
  };
  const UniformRange map{0.0, config.map_size};

  Instance inst;
  inst.seed = seed;
  inst.map_size = config.map_size;
  inst.epsilon = config.epsilon;
  inst.econ = config.econ;
  inst.transport = config.transport;
  inst.supplier_location = {draw(0, map), draw(1, map)};
  inst.retailers.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t base = 2 + 4 * k;
    Retailer r;
    r.id = static_cast<int>(k + 1);
    r.location = {draw(base, map), draw(base + 1, map)};
    r.demand = NormalDist(draw(base + 2, config.demand_mean), draw(base + 3, config.demand_stdev));
    r.fixed_cost = config.retailer_fixed_cost;
    inst.retailers.push_back(r);
  }
  return inst;
}

Instance rescale_map(const Instance& inst, double new_map_size) {
  require(std::isfinite(new_map_size) && new_map_size > 0.0, "rescale_map: map size must be > 0");
  const double k = new_map_size / inst.map_size;
  Instance out = inst;
  out.map_size = new_map_size;
  out.supplier_location = {inst.supplier_location.x * k, inst.supplier_location.y * k};
  for (auto& r : out.retailers) r.location = {r.location.x * k, r.location.y * k};
  return out;
}

std::string serialize_instance(const Instance& inst) {
  json retailers = json::array();
  for (const auto& r : inst.retailers) {
    retailers.push_back({{"id", r.id},
                         {"location", point_json(r.location)},
                         {"demand", {{"mu", r.demand.mu()}, {"sigma", r.demand.sigma()}}},
                         {"fixed_cost", r.fixed_cost}});
  }
  const auto& e = inst.econ;
  const auto& t = inst.transport;
  json doc = {
      {"format_version", kInstanceFormatVersion},
      {"seed", inst.seed},
      {"map_size", inst.map_size},
      {"epsilon", inst.epsilon},
      {"supplier_location", point_json(inst.supplier_location)},
      {"econ",
       {{"s", e.s},
        {"w", e.w},
        {"c", e.c},
        {"v", e.v},
        {"b", e.b},
        {"gamma", e.gamma},
        {"supplier_fixed_cost", e.supplier_fixed_cost}}},
      {"transport",
       {{"mode", std::string(to_string(t.mode))},
        {"direct_fixed", t.direct_fixed},
        {"direct_rate", t.direct_rate},
        {"trunk_fixed", t.trunk_fixed},
        {"trunk_rate", t.trunk_rate},
        {"last_fixed", t.last_fixed},
        {"last_rate", t.last_rate}}},
      {"retailers", std::move(retailers)},
  };
  return doc.dump(2) + "\n";
}

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("instance file is not valid JSON: ") + e.what());
  }
  const json& version = field(doc, "format_version", "");
  if (!version.is_number_integer()) throw ParseError("format_version", "format_version must be an integer");
  if (version.get<int>() != kInstanceFormatVersion) {
    throw VersionError("unsupported instance format_version " + version.dump() + " (expected " +
                       std::to_string(kInstanceFormatVersion) + ")");
  }

  Instance inst;
  const json& seed = field(doc, "seed", "");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ParseError("seed", "field 'seed' must be a nonnegative integer");
  }
  inst.seed = seed.get<std::uint64_t>();
  inst.map_size = number(doc, "map_size", "");
  inst.epsilon = number(doc, "epsilon", "");
  inst.supplier_location = point(doc, "supplier_location", "");

  const json& econ = field(doc, "econ", "");
  inst.econ.s = number(econ, "s", "econ");
  inst.econ.w = number(econ, "w", "econ");
  inst.econ.c = number(econ, "c", "econ");
  inst.econ.v = number(econ, "v", "econ");
  inst.econ.b = number(econ, "b", "econ");
  inst.econ.gamma = number(econ, "gamma", "econ");
  inst.econ.supplier_fixed_cost = number(econ, "supplier_fixed_cost", "econ");

  const json& tr = field(doc, "transport", "");
  const json& mode = field(tr, "mode", "transport");
  if (!mode.is_string()) throw ParseError("transport.mode", "field 'transport.mode' must be a string");
  try {
    inst.transport.mode = parse_transport_mode(mode.get<std::string>());
  } catch (const ArgumentError& e) {
    throw ParseError("transport.mode", std::string("field 'transport.mode': ") + e.what());
  }
  inst.transport.direct_fixed = number(tr, "direct_fixed", "transport");
  inst.transport.direct_rate = number(tr, "direct_rate", "transport");
  inst.transport.trunk_fixed = number(tr, "trunk_fixed", "transport");
  inst.transport.trunk_rate = number(tr, "trunk_rate", "transport");
  inst.transport.last_fixed = number(tr, "last_fixed", "transport");
  inst.transport.last_rate = number(tr, "last_rate", "transport");

  const json& retailers = field(doc, "retailers", "");
  if (!retailers.is_array()) throw ParseError("retailers", "field 'retailers' must be an array");
  for (std::size_t k = 0; k < retailers.size(); ++k) {
    const std::string path = "retailers[" + std::to_string(k) + "]";
    const json& rj = retailers[k];
    Retailer r;
    const json& id = field(rj, "id", path);
    if (!id.is_number_integer()) throw ParseError(path + ".id", "field '" + path + ".id' must be an integer");
    r.id = id.get<int>();
    r.location = point(rj, "location", path);
    const json& dj = field(rj, "demand", path);
    const double mu = number(dj, "mu", path + ".demand");
    const double sigma = number(dj, "sigma", path + ".demand");
    try {
      r.demand = NormalDist(mu, sigma);
    } catch (const DomainError& e) {
      throw ParseError(path + ".demand.sigma", "field '" + path + ".demand.sigma': " + e.what());
    }
    r.fixed_cost = number(rj, "fixed_cost", path);
    inst.retailers.push_back(r);
  }
  return inst;
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << serialize_instance(inst);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

}  // namespace mlnv
