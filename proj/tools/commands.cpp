#include "commands.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "mlnv/errors.hpp"

namespace mlnv::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

// Phase timings and bookkeeping for one command.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args) : started_(utc_now()) {
    doc_["tool"] = "mlnv";
    doc_["version"] = std::string(kToolVersion);
    doc_["command"] = std::move(command);
    doc_["arguments"] = json::array();
    for (std::size_t k = 1; k < args.size(); ++k) doc_["arguments"].push_back(args[k]);
    doc_["outputs"] = json::array();
  }

  json& operator[](const char* key) { return doc_[key]; }

  template <class F>
  auto timed(const char* phase, F&& body) {
    const auto t0 = Clock::now();
    auto finish = [&] {
      durations_[phase] += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      finish();
    } else {
      auto r = body();
      finish();
      return r;
    }
  }

  void add_output(const std::filesystem::path& p) { doc_["outputs"].push_back(p.string()); }

  void write(const std::filesystem::path& output) {
    doc_["started_at"] = started_;
    doc_["finished_at"] = utc_now();
    doc_["durations_ms"] = durations_;
    std::ofstream f(manifest_path(output), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest for '" + output.string() + "'");
    f << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::string started_;
  std::map<std::string, double> durations_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string coord(const std::optional<Point>& p, bool x) {
  if (!p) return {};
  return money(x ? p->x : p->y);
}

std::vector<double> split_numbers(std::string_view text, char sep, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(sep, pos);
    const auto piece = std::string(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (piece.empty() || used != piece.size() || !std::isfinite(v)) {
      throw UsageError(fmt::format("invalid number '{}' in {}", piece, what));
    }
    out.push_back(v);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

ProfitBreakdown realized_for(const Instance& inst, const CsmSolution& sol, const DemandSample& sample) {
  return csm_realized_profit(inst, sol, sample);
}

// --- subcommands -------------------------------------------------------------

struct GenFlags {
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::optional<double> map, s, w, c, v, b, gamma, epsilon;
  std::optional<double> trunk_rate, last_rate, direct_rate, trunk_fixed, last_fixed, direct_fixed;
  std::string mode = "QUANTITY_DISTANCE";
  std::string out;
};

int cmd_gen(const GenFlags& f, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Manifest manifest("gen", args);
  GenerationConfig cfg;
  if (f.map) cfg.map_size = *f.map;
  if (f.epsilon) cfg.epsilon = *f.epsilon;
  auto& e = cfg.econ;
  if (f.s) e.s = *f.s;
  if (f.w) e.w = *f.w;
  if (f.c) e.c = *f.c;
  if (f.v) e.v = *f.v;
  if (f.b) e.b = *f.b;
  if (f.gamma) e.gamma = *f.gamma;
  auto& t = cfg.transport;
  t.mode = parse_transport_mode(f.mode);
  if (f.trunk_rate) t.trunk_rate = *f.trunk_rate;
  if (f.last_rate) t.last_rate = *f.last_rate;
  if (f.direct_rate) t.direct_rate = *f.direct_rate;
  if (f.trunk_fixed) t.trunk_fixed = *f.trunk_fixed;
  if (f.last_fixed) t.last_fixed = *f.last_fixed;
  if (f.direct_fixed) t.direct_fixed = *f.direct_fixed;
  cfg.validate();

  const Instance inst = manifest.timed("generate", [&] { return generate_instance(f.n, f.seed, cfg); });
  const std::filesystem::path path = f.out;
  manifest.timed("write", [&] { write_text(path, serialize_instance(inst)); });

  if (!f.b) {
    err << fmt::format("warning: shortage cost b is not part of the data specification; defaulted to b = {}"
                       " (override with --b)\n",
                       e.b);
  }
  const json config = instance_config(inst);
  out << "resolved configuration:\n" << config.dump(2) << '\n';
  if (!f.w) out << fmt::format("note: wholesale price w defaulted to {}\n", e.w);

  manifest["config"] = config;
  manifest["seeds"] = {{"instance", f.seed}};
  manifest["b_defaulted"] = !f.b;
  manifest["w_defaulted"] = !f.w;
  manifest.add_output(path);
  manifest.write(path);
  return kExitOk;
}

struct CompareFlags {
  std::vector<std::string> instances;
  std::optional<std::string> mode;
  std::uint64_t sample_seed = 1;
  std::size_t steps = 200;
  std::string out;
};

Instance load_with_mode(const std::string& path, const std::optional<std::string>& mode) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("instance file '" + path + "' not found");
  Instance inst = load_instance(path);
  if (mode) inst.transport.mode = parse_transport_mode(*mode);
  return inst;
}

void emit(const CsvTable& table, const std::string& out_path, Manifest& manifest, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    table.write(out);
    return;
  }
  const std::filesystem::path path = out_path;
  manifest.timed("write", [&] { write_text(path, table.str()); });
  manifest.add_output(path);
  manifest.write(path);
  out << fmt::format("wrote {} ({} rows)\n", path.string(), table.rows());
}

int cmd_compare(const CompareFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("compare", args);
  QSearchOptions options;
  options.steps = f.steps;
  std::vector<ComparisonRun> runs;
  json configs = json::array();
  json seeds = json::array();
  for (std::size_t k = 0; k < f.instances.size(); ++k) {
    const Instance inst = manifest.timed("load", [&] { return load_with_mode(f.instances[k], f.mode); });
    configs.push_back(instance_config(inst));
    seeds.push_back(inst.seed);
    runs.push_back(manifest.timed("solve", [&] { return run_comparison(inst, RngStream(f.sample_seed, k), options); }));
  }
  manifest["config"] = configs;
  manifest["seeds"] = {{"instances", seeds}, {"sample_seed", f.sample_seed}, {"stream_ids", "row index"}};
  manifest["q_search_steps"] = f.steps;
  emit(compare_table(runs), f.out, manifest, out);
  return kExitOk;
}

struct RetailerDcFlags {
  std::string instance;
  std::optional<std::string> mode;
  std::uint64_t sample_seed = 1;
  std::size_t steps = 200;
  std::string out;
};

int cmd_retailer_dc(const RetailerDcFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("retailer-dc", args);
  const Instance inst = manifest.timed("load", [&] { return load_with_mode(f.instance, f.mode); });
  if (inst.transport.mode == TransportMode::Quantity) {
    throw UsageError("retailer-dc needs a transport mode with a DC location");
  }
  QSearchOptions options;
  options.steps = f.steps;
  const auto row = manifest.timed("solve", [&] { return retailer_dc_row(inst, RngStream(f.sample_seed, 0), options); });
  manifest["config"] = instance_config(inst);
  manifest["seeds"] = {{"instance", inst.seed}, {"sample_seed", f.sample_seed}, {"stream_id", 0}};
  emit(retailer_dc_table(inst, row), f.out, manifest, out);
  return kExitOk;
}

struct SweepFlags {
  std::string instance;
  std::string param;
  std::optional<double> from, to, step;
  std::optional<std::string> values, pairs;
  std::optional<std::string> mode;
  std::uint64_t sample_seed = 1;
  std::size_t steps = 200;
  std::string out;
  std::string long_out;
};

int cmd_sweep(const SweepFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("sweep", args);
  SweepParameter p;
  try {
    p = parse_sweep_parameter(f.param);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }

  const int sources = (f.from || f.to || f.step ? 1 : 0) + (f.values ? 1 : 0) + (f.pairs ? 1 : 0);
  if (sources != 1) throw UsageError("give exactly one of --from/--to/--step, --values or --pairs");
  std::vector<SweepValue> values;
  if (f.values) {
    values = parse_value_list(*f.values);
  } else if (f.pairs) {
    values = parse_pair_list(*f.pairs);
  } else {
    if (!f.from || !f.to || !f.step) throw UsageError("--from, --to and --step go together");
    values = range_values(*f.from, *f.to, *f.step);
  }
  if (values.empty()) throw UsageError("sweep needs at least one value");
  if ((p == SweepParameter::Rates) != static_cast<bool>(f.pairs)) {
    throw UsageError(p == SweepParameter::Rates ? "rates sweeps take --pairs trunk:retail,..."
                                                : "--pairs is only valid with --param rates");
  }

  const Instance base = manifest.timed("load", [&] { return load_with_mode(f.instance, f.mode); });
  QSearchOptions options;
  options.steps = f.steps;
  const auto rows = manifest.timed("solve", [&] { return sweep(base, p, values, f.sample_seed, options); });

  manifest["config"] = instance_config(base);
  manifest["parameter"] = std::string(to_string(p));
  json vals = json::array();
  for (const auto& v : values) vals.push_back(v.label(p));
  manifest["values"] = vals;
  manifest["seeds"] = {{"instance", base.seed}, {"sample_seed", f.sample_seed}, {"stream_ids", "row index"}};

  const auto table = sweep_table(p, rows);
  const auto long_table = sweep_long_table(p, rows);
  if (f.out.empty() || f.out == "-") {
    table.write(out);
    return kExitOk;
  }
  std::filesystem::path long_path = f.long_out;
  if (long_path.empty()) {
    long_path = f.out;
    long_path.replace_extension();
    long_path += "_long.csv";
  }
  manifest.timed("write", [&] { write_text(long_path, long_table.str()); });
  manifest.add_output(long_path);
  emit(table, f.out, manifest, out);
  out << fmt::format("wrote {} ({} rows)\n", long_path.string(), long_table.rows());
  return kExitOk;
}

struct TheoremFlags {
  std::optional<std::string> z;
  std::optional<std::string> retailer;
  double h = 1e-3;
};

int cmd_verify_theorem1(const TheoremFlags& f, std::ostream& out) {
  Theorem1Inputs in;
  std::array<double, 3> z = kTheorem1Direction;
  if (f.z) {
    const auto v = split_numbers(*f.z, ',', "--z");
    if (v.size() != 3) throw UsageError("--z takes three comma-separated numbers");
    z = {v[0], v[1], v[2]};
  }
  if (f.retailer) {
    const auto v = split_numbers(*f.retailer, ',', "--retailer");
    if (v.size() != 2) throw UsageError("--retailer takes x,y");
    in.retailer = {v[0], v[1]};
  }
  if (!(f.h > 0.0)) throw UsageError("--fd-step must be > 0");

  const auto t0 = Clock::now();
  const auto rep = verify_theorem1(in, z, f.h);
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  out << fmt::format("direction z = ({}, {}, {})\n", z[0], z[1], z[2]);
  out << fmt::format("retailer at ({}, {}), DC at ({}, {}), Q_0 = {}\n", in.retailer.x, in.retailer.y, in.dc.x,
                     in.dc.y, in.q0);
  out << fmt::format("z^T H z = {:.9f}\n", rep.value);
  if (rep.checked) {
    out << fmt::format("expected 10*sqrt(2) = {:.9f}: {}\n", rep.expected, rep.pass ? "PASS" : "FAIL");
  } else {
    out << "non-default geometry or direction: value is informational\n";
  }
  out << fmt::format("finite-difference Hessian (h = {}): max scaled deviation {:.3e}: {}\n", f.h,
                     rep.fd_max_error, rep.fd_pass ? "PASS" : "FAIL");
  for (int i = 0; i < 3; ++i) {
    out << fmt::format("  H[{}] = [{:+.6e} {:+.6e} {:+.6e}]   fd = [{:+.6e} {:+.6e} {:+.6e}]\n", i,
                       rep.analytic[i][0], rep.analytic[i][1], rep.analytic[i][2], rep.finite_difference[i][0],
                       rep.finite_difference[i][1], rep.finite_difference[i][2]);
  }
  out << fmt::format("elapsed {:.3f} ms\n", ms);
  return (rep.checked && !rep.pass) || !rep.fd_pass ? kExitSolverFailure : kExitOk;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

std::vector<SweepValue> range_values(double from, double to, double step) {
  if (!(step > 0.0) || !std::isfinite(from) || !std::isfinite(to)) {
    throw UsageError("range needs finite bounds and step > 0");
  }
  std::vector<SweepValue> out;
  if (to < from) return out;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    // Rounded to 12 significant digits so 0.1 + 2*0.1 prints as 0.3.
    const double v = std::stod(fmt::format("{:.12g}", from + static_cast<double>(k) * step));
    out.push_back({v, 0.0});
  }
  return out;
}

std::vector<SweepValue> parse_value_list(std::string_view text) {
  if (text.empty()) return {};
  std::vector<SweepValue> out;
  for (double v : split_numbers(text, ',', "--values")) out.push_back({v, 0.0});
  return out;
}

std::vector<SweepValue> parse_pair_list(std::string_view text) {
  if (text.empty()) return {};
  std::vector<SweepValue> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(',', pos);
    const auto piece = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    const auto v = split_numbers(piece, ':', "--pairs");
    if (v.size() != 2) throw UsageError(fmt::format("pair '{}' must look like trunk:retail", piece));
    out.push_back({v[0], v[1]});
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

CsvTable compare_table(const std::vector<ComparisonRun>& runs) {
  CsvTable t({"n", "P_DSM", "M1", "M2", "P_CSM", "M3", "M4", "delta_expected", "delta_realized", "Q_0", "dc_x",
              "dc_y"});
  for (const auto& r : runs) {
    const auto& rep = r.report;
    t.add_row({std::to_string(r.dsm.order_quantity.size()), money(rep.expected.p_dsm()), ratio(rep.metrics.m1),
               ratio(rep.metrics.m2), money(rep.expected.p_csm()), ratio(rep.metrics.m3), ratio(rep.metrics.m4),
               money(rep.expected.delta()), money(rep.realized.delta()), money(r.csm.q0),
               coord(r.csm.dc_location, true), coord(r.csm.dc_location, false)});
  }
  return t;
}

RetailerDcRow retailer_dc_row(const Instance& inst, const RngStream& rng, const QSearchOptions& options) {
  RetailerDcRow row;
  row.optimal = run_comparison(inst, rng, options);
  row.constrained = retailer_as_dc(inst, row.optimal.csm);
  row.constrained_realized = realized_for(inst, row.constrained.solution, row.optimal.report.sample);
  return row;
}

CsvTable retailer_dc_table(const Instance& inst, const RetailerDcRow& row) {
  CsvTable t({"n", "Q_0", "dc_x", "dc_y", "retailer_id", "retailer_x", "retailer_y", "separation", "Q_0_retailer",
              "P_CSM", "P_CSM_retailer", "delta_expected", "R_CSM", "R_CSM_retailer", "delta_realized"});
  const auto& opt = row.optimal.csm;
  const auto& con = row.constrained.solution;
  const double realized_opt = row.optimal.report.realized.p_csm();
  const double realized_con = row.constrained_realized.total();
  t.add_row({std::to_string(inst.size()), money(opt.q0), coord(opt.dc_location, true), coord(opt.dc_location, false),
             std::to_string(row.constrained.retailer_id), coord(con.dc_location, true),
             coord(con.dc_location, false), money(row.constrained.separation), money(con.q0),
             money(opt.expected_profit), money(con.expected_profit), money(opt.expected_profit - con.expected_profit),
             money(realized_opt), money(realized_con), money(realized_opt - realized_con)});
  return t;
}

namespace {

struct Series {
  const char* name;
  double (*get)(const ComparisonRun&);
  bool is_money;
};

const Series kSeries[] = {
    {"P_DSM", [](const ComparisonRun& r) { return r.report.expected.p_dsm(); }, true},
    {"P_CSM", [](const ComparisonRun& r) { return r.report.expected.p_csm(); }, true},
    {"delta", [](const ComparisonRun& r) { return r.report.expected.delta(); }, true},
    {"delta_revenue", [](const ComparisonRun& r) { return r.report.expected.delta_revenue(); }, true},
    {"delta_transport", [](const ComparisonRun& r) { return r.report.expected.delta_transport(); }, true},
    {"transport_DSM", [](const ComparisonRun& r) { return r.report.expected.dsm.transport; }, true},
    {"transport_CSM", [](const ComparisonRun& r) { return r.report.expected.csm.transport; }, true},
    {"M1", [](const ComparisonRun& r) { return r.report.metrics.m1; }, false},
    {"M3", [](const ComparisonRun& r) { return r.report.metrics.m3; }, false},
    {"delta_realized", [](const ComparisonRun& r) { return r.report.realized.delta(); }, true},
};

}  // namespace

CsvTable sweep_table(SweepParameter p, const std::vector<SweepRow>& rows) {
  std::vector<std::string> header{"parameter", "value"};
  for (const auto& s : kSeries) header.emplace_back(s.name);
  header.insert(header.end(), {"Q_0", "dc_x", "dc_y"});
  CsvTable t(std::move(header));
  for (const auto& row : rows) {
    std::vector<std::string> cells{std::string(to_string(p)), row.value.label(p)};
    for (const auto& s : kSeries) cells.push_back(s.is_money ? money(s.get(row.run)) : ratio(s.get(row.run)));
    cells.push_back(money(row.run.csm.q0));
    cells.push_back(coord(row.run.csm.dc_location, true));
    cells.push_back(coord(row.run.csm.dc_location, false));
    t.add_row(std::move(cells));
  }
  return t;
}

CsvTable sweep_long_table(SweepParameter p, const std::vector<SweepRow>& rows) {
  CsvTable t({"parameter_value", "series", "value"});
  for (const auto& row : rows) {
    for (const auto& s : kSeries) {
      t.add_row({row.value.label(p), s.name, s.is_money ? money(s.get(row.run)) : ratio(s.get(row.run))});
    }
  }
  return t;
}

Matrix3 finite_difference_hessian(const Theorem1Inputs& in, double h) {
  const Instance inst = in.as_instance();
  const std::array<double, 3> x0{in.q0, in.dc.x, in.dc.y};
  auto f = [&](std::array<double, 3> x) { return csm_case3_objective(inst, x[0], {x[1], x[2]}).profit; };
  Matrix3 H{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      auto at = [&](double si, double sj) {
        auto x = x0;
        x[i] += si * h;
        x[j] += sj * h;
        return f(x);
      };
      H[i][j] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      H[j][i] = H[i][j];
    }
  }
  return H;
}

Theorem1Report verify_theorem1(const Theorem1Inputs& in, const std::array<double, 3>& z, double h) {
  Theorem1Report rep;
  rep.expected = 10.0 * std::sqrt(2.0);
  rep.value = hessian_quadratic_form(in, z);
  const Theorem1Inputs defaults;
  rep.checked = z == kTheorem1Direction && in.retailer.x == defaults.retailer.x && in.retailer.y == defaults.retailer.y;
  rep.pass = rep.checked && std::abs(rep.value - rep.expected) <= 1e-6;
  rep.analytic = profit_hessian(in);
  rep.finite_difference = finite_difference_hessian(in, h);
  double scale = 0.0;
  for (const auto& r : rep.analytic)
    for (double v : r) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      rep.fd_max_error =
          std::max(rep.fd_max_error, std::abs(rep.analytic[i][j] - rep.finite_difference[i][j]) / (1.0 + scale));
  rep.fd_pass = rep.fd_max_error <= 1e-3;
  return rep;
}

nlohmann::json instance_config(const Instance& inst) {
  json j = json::parse(serialize_instance(inst));
  j.erase("retailers");
  j["n"] = inst.size();
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-location newsvendor: decentralized versus centralized distribution", "mlnv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  GenFlags gen;
  auto* g = app.add_subcommand("gen", "generate a random instance");
  g->add_option("--n", gen.n, "number of retailers")->required()->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  g->add_option("--seed", gen.seed, "instance seed")->capture_default_str();
  g->add_option("--map", gen.map, "side of the square map in miles");
  g->add_option("--s", gen.s, "retail price");
  g->add_option("--w", gen.w, "wholesale price");
  g->add_option("--c", gen.c, "production cost");
  g->add_option("--v", gen.v, "salvage value");
  g->add_option("--b", gen.b, "shortage cost");
  g->add_option("--gamma", gen.gamma, "service-level floor in (0,1)");
  g->add_option("--epsilon", gen.epsilon, "distance smoothing (square miles)");
  g->add_option("--mode", gen.mode, "QUANTITY | DISTANCE | QUANTITY_DISTANCE")->capture_default_str();
  g->add_option("--trunk-rate", gen.trunk_rate, "supplier-to-DC rate");
  g->add_option("--last-rate", gen.last_rate, "DC-to-retailer rate");
  g->add_option("--direct-rate", gen.direct_rate, "supplier-to-retailer rate");
  g->add_option("--trunk-fixed", gen.trunk_fixed, "supplier-to-DC fixed cost");
  g->add_option("--last-fixed", gen.last_fixed, "DC-to-retailer fixed cost");
  g->add_option("--direct-fixed", gen.direct_fixed, "supplier-to-retailer fixed cost");
  g->add_option("--out", gen.out, "instance file")->required();

  CompareFlags cmp;
  auto* c = app.add_subcommand("compare", "solve both systems and compare expected and realized profit");
  c->add_option("instances", cmp.instances, "instance files")->required();
  c->add_option("--mode", cmp.mode, "override the instance's transport mode");
  c->add_option("--sample-seed", cmp.sample_seed, "demand sample seed")->capture_default_str();
  c->add_option("--steps", cmp.steps, "Q-search grid points")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  c->add_option("--out", cmp.out, "CSV output (stdout when omitted)");

  RetailerDcFlags rdc;
  auto* r = app.add_subcommand("retailer-dc", "optimal DC versus the nearest retailer as DC");
  r->add_option("instance", rdc.instance, "instance file")->required();
  r->add_option("--mode", rdc.mode, "override the instance's transport mode");
  r->add_option("--sample-seed", rdc.sample_seed, "demand sample seed")->capture_default_str();
  r->add_option("--steps", rdc.steps, "Q-search grid points")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  r->add_option("--out", rdc.out, "CSV output (stdout when omitted)");

  SweepFlags sw;
  auto* s = app.add_subcommand("sweep", "re-solve both systems across parameter values");
  s->add_option("instance", sw.instance, "instance file")->required();
  s->add_option("--param", sw.param, "gamma | map_size | rates")->required();
  s->add_option("--from", sw.from, "range start");
  s->add_option("--to", sw.to, "range end (inclusive)");
  s->add_option("--step", sw.step, "range step");
  s->add_option("--values", sw.values, "comma-separated values");
  s->add_option("--pairs", sw.pairs, "comma-separated trunk:retail rate pairs");
  s->add_option("--mode", sw.mode, "override the instance's transport mode");
  s->add_option("--sample-seed", sw.sample_seed, "demand sample seed")->capture_default_str();
  s->add_option("--steps", sw.steps, "Q-search grid points")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  s->add_option("--out", sw.out, "CSV output (stdout when omitted)");
  s->add_option("--long-out", sw.long_out, "long-format CSV (default <out>_long.csv)");

  TheoremFlags th;
  auto* v = app.add_subcommand("verify-theorem1", "evaluate the Hessian witness of non-concavity");
  v->add_option("--z", th.z, "direction as q,x,y (default -100,1,1)");
  v->add_option("--retailer", th.retailer, "move the retailer to x,y");
  v->add_option("--fd-step", th.h, "finite-difference step")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen, args, out, err);
    if (*c) return cmd_compare(cmp, args, out);
    if (*r) return cmd_retailer_dc(rdc, args, out);
    if (*s) return cmd_sweep(sw, args, out);
    if (*v) return cmd_verify_theorem1(th, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const SingularityError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const VersionError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {  // ArgumentError, ConfigError
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitUsage;
}

}  // namespace mlnv::cli
