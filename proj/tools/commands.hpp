#pragma once

// Command-line front end. Each subcommand maps to one experiment and writes
// a CSV (or instance file) plus a JSON manifest next to it.

#include <array>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "mlnv/analysis.hpp"
#include "mlnv/csm.hpp"

namespace mlnv::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitSolverFailure = 1, kExitUsage = 2 };

/// Runs the tool on argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `<output>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& output);

// --- pieces shared with the tests -------------------------------------------

/// Inclusive arithmetic range; the end point is kept when it lies within
/// 1e-9 step of the last grid value.
std::vector<SweepValue> range_values(double from, double to, double step);
/// "0.1,0.2,0.3"
std::vector<SweepValue> parse_value_list(std::string_view text);
/// "0.03:0.05,0.05:0.05"
std::vector<SweepValue> parse_pair_list(std::string_view text);

CsvTable compare_table(const std::vector<ComparisonRun>& runs);

struct RetailerDcRow {
  ComparisonRun optimal;
  RetailerDcSolution constrained;
  ProfitBreakdown constrained_realized;
};

RetailerDcRow retailer_dc_row(const Instance& inst, const RngStream& rng, const QSearchOptions& options = {});
CsvTable retailer_dc_table(const Instance& inst, const RetailerDcRow& row);

CsvTable sweep_table(SweepParameter p, const std::vector<SweepRow>& rows);
/// Long format: parameter_value, series, value.
CsvTable sweep_long_table(SweepParameter p, const std::vector<SweepRow>& rows);

struct Theorem1Report {
  double value = 0.0;
  double expected = 0.0;  // 10 sqrt(2)
  bool checked = false;   // only the default direction is compared with the expected value
  bool pass = false;
  Matrix3 analytic{};
  Matrix3 finite_difference{};
  double fd_max_error = 0.0;  // max_ij |H - H_fd| / (1 + max |H|)
  bool fd_pass = false;
};

inline constexpr std::array<double, 3> kTheorem1Direction{-100.0, 1.0, 1.0};

/// Central-difference Hessian of the quantity-distance objective with step h.
Matrix3 finite_difference_hessian(const Theorem1Inputs& in, double h);

Theorem1Report verify_theorem1(const Theorem1Inputs& in, const std::array<double, 3>& z, double h = 1e-3);

/// Resolved instance configuration (everything except the retailer list).
nlohmann::json instance_config(const Instance& inst);

}  // namespace mlnv::cli
