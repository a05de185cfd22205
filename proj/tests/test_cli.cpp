#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "csv.hpp"
#include "mlnv/model.hpp"

using namespace mlnv;
using namespace mlnv::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mlnv");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "mlnv_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string gen_instance(const std::string& name, const std::vector<std::string>& extra = {}) {
  const auto path = (scratch() / name).string();
  std::vector<std::string> args{"gen", "--n", "10", "--seed", "42", "--out", path};
  args.insert(args.end(), extra.begin(), extra.end());
  REQUIRE(invoke(args).code == kExitOk);
  return path;
}

}  // namespace

TEST_CASE("csv formatting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(money(1234.5678) == "1234.57");
  CHECK(money(-0.001) == "0.00");
  CHECK(ratio(1.0 / 3.0) == "0.333333");
  CHECK(optional_number(std::nullopt).empty());
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  CHECK(t.str() == "a,b\n1,\"x,y\"\n");
  CHECK_THROWS_AS(t.add_row({"1"}), std::invalid_argument);
}

TEST_CASE("value lists") {
  auto r = range_values(0.1, 0.9, 0.1);
  REQUIRE(r.size() == 9);
  CHECK(r.back().value == doctest::Approx(0.9));
  CHECK(parse_value_list("0.1,0.25, 0.5").size() == 3);
  const auto p = parse_pair_list("0.03:0.05,0.05:0.05");
  REQUIRE(p.size() == 2);
  CHECK(p[0].value == 0.03);
  CHECK(p[0].second == 0.05);
  CHECK(parse_value_list("").empty());
  CHECK_THROWS(parse_pair_list("0.03"));
  CHECK_THROWS(range_values(0.1, 0.9, 0.0));
}

TEST_CASE("gen is deterministic and writes a manifest") {
  const auto a = gen_instance("a.json");
  const auto b = gen_instance("b.json");
  CHECK(slurp(a) == slurp(b));
  CHECK(fs::exists(manifest_path(a)));
  const auto manifest = nlohmann::json::parse(slurp(manifest_path(a)));
  CHECK(manifest["command"] == "gen");
  CHECK(manifest["tool"].is_string());
  CHECK(manifest["version"] == std::string(kToolVersion));
  CHECK(manifest.contains("started_at"));
  CHECK(manifest.contains("durations_ms"));

  const auto res = invoke({"gen", "--n", "3", "--out", (scratch() / "warn.json").string()});
  CHECK(res.code == 0);
  CHECK(res.err.find("b") != std::string::npos);
  CHECK(res.out.find("\"b\"") != std::string::npos);
}

TEST_CASE("gen rejects bad arguments") {
  CHECK(invoke({"gen", "--n", "0", "--out", (scratch() / "zero.json").string()}).code == kExitUsage);
  CHECK(invoke({"gen", "--n", "5"}).code == kExitUsage);
  CHECK(invoke({"gen", "--n", "5", "--gamma", "1.5", "--out", (scratch() / "g.json").string()}).code == kExitUsage);
  CHECK(invoke({"gen", "--n", "5", "--mode", "TELEPORT", "--out", (scratch() / "m.json").string()}).code ==
        kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("gen on a 200-mile map keeps coordinates inside it") {
  const auto path = (scratch() / "map200.json").string();
  REQUIRE(invoke({"gen", "--n", "100", "--map", "200", "--out", path}).code == 0);
  const auto inst = load_instance(path);
  CHECK(inst.map_size == 200);
  for (const auto& r : inst.retailers) {
    CHECK(r.location.x <= 200.0);
    CHECK(r.location.y <= 200.0);
  }
}

TEST_CASE("compare output and determinism") {
  const auto inst = gen_instance("cmp.json");
  const auto out1 = (scratch() / "cmp1.csv").string();
  const auto out2 = (scratch() / "cmp2.csv").string();
  REQUIRE(invoke({"compare", inst, "--steps", "50", "--out", out1}).code == 0);
  REQUIRE(invoke({"compare", inst, "--steps", "50", "--out", out2}).code == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(fs::exists(manifest_path(out1)));

  const auto rows = parse_csv(slurp(out1));
  REQUIRE(rows.size() == 2);
  const std::vector<std::string> header{"n",   "P_DSM",          "M1",             "M2",  "P_CSM", "M3",
                                        "M4",  "delta_expected", "delta_realized", "Q_0", "dc_x",  "dc_y"};
  CHECK(rows[0] == header);
  CHECK(rows[1][0] == "10");
  CHECK_FALSE(rows[1][10].empty());

  const auto q = invoke({"compare", inst, "--mode", "QUANTITY"});
  REQUIRE(q.code == 0);
  const auto qrows = parse_csv(q.out);
  REQUIRE(qrows.size() == 2);
  CHECK(qrows[1].size() == 12);
  CHECK(qrows[1][10].empty());
  CHECK(qrows[1][11].empty());

  CHECK(invoke({"compare", inst, "--mode", "SOMETIMES"}).code == kExitUsage);
  CHECK(invoke({"compare", (scratch() / "missing.json").string()}).code == kExitUsage);
}

TEST_CASE("compare accepts several instances") {
  const auto a = gen_instance("several_a.json");
  const auto path = (scratch() / "several_b.json").string();
  REQUIRE(invoke({"gen", "--n", "20", "--seed", "42", "--out", path}).code == 0);
  const auto res = invoke({"compare", a, path, "--steps", "40"});
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2][0] == "20");
}

TEST_CASE("retailer-dc") {
  const auto inst = gen_instance("rdc.json");
  const auto res = invoke({"retailer-dc", inst, "--steps", "50"});
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == 15);
  CHECK(rows[0][7] == "separation");
  const auto idx = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(rows[0].begin(), rows[0].end(), name) - rows[0].begin());
  };
  CHECK(std::stod(rows[1][idx("delta_expected")]) >= 0.0);
  CHECK(std::stod(rows[1][idx("separation")]) >= 0.0);
  CHECK(invoke({"retailer-dc", inst, "--mode", "QUANTITY"}).code == kExitUsage);
}

TEST_CASE("sweep") {
  const auto inst = gen_instance("sw.json");
  const auto out = (scratch() / "gamma.csv").string();
  REQUIRE(invoke({"sweep", inst, "--param", "gamma", "--from", "0.1", "--to", "0.9", "--step", "0.1", "--steps",
                  "40", "--out", out})
              .code == 0);
  const auto rows = parse_csv(slurp(out));
  CHECK(rows.size() == 10);
  CHECK(rows[1][1] == "0.1");
  CHECK(rows[9][1] == "0.9");
  const auto long_path = (scratch() / "gamma_long.csv").string();
  REQUIRE(fs::exists(long_path));
  const auto long_rows = parse_csv(slurp(long_path));
  CHECK(long_rows[0] == std::vector<std::string>{"parameter_value", "series", "value"});
  CHECK(long_rows.size() == 1 + 9 * 10);

  const auto pairs = invoke({"sweep", inst, "--param", "rates", "--pairs", "0.03:0.05,0.05:0.05", "--steps", "40"});
  REQUIRE(pairs.code == 0);
  const auto prow = parse_csv(pairs.out);
  REQUIRE(prow.size() == 3);
  CHECK(prow[1][1] == "0.03:0.05");
  CHECK(prow[2][1] == "0.05:0.05");

  CHECK(invoke({"sweep", inst, "--param", "gamma", "--values", ""}).code == kExitUsage);
  CHECK(invoke({"sweep", inst, "--param", "gamma"}).code == kExitUsage);
  CHECK(invoke({"sweep", inst, "--param", "gamma", "--pairs", "0.1:0.2"}).code == kExitUsage);
  CHECK(invoke({"sweep", inst, "--param", "speed", "--values", "1"}).code == kExitUsage);
  CHECK(invoke({"sweep", inst, "--param", "gamma", "--values", "0.2,1.4"}).code == kExitUsage);
}

TEST_CASE("verify-theorem1") {
  auto res = invoke({"verify-theorem1"});
  CHECK(res.code == 0);
  CHECK(res.out.find("14.14213") != std::string::npos);
  CHECK(res.out.find("PASS") != std::string::npos);

  res = invoke({"verify-theorem1", "--z", "0,0,0"});
  CHECK(res.code == 0);
  CHECK(res.out.find("z^T H z = 0.000000000") != std::string::npos);
  CHECK(res.out.find("informational") != std::string::npos);

  const auto moved = verify_theorem1([] {
    Theorem1Inputs in;
    in.retailer = {620, 410};
    return in;
  }(), kTheorem1Direction);
  CHECK_FALSE(moved.checked);
  CHECK(moved.fd_pass);
  CHECK(moved.value != doctest::Approx(10 * std::sqrt(2.0)));

  const auto base = verify_theorem1(Theorem1Inputs{}, kTheorem1Direction);
  CHECK(base.pass);
  CHECK(std::abs(base.value - 10 * std::sqrt(2.0)) < 1e-6);
  CHECK(invoke({"verify-theorem1", "--z", "1,2"}).code == kExitUsage);
}

TEST_CASE("the installed binary runs") {
  const std::string cmd = std::string("\"") + MLNV_CLI_PATH + "\" verify-theorem1 > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string bad = std::string("\"") + MLNV_CLI_PATH + "\" gen --n 0 --out /dev/null > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
