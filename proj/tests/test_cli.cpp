#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "dpnls/cli.hpp"
#include "oracles.hpp"

using namespace dpnls;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dpnls_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

fs::path write_config(const fs::path& dir, const json& j) {
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 2.2250738585072014e-308}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(1.0) == "1.0000000000000000e+00");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("csv and json round trip") {
  const fs::path dir = scratch("io");
  fs::create_directories(dir);
  CsvTable t{{"a", "b"}, {}};
  t.add_row({format_double(1.5), format_double(-2e-300)});
  t.add_row({"nan", "inf"});
  write_csv(dir / "t.csv", t);
  const CsvTable back = read_csv(dir / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.numeric_column("b")[0] == -2e-300);
  CHECK(std::isnan(back.numeric_column("a")[1]));
  CHECK_THROWS(t.add_row({"1"}));

  write_json(dir / "d.json", {{"x", 0.1}});
  const json j = read_json(dir / "d.json");
  CHECK(j["x"].get<double>() == 0.1);
  CHECK(j["format_version"] == kFormatVersion);

  ShootingConfig s;
  s.r_max = 123.0;
  CHECK(shooting_from_json(to_json(s)).r_max == 123.0);
  const ModelParams m{2, 1.5, 3.25, 0.125};
  const ModelParams m2 = params_from_json(to_json(m));
  CHECK(m2.dim == 2);
  CHECK(m2.q == 3.25);
}

TEST_CASE("config resolution") {
  const json d = cli::default_config();
  CHECK(d["format_version"] == kFormatVersion);
  const json s = cli::resolve_config(std::string("strong-instability"), std::nullopt);
  CHECK(s["model"]["q"] == 5.0);
  CHECK(s["evolution"]["lambda"] == 1.1);
  CHECK(s["shooting"] == d["shooting"]);
  for (const auto& name : cli::preset_names()) CHECK_NOTHROW(cli::resolve_config(name, std::nullopt));

  const fs::path dir = scratch("cfg");
  CHECK_THROWS(cli::resolve_config(std::nullopt, write_config(dir, {{"model", {{"r", 1}}}})));
  CHECK_THROWS(cli::resolve_config(std::nullopt, write_config(dir, {{"model", {{"p", "three"}}}})));
  CHECK_THROWS(cli::resolve_config(std::nullopt, write_config(dir, {{"format_version", 99}})));
}

TEST_CASE("groundstate command") {
  const fs::path a = scratch("gs_a"), b = scratch("gs_b");
  REQUIRE(run({"groundstate", "--out", a.string()}) == cli::kExitOk);
  REQUIRE(run({"groundstate", "--out", b.string()}) == cli::kExitOk);
  const json rep = read_json(a / "report.json");
  CHECK(std::abs(rep["amplitude"].get<double>() - oracle::kAmp135) < 1e-7);
  CHECK(rep["pohozaev_K_ok"] == true);
  for (const char* f : {"profile.csv", "profile.meta.json", "report.json"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const json ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  CHECK(ma["config_hash"] == mb["config_hash"]);
  CHECK(ma["outputs"].size() == 3);
  CHECK(read_csv(a / "profile.csv").numeric_column("r").front() == 0.0);
  CHECK_FALSE(fs::exists(a / ".lock"));
}

TEST_CASE("validation failures exit 3 with an error document") {
  const fs::path dir = scratch("bad");
  const fs::path cfg = write_config(scratch("bad_cfg"), {{"model", {{"p", 3.0}, {"q", 2.0}}}});
  CHECK(run({"groundstate", "--config", cfg.string(), "--out", dir.string()}) == cli::kExitValidation);
  const json e = read_json(dir / "error.json");
  CHECK(e["message"] == "q must exceed p");
  CHECK(e["exit_code"] == 3);

  CHECK(run({"groundstate"}) == cli::kExitValidation);
  CHECK(run({"nonsense"}) == cli::kExitValidation);
  CHECK(run({"groundstate", "--preset", "nope", "--out", dir.string()}) == cli::kExitValidation);

  const fs::path empty = write_config(scratch("empty_cfg"), {{"stability", {{"pq_grid", json::array()}}}});
  CHECK(run({"stability-map", "--config", empty.string(), "--out", scratch("empty").string()}) ==
        cli::kExitValidation);
}

TEST_CASE("a locked directory is refused") {
  const fs::path dir = scratch("locked");
  fs::create_directories(dir);
  std::ofstream(dir / ".lock") << "";
  CHECK(run({"groundstate", "--out", dir.string()}) == cli::kExitValidation);
  CHECK_FALSE(fs::exists(dir / "profile.csv"));
}

TEST_CASE("stability map in the plane") {
  const fs::path dir = scratch("map2");
  const fs::path cfg =
      write_config(scratch("map2_cfg"), {{"stability", {{"dim", 2}, {"pq_grid", {{1.5, 2.5}, {2.0, 2.8}}}}}});
  REQUIRE(run({"stability-map", "--config", cfg.string(), "--out", dir.string()}) == cli::kExitOk);
  const json r = read_json(dir / "regions.json");
  CHECK(r["p_threshold"].get<double>() == doctest::Approx(2.0));
  for (const auto& pt : r["boundary"]) CHECK(pt[1].get<double>() == doctest::Approx(4.0 - pt[0].get<double>()));
  CHECK(read_csv(dir / "sweep.csv").rows.size() == 2);
}

TEST_CASE("zero-mass command with one frequency") {
  const fs::path dir = scratch("zm");
  const fs::path cfg = write_config(scratch("zm_cfg"), {{"zero_mass", {{"omega_sequence", {0.1}}}}});
  REQUIRE(run({"zero-mass", "--config", cfg.string(), "--out", dir.string()}) == cli::kExitOk);
  const CsvTable t = read_csv(dir / "limit.csv");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][t.column("status")] == "ok");
}

TEST_CASE("short stationary evolution") {
  const fs::path dir = scratch("ev");
  const fs::path cfg = write_config(
      scratch("ev_cfg"),
      {{"evolution", {{"t_end", 0.2}, {"diagnostics_every", 20}, {"snapshot_times", {0.1}}}}});
  REQUIRE(run({"evolve", "--preset", "stationary", "--config", cfg.string(), "--out", dir.string(), "--plot-data"}) ==
          cli::kExitOk);
  const json s = read_json(dir / "summary.json");
  CHECK(s["outcome"] == "orbit preserved");
  CHECK(read_csv(dir / "diag.csv").rows.size() == 11);
  CHECK(fs::exists(dir / "snapshots/snapshot_000.csv"));
  CHECK(fs::exists(dir / "plot_data.csv"));
}

TEST_CASE("defaults command writes parseable JSON") {
  std::ostringstream out, err;
  REQUIRE(cli::run({"defaults"}, out, err) == cli::kExitOk);
  CHECK(json::parse(out.str()) == cli::default_config());
}
