#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spincat/cli.hpp"
#include "spincat/config.hpp"
#include "spincat/records_io.hpp"

using namespace spincat;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = constants::pi;
const double kLarmor = std::abs(constants::yb173_gamma * 1.24e-6);

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("spincat_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& f) const { return path / f; }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const TempDir& dir, const std::string& name, const json& doc) {
  const fs::path p = dir / name;
  write_text_file(p, doc.dump());
  return p;
}

json base_config() { return json{{"schema", 1}}; }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults mirror the experiment") {
  const RunConfig c = parse_config(R"({"schema": 1})");
  CHECK(c.two_f == 5);
  CHECK(c.cat_pulse().omega1 == doctest::Approx(constants::two_pi * 518.7));
  CHECK(c.cat_pulse().ratio() == -1.0);
  CHECK(c.css_pulse().omega1 == doctest::Approx(constants::two_pi * 285.0));
  CHECK(c.css_pulse().ratio() == -2.0);
  CHECK(c.zeeman.b_tesla == 1.24e-6);
  CHECK(c.gamma() == constants::yb173_gamma);
}

TEST_CASE("strict parsing names the offending key") {
  auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of(R"({})") == "schema");
  CHECK(key_of(R"({"schema": 2})") == "schema");
  CHECK(key_of(R"({"schema": 1, "colour": 3})") == "colour");
  CHECK(key_of(R"({"schema": 1, "noise": {"dephase": 0.1}})") == "noise.dephase");
  CHECK(key_of(R"({"schema": 1, "noise": {"leak_rate": -1}})") == "noise.leak_rate");
  CHECK(key_of(R"({"schema": 1, "sweep": {"tau_grid": [0, 2, 1]}})") == "sweep.tau_grid");
  CHECK(key_of(R"({"schema": 1, "spin": {"two_f": "five"}})") == "spin.two_f");
  CHECK(key_of(R"({"schema": 1, "control": {"ratio": -2}})") == "control.ratio");
  CHECK(key_of(R"({"schema": 1, "ensemble": {"dist": "lorentz"}})") == "ensemble.dist");
  CHECK(key_of(R"({"schema": 1, "output": {"format": "xml"}})") == "output.format");
  CHECK(key_of(R"({"schema": 1, "sweep": {"area_grid": {"start": 0, "stop": 1}}})") == "sweep.area_grid.count");
  CHECK(key_of(R"({"schema": 1,)") == "<root>");
}

TEST_CASE("grids from ranges") {
  const RunConfig c = parse_config(R"({"schema": 1, "sweep": {"tau_grid": {"start": 0, "stop": 2, "count": 5}}})");
  CHECK(c.sweep.tau_grid == std::vector<double>{0, 0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("resolved snapshot round-trips") {
  const RunConfig c = parse_config(R"({"schema": 1, "ensemble": {"dist": "gaussian", "rel_sigma": 0.1, "seed": 99},
      "noise": {"dephase_rate": 0.000714}, "measurement": {"n_atoms": 5000},
      "sensitivity": {"points": [{"tau_s": 160, "p_bar": 0.9, "contrast": 0.88}], "css_reference_t": 7e-10},
      "sweep": {"tau_grid": [0, 0.1, 0.30000000000000004]}})");
  const std::string snap = resolved_config_json(c);
  const RunConfig back = parse_config(snap);
  CHECK(resolved_config_json(back) == snap);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.sweep.tau_grid[2] == 0.30000000000000004);
  CHECK(*back.measurement.n_atoms == 5000);
}

}  // TEST_SUITE

TEST_SUITE("records_io") {

TEST_CASE("fringe CSV round trip is exact") {
  std::vector<FringeRecord> recs{{0.1, 1.0 / 3.0, 0.2, 1 - 1.0 / 3.0 - 0.2, std::nullopt},
                                 {0.30000000000000004, 1e-300, 0.5, 0.5, std::nullopt}};
  const auto back = parse_fringe_csv(fringe_records_csv(recs));
  REQUIRE(back.size() == 2);
  CHECK(back[0].p_plus == recs[0].p_plus);
  CHECK(back[1].tau == recs[1].tau);
  CHECK(back[1].p_plus == 1e-300);
  const auto json_back = parse_fringe_json(fringe_records_json(recs));
  CHECK(json_back[0].p_in == recs[0].p_in);

  recs[0].counts = AtomCounts{100, 30, 20};
  recs[1].counts = AtomCounts{100, 0, 50};
  const std::string csv = fringe_records_csv(recs);
  CHECK(csv.substr(0, csv.find('\n')) == "tau_s,p_plus,p_minus,p_in,n,n_plus,n_minus");
  CHECK(parse_fringe_csv(csv)[0].counts->n_plus == 30);
}

TEST_CASE("schema errors carry line and column") {
  try {
    parse_fringe_csv("tau_s,p_plus,p_minus\n0,0.1,0.2\n");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("p_in") != std::string::npos);
    CHECK(e.line() == 1);
  }
  try {
    parse_fringe_csv("tau_s,p_plus,p_minus,p_in\n0,0.1,0.2,0.7\n1,0.1,abc,0.7\n");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  try {
    parse_fringe_csv("tau_s,p_plus,p_minus,p_in\n0,0.1,0.2\n");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_fringe_csv(""), SchemaError);
  CHECK_THROWS_AS(parse_fringe_json("{\"tau_s\": 1}"), SchemaError);
}

TEST_CASE("double formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("rabi command") {
  TempDir dir("rabi");
  json cfg = base_config();
  std::vector<double> areas;
  for (int i = 0; i <= 16; ++i) areas.push_back(i * kPi / 8);
  cfg["sweep"] = {{"area_grid", areas}};
  const fs::path c = write_config(dir, "c.json", cfg);

  Run r = run({"rabi", "--config", c.string(), "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  const CsvTable t = parse_csv(read_text_file(dir / "rabi_cat.csv"));
  CHECK(t.column("p_plus")[4] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fs::exists(dir / "rabi_cat.meta.json"));
  CHECK(fs::exists(dir / "rabi_cat.config.json"));

  r = run({"rabi", "--config", c.string(), "--out", dir.path.string(), "--mode", "css"});
  REQUIRE(r.code == 0);
  const CsvTable q = parse_csv(read_text_file(dir / "rabi_css.csv"));
  for (std::size_t i = 0; i < areas.size(); i += 4) {
    CHECK(q.column("p_plus")[i] == doctest::Approx(std::pow(std::cos(areas[i] / 2), 10)).epsilon(1e-10));
  }

  const fs::path empty = write_config(dir, "empty.json", json{{"schema", 1}, {"sweep", {{"area_grid", json::array()}}}});
  r = run({"rabi", "--config", empty.string(), "--out", dir.path.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("sweep.area_grid") != std::string::npos);
}

TEST_CASE("ramsey, fit and determinism") {
  TempDir dir("ramsey");
  json cfg = base_config();
  cfg["sweep"] = {{"tau_grid", {{"start", 0.0}, {"stop", 0.3}, {"count", 61}}}};
  const fs::path c = write_config(dir, "c.json", cfg);

  Run r = run({"ramsey", "--config", c.string(), "--out", dir.path.string(), "--mode", "cat"});
  REQUIRE(r.code == 0);
  r = run({"fit", "--input", (dir / "ramsey_cat.csv").string(), "--model", "cosine", "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  const json fit = json::parse(read_text_file(dir / "fit_cosine.json"));
  CHECK(fit["converged"] == true);
  CHECK(fit["params"]["omega"]["value"].get<double>() / kLarmor == doctest::Approx(5.0).epsilon(1e-6));

  // Same config and seed give identical bytes; so does replaying the snapshot.
  const std::string first = read_text_file(dir / "ramsey_cat.csv");
  const std::string meta = read_text_file(dir / "ramsey_cat.meta.json");
  const fs::path snap = dir / "snap.json";
  fs::copy_file(dir / "ramsey_cat.config.json", snap);
  r = run({"ramsey", "--config", snap.string()});
  REQUIRE(r.code == 0);
  CHECK(read_text_file(dir / "ramsey_cat.csv") == first);
  CHECK(read_text_file(dir / "ramsey_cat.meta.json") == meta);
}

TEST_CASE("seeded counts are reproducible") {
  TempDir dir("counts");
  json cfg = base_config();
  cfg["sweep"] = {{"tau_grid", {0.0, 0.01, 0.02, 0.03}}};
  cfg["measurement"] = {{"n_atoms", 10000}};
  cfg["ensemble"] = {{"dist", "gaussian"}, {"n_samples", 50}};
  const fs::path c = write_config(dir, "c.json", cfg);
  REQUIRE(run({"ramsey", "--config", c.string(), "--out", (dir / "a").string(), "--seed", "5"}).code == 0);
  REQUIRE(run({"ramsey", "--config", c.string(), "--out", (dir / "b").string(), "--seed", "5"}).code == 0);
  REQUIRE(run({"ramsey", "--config", c.string(), "--out", (dir / "c").string(), "--seed", "6"}).code == 0);
  const std::string a = read_text_file(dir / "a/ramsey_cat.csv");
  CHECK(a == read_text_file(dir / "b/ramsey_cat.csv"));
  CHECK(a != read_text_file(dir / "c/ramsey_cat.csv"));
  CHECK(a.substr(0, a.find('\n')) == "tau_s,p_plus,p_minus,p_in,n,n_plus,n_minus");
}

TEST_CASE("css plateau and cat protection through the CLI") {
  TempDir dir("dfs");
  json cfg = base_config();
  cfg["sweep"] = {{"tau_grid", {40.0, 40.05, 40.1}}};
  cfg["ensemble"] = {{"dist", "gaussian"}, {"rel_sigma", 0.3}, {"policy", "quadrature"}};
  const fs::path c = write_config(dir, "c.json", cfg);
  REQUIRE(run({"ramsey", "--config", c.string(), "--out", dir.path.string(), "--mode", "css"}).code == 0);
  const CsvTable css = parse_csv(read_text_file(dir / "ramsey_css.csv"));
  for (std::size_t i = 0; i < css.rows; ++i) {
    CHECK(css.column("p_plus")[i] + css.column("p_minus")[i] == doctest::Approx(0.4922).epsilon(2e-4));
  }

  json spread = cfg;
  spread["ensemble"] = {{"dist", "gaussian"}, {"rel_sigma", 0.1}, {"n_samples", 300}};
  json none = cfg;
  none.erase("ensemble");
  REQUIRE(run({"ramsey", "--config", write_config(dir, "s.json", spread).string(), "--out", (dir / "s").string()}).code == 0);
  REQUIRE(run({"ramsey", "--config", write_config(dir, "n.json", none).string(), "--out", (dir / "n").string()}).code == 0);
  const CsvTable a = parse_csv(read_text_file(dir / "s/ramsey_cat.csv"));
  const CsvTable b = parse_csv(read_text_file(dir / "n/ramsey_cat.csv"));
  for (std::size_t i = 0; i < a.rows; ++i) CHECK(std::abs(a.column("p_plus")[i] - b.column("p_plus")[i]) < 1e-9);
}

TEST_CASE("sensitivity command") {
  TempDir dir("sens");
  json cfg = base_config();
  cfg["sensitivity"] = {{"points", {{{"tau_s", 160.0}, {"p_bar", 0.9}, {"contrast", 0.88}},
                                    {{"tau_s", 160.0}, {"p_bar", 1.0}, {"contrast", 1.0}}}},
                        {"css_reference_t", 0.70e-9}};
  const fs::path c = write_config(dir, "c.json", cfg);
  REQUIRE(run({"sensitivity", "--config", c.string(), "--out", dir.path.string()}).code == 0);
  const json doc = json::parse(read_text_file(dir / "sensitivity.json"));
  const json& p = doc["cat"][0];
  CHECK(std::abs(p["sigma_b_t"].get<double>() * 1e9 - 0.12) < 0.01);
  CHECK(p["hl_t"].get<double>() * 1e9 == doctest::Approx(0.10).epsilon(0.05));
  CHECK(p["sql_t"].get<double>() * 1e9 == doctest::Approx(0.22).epsilon(0.05));
  CHECK(std::abs(p["enhancement_db"].get<double>() - 15.0) < 1.0);
  CHECK(doc["cat"][1]["sigma_b_t"].get<double>() == doctest::Approx(doc["cat"][1]["hl_t"].get<double>()));

  const fs::path bare = write_config(dir, "bare.json", base_config());
  CHECK(run({"sensitivity", "--config", bare.string(), "--out", dir.path.string()}).code == 1);

  json sim = base_config();
  sim["noise"] = {{"dephase_rate", 1.0 / 1400.0}};
  sim["sweep"] = {{"tau_grid", {160.0}}};
  sim["sensitivity"] = {{"simulate", true}};
  REQUIRE(run({"sensitivity", "--config", write_config(dir, "sim.json", sim).string(), "--out", dir.path.string()}).code == 0);
  const json sd = json::parse(read_text_file(dir / "sensitivity.json"));
  const double contrast = sd["cat"][0]["contrast"].get<double>();
  CHECK(contrast < 1.0);
  CHECK(contrast > 0.5);
  CHECK(sd["cat"][0]["p_bar"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("wigner command") {
  TempDir dir("wigner");
  const fs::path c = write_config(dir, "c.json", json{{"schema", 1}, {"wigner", {{"n_theta", 24}, {"n_phi", 40}}}});
  for (const char* state : {"cat", "mixture"}) {
    REQUIRE(run({"wigner", "--config", c.string(), "--out", dir.path.string(), "--state", state}).code == 0);
    const json meta = json::parse(read_text_file(dir / (std::string("wigner_") + state + ".meta.json")));
    CHECK(meta["min"].get<double>() < 0.0);
  }
  REQUIRE(run({"wigner", "--config", c.string(), "--out", dir.path.string(), "--state", "mixed"}).code == 0);
  const CsvTable t = parse_csv(read_text_file(dir / "wigner_mixed.csv"));
  for (double w : t.column("w")) CHECK(w == doctest::Approx(1 / (4 * kPi)).epsilon(1e-12));
  CHECK(run({"wigner", "--config", c.string(), "--out", dir.path.string(), "--state", "squeezed"}).code == 1);
}

TEST_CASE("fit command errors and decay fits") {
  TempDir dir("fit");
  write_text_file(dir / "bad.csv", "tau_s,p_plus,p_minus\n0,0.1,0.2\n");
  Run r = run({"fit", "--input", (dir / "bad.csv").string(), "--out", dir.path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("p_in") != std::string::npos);

  std::ostringstream csv;
  csv << "tau_s,value\n";
  for (int i = 0; i <= 40; ++i) {
    const double t = 5.0 * i;
    csv << format_double(t) << ',' << format_double(0.1 * std::exp(-t / 8.0) + 0.9 * std::exp(-t / 1400.0)) << '\n';
  }
  write_text_file(dir / "contrast.csv", csv.str());
  r = run({"fit", "--input", (dir / "contrast.csv").string(), "--model", "double_exponential", "--out",
           dir.path.string()});
  REQUIRE(r.code == 0);
  const json fit = json::parse(read_text_file(dir / "fit_double_exponential.json"));
  CHECK(fit["params"]["time_constant_slow"]["value"].get<double>() == doctest::Approx(1400.0).epsilon(0.02));

  CHECK(run({"fit", "--input", (dir / "contrast.csv").string(), "--model", "spline"}).code == 1);
  CHECK(run({"fit"}).code == 1);
  CHECK(run({"launch"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

}  // TEST_SUITE
