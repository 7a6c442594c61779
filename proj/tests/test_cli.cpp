#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sftkms/config.hpp"

using namespace sftkms;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(SFTKMS_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buffer;
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    result.output.append(buffer.data(), n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "sftkms_cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

const char* kFullShiftConfig = R"({
  "system": {"k": 2, "transitions": [[1, 1], [1, 1]]},
  "potential": {"constant": 2.718281828459045},
  "seed": 17,
  "samples": {"algebra": 60, "kms_pairs": 150, "ground_pairs": 20}
})";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("solve reports the temperature and measure") {
  fs::path cfg = write_file("full2.json", kFullShiftConfig);
  RunResult r = run("solve --config " + cfg.string());
  REQUIRE(r.exit_code == 0);
  Json out = Json::parse(r.output);
  CHECK(std::abs(out["beta"].get<double>() - std::log(2.0)) < 1e-9);
  CHECK(out["measure"]["nu"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(out["status"] == "ok");
  CHECK(out["weights"]["01"].get<double>() == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("solve at an off-solution temperature exits 2") {
  Json cfg = Json::parse(kFullShiftConfig);
  cfg["beta"] = 1.0;
  fs::path p = write_file("full2_beta1.json", cfg.dump());
  RunResult r = run("solve --config " + p.string());
  CHECK(r.exit_code == 2);
  Json out = Json::parse(r.output);
  CHECK(out["status"] == "no_kms_state");
  CHECK(out["rho"].get<double>() == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("configuration failures exit 1") {
  fs::path dead = write_file("dead_row.json", R"({
    "system": {"k": 2, "transitions": [[1, 1], [0, 0]]},
    "potential": {"constant": 2.0}
  })");
  RunResult r = run("solve --config " + dead.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("RowDead") != std::string::npos);

  RunResult missing = run("solve --config " + (scratch_dir() / "nope.json").string());
  CHECK(missing.exit_code == 1);

  fs::path badword = write_file("bad_word.json", R"({
    "system": {"k": 2, "transitions": [[1, 1], [1, 0]]},
    "potential": {"depth": 2, "values": {"00": 2.0, "01": 2.0, "10": 2.0, "11": 2.0}}
  })");
  CHECK(run("solve --config " + badword.string()).exit_code == 1);

  // a potential at or below 1 cannot drive the dynamics
  fs::path low = write_file("low_potential.json", R"({
    "system": {"k": 2, "transitions": [[1, 1], [1, 1]]},
    "potential": {"constant": 1.0}
  })");
  CHECK(run("solve --config " + low.string()).exit_code == 1);

  // verify still runs the algebraic suites and skips the state suites
  RunResult v = run("verify --config " + low.string());
  CHECK(v.exit_code == 0);
  Json out = Json::parse(v.output);
  int skips = 0;
  for (const Json& s : out["suites"]) {
    CHECK(s["status"] != "fail");
    if (s["status"] == "skip") ++skips;
  }
  CHECK(skips > 0);
}

TEST_CASE("verify passes on the default system and honors stored measures") {
  fs::path cfg = write_file("full2.json", kFullShiftConfig);
  RunResult r = run("verify --config " + cfg.string());
  REQUIRE(r.exit_code == 0);
  Json out = Json::parse(r.output);
  CHECK(out["all_pass"] == true);

  // a corrupted kernel row makes the consistency suite fail (exit 3)
  fs::path solved = scratch_dir() / "solved.json";
  REQUIRE(run("solve --config " + cfg.string() + " --out " + solved.string()).exit_code == 0);
  Json stored = Json::parse(read_file(solved));
  stored["measure"]["kernel"][0][1] = 0.4;  // row sums 0.9
  fs::path corrupted = write_file("corrupted.json", stored.dump());
  RunResult bad = run("verify --config " + cfg.string() + " --measure " + corrupted.string());
  CHECK(bad.exit_code == 3);
  Json bad_out = Json::parse(bad.output);
  bool consistency_failed = false;
  for (const Json& s : bad_out["suites"])
    if (s["name"] == "measure_consistency") consistency_failed = s["status"] == "fail";
  CHECK(consistency_failed);
}

TEST_CASE("verify skips state suites on a non-primitive system") {
  fs::path cfg = write_file("loops.json", R"({
    "system": {"k": 2, "transitions": [[1, 0], [0, 1]]},
    "potential": {"constant": 2.0},
    "samples": {"algebra": 40, "kms_pairs": 50, "ground_pairs": 10}
  })");
  RunResult r = run("verify --config " + cfg.string());
  CHECK(r.exit_code == 0);  // skipped suites are not failures
  Json out = Json::parse(r.output);
  int skipped = 0;
  for (const Json& s : out["suites"]) {
    CHECK(s["status"] != "fail");
    if (s["status"] == "skip") {
      ++skipped;
      CHECK(s["note"].get<std::string>().find("primitive") != std::string::npos);
    }
  }
  CHECK(skipped > 0);
}

TEST_CASE("pressure emits a csv table over the sorted grid") {
  Json cfg = Json::parse(kFullShiftConfig);
  cfg["beta_grid"] = {1.0, 0.0, std::log(2.0)};  // descending/unsorted
  fs::path p = write_file("pressure.json", cfg.dump());
  RunResult r = run("pressure --config " + p.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("beta,rho,log_rho\n", 0) == 0);
  // three rows, ascending, with the closed-form pressures
  std::istringstream lines(r.output);
  std::string line;
  std::getline(lines, line);
  std::vector<std::array<double, 3>> rows;
  while (std::getline(lines, line) && !line.empty()) {
    std::array<double, 3> row{};
    sscanf(line.c_str(), "%lf,%lf,%lf", &row[0], &row[1], &row[2]);
    rows.push_back(row);
  }
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][2] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(std::abs(rows[1][2]) < 1e-10);
  CHECK(rows[2][2] == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-10));

  Json empty_grid = Json::parse(kFullShiftConfig);
  empty_grid["beta_grid"] = Json::array();
  fs::path pe = write_file("pressure_empty.json", empty_grid.dump());
  CHECK(run("pressure --config " + pe.string()).exit_code == 1);

  RunResult as_json = run("pressure --config " + p.string() + " --format json");
  REQUIRE(as_json.exit_code == 0);
  CHECK(Json::parse(as_json.output)["rows"].size() == 3);
}

TEST_CASE("eval computes the state on term lists") {
  fs::path cfg = write_file("full2.json", kFullShiftConfig);

  RunResult diag = run("eval --config " + cfg.string() +
                       R"( '{"terms": [{"a": 1, "n": 1, "m": 1, "b": 1}]}')");
  REQUIRE(diag.exit_code == 0);
  Json v = Json::parse(diag.output);
  CHECK(v["value"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(v["value"][1].get<double>() == doctest::Approx(0.0));
  CHECK_FALSE(v.contains("warning"));

  RunResult off = run("eval --config " + cfg.string() +
                      R"( '{"terms": [{"a": 1, "n": 1, "m": 0, "b": 1}]}')");
  REQUIRE(off.exit_code == 0);
  CHECK(Json::parse(off.output)["value"][0].get<double>() == 0.0);

  // a doubled unit is not a state probe
  RunResult doubled = run("eval --config " + cfg.string() +
                          R"( '{"terms": [{"a": 1, "n": 0, "m": 0, "b": 1},)"
                          R"({"a": 1, "n": 0, "m": 0, "b": 1}]}')");
  REQUIRE(doubled.exit_code == 0);
  Json d = Json::parse(doubled.output);
  CHECK(d["value"][0].get<double>() == doctest::Approx(2.0));
  CHECK(d["warning"] == "NotAState");

  // indicator values pass through the measure
  RunResult ind = run("eval --config " + cfg.string() +
                      R"( '{"terms": [{"a": {"depth": 1, "values": {"0": 1, "1": 0}},)"
                      R"( "n": 0, "m": 0, "b": 1}]}')");
  REQUIRE(ind.exit_code == 0);
  CHECK(Json::parse(ind.output)["value"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("solved measures round-trip through serialization") {
  fs::path cfg = write_file("full2.json", kFullShiftConfig);
  fs::path solved = scratch_dir() / "roundtrip.json";
  REQUIRE(run("solve --config " + cfg.string() + " --out " + solved.string()).exit_code == 0);

  // reload and compare against the in-process solution
  StoredState reloaded = state_from_json(Json::parse(read_file(solved)));
  IntMat t(2, 2);
  t << 1, 1, 1, 1;
  Sft f = Sft::make(2, t);
  CylFn h = CylFn::constant(f, 2.718281828459045);
  KmsSolution sol = std::get<KmsSolution>(kms_measure(f, h, bowen_solve(f, h).beta));
  Rng rng(5);
  for (int i = 0; i < 25; ++i) {
    CylFn a = random_cyl_fn(f, rng, 4, 3.0);
    CHECK(std::abs(reloaded.eval(a) - kms_state_eval(sol, a)) < 1e-14);
  }

  // evaluating through the stored measure matches the solved state
  RunResult ind = run("eval --config " + cfg.string() + " --measure " + solved.string() +
                      R"( '{"terms": [{"a": {"depth": 2, "values": {"00": 0, "01": 1, "10": 0,)"
                      R"( "11": 0}}, "n": 0, "m": 0, "b": 1}]}')");
  REQUIRE(ind.exit_code == 0);
  CHECK(Json::parse(ind.output)["value"][0].get<double>() == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("identical seeds produce byte-identical reports") {
  fs::path cfg = write_file("full2.json", kFullShiftConfig);
  fs::path out1 = scratch_dir() / "report1.json";
  fs::path out2 = scratch_dir() / "report2.json";
  REQUIRE(run("verify --config " + cfg.string() + " --seed 99 --out " + out1.string())
              .exit_code == 0);
  REQUIRE(run("verify --config " + cfg.string() + " --seed 99 --out " + out2.string())
              .exit_code == 0);
  std::string a = read_file(out1), b = read_file(out2);
  CHECK(a == b);
  CHECK_FALSE(a.empty());

  // different seed, different samples, still deterministic format
  fs::path out3 = scratch_dir() / "report3.json";
  REQUIRE(run("verify --config " + cfg.string() + " --seed 100 --out " + out3.string())
              .exit_code == 0);
  CHECK(read_file(out3) != a);
}
