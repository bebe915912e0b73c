#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "critfield/config.hpp"
#include "critfield/output.hpp"
#include "critfield/types.hpp"

using namespace critfield;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("critfield_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("parse a configuration file") {
  const auto cfg = parse_config(R"(# study
[field]
amplitude = gaussian(2)
m = 2

[study]
R = 4, 8 ,16
trials = 50   # inline comment
test_function = bump(0.25)
)");
  CHECK(cfg.amplitude == "gaussian(2)");
  CHECK(cfg.m == 2);
  CHECK(cfg.R == std::vector<double>{4, 8, 16});
  CHECK(cfg.trials == 50);
  CHECK(cfg.test_function == "bump(0.25)");
  CHECK(cfg.n_mc == 200000);
}

TEST_CASE("configuration errors list every offending key") {
  try {
    parse_config("[field]\nm = 2\ncolour = red\n[study]\ntrials = -3\nspeed = 9\n[nowhere]\nx = 1\n");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    const std::string w = e.what();
    CHECK(w.find("colour") != std::string::npos);
    CHECK(w.find("speed") != std::string::npos);
    CHECK(w.find("nowhere") != std::string::npos);
    CHECK(w.find("line 3") != std::string::npos);
  }
  ExperimentConfig c;
  CHECK_THROWS_AS(c.set("study.bogus", "1"), Error);
  CHECK_THROWS_AS(c.set("study.trials", "many"), Error);
  c.m = 7;
  c.trials = 0;
  try {
    c.validate();
    FAIL("expected a validation error");
  } catch (const Error& e) {
    const std::string w = e.what();
    CHECK(w.find("field.m") != std::string::npos);
    CHECK(w.find("study.trials") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/critfield.cfg"), Error);
}

TEST_CASE("config echo and hash") {
  ExperimentConfig a, b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.out_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.seed = 2;
  CHECK(a.hash() != b.hash());

  // The echo round-trips through the parser.
  std::string text, section;
  for (const auto& [k, v] : a.echo()) {
    const auto dot = k.find('.');
    if (k.substr(0, dot) != section) {
      section = k.substr(0, dot);
      text += "[" + section + "]\n";
    }
    text += k.substr(dot + 1) + " = " + v + "\n";
  }
  CHECK(parse_config(text).hash() == a.hash());
  a.set("study.R", "8, 16");
  CHECK(a.R == std::vector<double>{8, 16});
  a.set("field.modes", "3");
  CHECK(a.modes == 3);
}

TEST_CASE("hashes") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("csv rendering") {
  Table t{"demo", {"a", "b"}, {{1.0, 0.1}, {NAN, INFINITY}}, {}};
  const std::string csv = render_csv(t, "stats", "0123456789abcdef");
  CHECK(csv.rfind("# critfield stats config_hash=0123456789abcdef\na,b\n", 0) == 0);
  CHECK(csv.find("0.10000000000000001") != std::string::npos);
  CHECK(csv.find("nan") != std::string::npos);
  Table s{"seeded", {"x"}, {{2.0}}, {18446744073709551615ull}};
  CHECK(render_csv(s, "crit", "h").find("seed,x\n18446744073709551615,2\n") != std::string::npos);
}

TEST_CASE("write and verify outputs") {
  ExperimentConfig cfg;
  Report rep;
  rep.command = "stats";
  rep.tables.push_back(Table{"one", {"x", "y"}, {{1, 2}, {3, 4}}, {}});
  rep.tables.push_back(Table{"two", {"z"}, {{5}}, {7}});
  rep.scalar("answer", 42.0);
  rep.notes.push_back("note");
  const fs::path dir = scratch("verify");
  const auto files = write_report(rep, cfg, dir.string());
  CHECK(files.size() == 3);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(verify_outputs(dir.string()).empty());
  const std::string manifest = read_file(dir / "manifest.json");
  CHECK(manifest.find(cfg.hash()) != std::string::npos);
  CHECK(manifest.find("\"answer\"") != std::string::npos);

  std::ofstream(dir / "one.csv", std::ios::app) << "9,9\n";
  const auto problems = verify_outputs(dir.string());
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("one.csv") != std::string::npos);

  fs::remove(dir / "two.csv");
  CHECK(verify_outputs(dir.string()).size() == 2);
  CHECK_FALSE(verify_outputs((dir / "missing").string()).empty());
  fs::remove_all(dir);
}

TEST_CASE("report helpers") {
  Report rep;
  rep.command = "kr-one";
  rep.scalar("C_m", 0.275);
  CHECK(rep.get("C_m") == 0.275);
  CHECK(std::isnan(rep.get("missing")));
  CHECK(rep.table("none") == nullptr);
  CHECK(summarize(rep).find("C_m") != std::string::npos);
}
