// Copyright 2026 The relbc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relbc/commands.hpp"
#include "relbc/config.hpp"

using namespace relbc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("relbc_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path file(const std::string& name) const { return path / name; }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kIdealConfig =
    "# test config\n"
    "[code]\n"
    "N = 4\n"
    "k = 4\n"
    "[wavepacket]\n"
    "sigma = 1.0\n"
    "tau0 = 20.0\n"
    "delta_tau = 5.0\n"
    "delta = 1e-6\n"
    "[channel]\n"
    "name = ideal\n"
    "d_tau = 8.0\n"
    "[run]\n"
    "trials = 64\n"
    "seed = 42\n";

}  // namespace

TEST_CASE("config parsing", "[cli]") {
  SECTION("sections, comments, whitespace") {
    ConfigFile cfg = ConfigFile::parse("; top\n[a]\n x = 1 \n# mid\n[b c]\nkey = hello world\n");
    CHECK(cfg.get_num("a", "x", 0) == 1.0);
    CHECK(cfg.get_str("b c", "key", "") == "hello world");
    CHECK(cfg.get_num("a", "missing", 7.5) == 7.5);
    CHECK_THROWS_AS(cfg.require_num("a", "missing"), config_error);
  }
  SECTION("parse errors carry line numbers") {
    CHECK_THROWS_WITH(ConfigFile::parse("[a\n"), Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(ConfigFile::parse("[a]\nnovalue\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_AS(ConfigFile::parse("key = 1\n"), config_error);  // outside any section
  }
  SECTION("bad numbers") {
    ConfigFile cfg = ConfigFile::parse("[a]\nx = 12q\nflag = maybe\n");
    CHECK_THROWS_AS(cfg.get_num("a", "x", 0), config_error);
    CHECK_THROWS_AS(cfg.get_bool("a", "flag", false), config_error);
  }
  SECTION("canonical form is sorted and stable") {
    ConfigFile a = ConfigFile::parse("[z]\nk = 2\n[a]\nx = 1\n");
    ConfigFile b = ConfigFile::parse("[a]\nx = 1\n[z]\nk = 2\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.canonical() == "a.x=1 z.k=2");
  }
}

TEST_CASE("protocol config from text", "[cli]") {
  ConfigFile cfg = ConfigFile::parse(kIdealConfig);
  ProtocolConfig pc = make_protocol_config(cfg);
  CHECK(pc.code.n_blocks == 4);
  CHECK(pc.code.block_len == 4);
  CHECK(pc.channel.name == "ideal");
  CHECK(pc.d_tau == 8.0);
  CHECK_NOTHROW(pc.validate());
  RunSettings rs = make_run_settings(cfg);
  CHECK(rs.trials == 64);
  CHECK(rs.seed == 42);
}

TEST_CASE("custom channels from explicit mode lists", "[cli]") {
  ConfigFile cfg = ConfigFile::parse(
      "[channel]\n"
      "name = custom\n"
      "d_tau = 8.0\n"
      "modes = 0.5 0 0 0 ; 0.3 2.5 0.785398 0.785398\n");
  ProtocolConfig pc = make_protocol_config(cfg);
  CHECK(pc.channel.modes.size() == 2);
  CHECK(detection_probability(pc.channel) == Catch::Approx(0.8));
  CHECK(validate_channel(pc.channel, pc.spec).all_pass());

  CHECK_THROWS_AS(make_protocol_config(ConfigFile::parse("[channel]\nname = custom\n")),
                  config_error);
  CHECK_THROWS_AS(
      make_protocol_config(ConfigFile::parse("[channel]\nname = custom\nmodes = 0.5 0\n")),
      config_error);
  CHECK_THROWS_AS(make_protocol_config(ConfigFile::parse("[channel]\nname = warp\n")),
                  config_error);
}

TEST_CASE("cmd_validate", "[cli]") {
  TempDir tmp;
  std::ostringstream out, err;

  SECTION("ideal channel passes with exit 0") {
    write_file(tmp.file("ideal.cfg"), kIdealConfig);
    CHECK(cmd_validate(tmp.file("ideal.cfg").string(), out, err) == kExitOk);
    CHECK(out.str().find("[PASS]") != std::string::npos);
    CHECK(out.str().find("all checks passed") != std::string::npos);
  }
  SECTION("non-causal channel fails with exit 1 and names the check") {
    write_file(tmp.file("bad.cfg"),
               "[channel]\nname = custom\nd_tau = 8.0\nmodes = 1.0 -3 0 0\n");
    CHECK(cmd_validate(tmp.file("bad.cfg").string(), out, err) == kExitDomainFailure);
    CHECK(out.str().find("causality") != std::string::npos);
    CHECK(out.str().find("[FAIL]") != std::string::npos);
  }
  SECTION("missing file exits 2") {
    CHECK(cmd_validate((tmp.path / "nope.cfg").string(), out, err) == kExitUsage);
    CHECK(err.str().find("error") != std::string::npos);
  }
}

TEST_CASE("cmd_run", "[cli]") {
  TempDir tmp;
  write_file(tmp.file("ideal.cfg"), kIdealConfig);
  std::ostringstream out, err;

  SECTION("writes one row per trial plus the record") {
    int rc = cmd_run(tmp.file("ideal.cfg").string(), 50, 7, tmp.file("run.csv").string(), out, err);
    REQUIRE(rc == kExitOk);
    std::string csv = read_file(tmp.file("run.csv"));
    CHECK(csv.find("# relbc v") != std::string::npos);
    CHECK(csv.find("# seed: 7") != std::string::npos);
    CHECK(csv.find("trial,committed_bit,recovered_bit,accepted,n_perp,n_noclick") !=
          std::string::npos);
    CHECK(csv.find("# result: parity_error") != std::string::npos);
    std::size_t rows = 0;
    std::istringstream lines(csv);
    std::string line;
    while (std::getline(lines, line))
      if (!line.empty() && line[0] != '#' && line.find("trial,") != 0) ++rows;
    CHECK(rows == 50);
    // Ideal channel: every row accepted.
    CHECK(csv.find(",0,0,0,") == std::string::npos);  // no rejected marker pattern
  }
  SECTION("byte-identical reruns") {
    CHECK(cmd_run(tmp.file("ideal.cfg").string(), 40, 9, tmp.file("a.csv").string(), out, err) ==
          kExitOk);
    CHECK(cmd_run(tmp.file("ideal.cfg").string(), 40, 9, tmp.file("b.csv").string(), out, err) ==
          kExitOk);
    CHECK(read_file(tmp.file("a.csv")) == read_file(tmp.file("b.csv")));
    CHECK(cmd_run(tmp.file("ideal.cfg").string(), 40, 10, tmp.file("c.csv").string(), out, err) ==
          kExitOk);
    CHECK(read_file(tmp.file("a.csv")) != read_file(tmp.file("c.csv")));
  }
  SECTION("unreadable config exits 2") {
    CHECK(cmd_run((tmp.path / "nope.cfg").string(), {}, {}, "-", out, err) == kExitUsage);
  }
}

TEST_CASE("cmd_attack", "[cli]") {
  TempDir tmp;
  write_file(tmp.file("ideal.cfg"), kIdealConfig);
  std::ostringstream out, err;

  SECTION("early") {
    AttackOptions opts{"early", 0.0, 0};
    REQUIRE(cmd_attack(tmp.file("ideal.cfg").string(), opts, 500, 3,
                       tmp.file("early.csv").string(), out, err) == kExitOk);
    std::string csv = read_file(tmp.file("early.csv"));
    CHECK(csv.find("trial,committed_bit,guessed_parity,correct,bit_errors,n_noclick") !=
          std::string::npos);
    CHECK(csv.find("# result: parity_success") != std::string::npos);
    CHECK(csv.find("# result: per_bit_error") != std::string::npos);
  }
  SECTION("delay") {
    AttackOptions opts{"delay", 20.0, 0};
    REQUIRE(cmd_attack(tmp.file("ideal.cfg").string(), opts, 500, 3,
                       tmp.file("delay.csv").string(), out, err) == kExitOk);
    std::string csv = read_file(tmp.file("delay.csv"));
    CHECK(csv.find("trial,committed_bit,announced_bit,detected,n_perp,n_noclick") !=
          std::string::npos);
    CHECK(csv.find("# result: undetected_rate") != std::string::npos);
    CHECK(csv.find("# result: p_perp analytic=0.75") != std::string::npos);
  }
  SECTION("flip") {
    AttackOptions opts{"flip", 0.0, 1};
    REQUIRE(cmd_attack(tmp.file("ideal.cfg").string(), opts, 200, 3, tmp.file("flip.csv").string(),
                       out, err) == kExitOk);
    std::string csv = read_file(tmp.file("flip.csv"));
    CHECK(csv.find("# result: detection_rate analytic=1 empirical=1") != std::string::npos);
  }
  SECTION("unknown kind exits 2") {
    AttackOptions opts{"warp", 0.0, 0};
    CHECK(cmd_attack(tmp.file("ideal.cfg").string(), opts, 10, 3, "-", out, err) == kExitUsage);
  }
}

TEST_CASE("cmd_tables", "[cli]") {
  TempDir tmp;
  std::ostringstream out, err;

  SECTION("eq22 brute force agrees with the exact column") {
    TableOptions opts;
    opts.family = "eq22";
    REQUIRE(cmd_tables(opts, tmp.file("eq22.csv").string(), out, err) == kExitOk);
    std::istringstream lines(read_file(tmp.file("eq22.csv")));
    std::string line;
    std::size_t data_rows = 0;
    while (std::getline(lines, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("N,", 0) == 0) continue;
      ++data_rows;
      std::istringstream fields(line);
      std::string n, k, exact, trig, approx, brute;
      std::getline(fields, n, ',');
      std::getline(fields, k, ',');
      std::getline(fields, exact, ',');
      std::getline(fields, trig, ',');
      std::getline(fields, approx, ',');
      std::getline(fields, brute, ',');
      if (!brute.empty()) CHECK(exact == brute);
    }
    CHECK(data_rows > 0);
  }
  SECTION("eq25 includes the worked example") {
    TableOptions opts;
    opts.family = "eq25";
    opts.k_list = {2};
    opts.p_list = {0.25};
    REQUIRE(cmd_tables(opts, tmp.file("eq25.csv").string(), out, err) == kExitOk);
    CHECK(read_file(tmp.file("eq25.csv")).find("2,0.25,0.4375,") != std::string::npos);
  }
  SECTION("eq28 zero-noise row is all zero") {
    TableOptions opts;
    opts.family = "eq28";
    opts.n_list = {4};
    opts.p_list = {0.0};
    REQUIRE(cmd_tables(opts, tmp.file("eq28.csv").string(), out, err) == kExitOk);
    CHECK(read_file(tmp.file("eq28.csv")).find("4,0,0,0") != std::string::npos);
  }
  SECTION("eq34 and the unknown family") {
    TableOptions opts;
    opts.family = "eq34";
    REQUIRE(cmd_tables(opts, "-", out, err) == kExitOk);
    CHECK(out.str().find("k,p_perp,cheat_probability") != std::string::npos);
    TableOptions bad;
    bad.family = "eq99";
    CHECK(cmd_tables(bad, "-", out, err) == kExitUsage);
  }
}

TEST_CASE("output directory override", "[cli]") {
  TempDir tmp;
  ::setenv("RELBC_OUT_DIR", tmp.path.c_str(), 1);
  write_file(tmp.file("ideal.cfg"), kIdealConfig);
  std::ostringstream out, err;
  CHECK(cmd_run(tmp.file("ideal.cfg").string(), 5, 1, "nested/run.csv", out, err) == kExitOk);
  CHECK(fs::exists(tmp.path / "nested" / "run.csv"));
  ::unsetenv("RELBC_OUT_DIR");
}

TEST_CASE("cli binary end to end", "[cli]") {
  TempDir tmp;
  write_file(tmp.file("ideal.cfg"), kIdealConfig);
  std::string cli = RELBC_CLI_PATH;
  REQUIRE(fs::exists(cli));

  SECTION("validate exit code") {
    std::string cmd = cli + " validate " + tmp.file("ideal.cfg").string() + " > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
  }
  SECTION("run produces a parseable record") {
    std::string out_path = tmp.file("cli_run.csv").string();
    std::string cmd = cli + " run " + tmp.file("ideal.cfg").string() +
                      " --trials 20 --seed 5 --out " + out_path + " > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::string csv = read_file(out_path);
    CHECK(csv.find("# seed: 5") != std::string::npos);
    CHECK(csv.find("# result: parity_error") != std::string::npos);
  }
}
