#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrlsurv/cli.hpp"

namespace fs = std::filesystem;
using mrlsurv::run_cli;

namespace {

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

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("mrlsurv_cli_" + std::to_string(Catch::getSeed()) + "_" +
           std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string two_groups() {
  std::string csv = "time,status,group\n";
  // deterministic, well-separated groups with censoring
  for (int i = 1; i <= 60; ++i) {
    csv += std::to_string(0.13 * i + 0.01 * (i % 7)) + "," + (i % 5 ? "1" : "0") + ",A\n";
    csv += std::to_string(0.07 * i + 0.02 * (i % 3)) + "," + (i % 6 ? "1" : "0") + ",B\n";
  }
  return csv;
}

}  // namespace

TEST_CASE("km writes a plot, a CSV and a one-line summary", "[cli]") {
  Workspace ws;
  const auto input = ws.file("in.csv", "time,status\n1,1\n2,1\n3,0\n4,1\n");
  const auto r = run({"km", "--input", input, "--out", ws.path("km.svg"), "--out-csv",
                      ws.path("km.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
  CHECK(r.out.find("n=4") != std::string::npos);
  CHECK(slurp(ws.path("km.csv")) == "t,value\n1,0.75\n2,0.5\n4,0\n");
  CHECK(slurp(ws.path("km.svg")).starts_with("<?xml"));
}

TEST_CASE("grammar violations exit with code 2", "[cli]") {
  Workspace ws;
  const auto input = ws.file("in.csv", two_groups());
  CHECK(run({"mrl", "--input", input, "--threshold-quantile", "1.5"}).code == 2);
  CHECK(run({"mrl", "--input", input, "--threshold-quantile", "0"}).code == 2);
  CHECK(run({"mrl", "--input", input, "--threshold", "2", "--threshold-quantile", "0.5"}).code == 2);
  CHECK(run({"mrl", "--input", input, "--min-exceedances", "1"}).code == 2);
  CHECK(run({"km"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"bogus", "--input", input}).code == 2);
  CHECK(run({"diff", "--input", input, "--band", "0.9,0.1", "--seed", "1"}).code == 2);

  const auto no_seed = run({"diff", "--input", input, "--permutations", "50"});
  CHECK(no_seed.code == 2);
  CHECK(no_seed.err.find("--seed is required") != std::string::npos);
  CHECK(run({"ratio", "--input", input}).code == 2);
  CHECK(run({"stats", "--input", input}).code == 2);
  CHECK(run({"diff", "--input", input, "--permutations", "0"}).code == 0);
  CHECK(run({"stats", "--input", input, "--bootstrap", "0"}).code != 2);
}

TEST_CASE("data errors exit with code 1 and report the message", "[cli]") {
  Workspace ws;
  const auto bad = ws.file("bad.csv", "time,status\n1,1\n-2,1\n");
  const auto r = run({"km", "--input", bad});
  CHECK(r.code == 1);
  CHECK(r.err.starts_with("row 2: "));
  CHECK(r.out.empty());

  const auto missing = run({"km", "--input", ws.path("nope.csv")});
  CHECK(missing.code == 1);

  const auto high = run({"mrl", "--input", ws.file("in.csv", two_groups()), "--threshold", "100"});
  CHECK(high.code == 1);
  CHECK(high.err.find("threshold too high") != std::string::npos);

  const auto one_group = run({"diff", "--input", ws.file("one.csv", "time,status\n1,1\n2,1\n"),
                              "--permutations", "0"});
  CHECK(one_group.code == 1);
}

TEST_CASE("every subcommand is byte-for-byte deterministic", "[cli]") {
  Workspace ws;
  const auto input = ws.file("in.csv", two_groups());
  std::string study = "participant,item,pre,post\n";
  for (int p = 0; p < 20; ++p) {
    study += "p" + std::to_string(p) + ",km," + std::to_string(p % 3 == 0) + "," +
             std::to_string(p % 4 != 0) + "\n";
  }
  const auto responses = ws.file("study.csv", study);

  const std::vector<std::vector<std::string>> commands{
      {"km", "--input", input},
      {"mrl", "--input", input, "--threshold-quantile", "0.7"},
      {"diff", "--input", input, "--permutations", "200", "--seed", "11"},
      {"ratio", "--input", input, "--permutations", "200", "--seed", "11"},
      {"mrl-diff", "--input", input, "--threshold-quantile", "0.7"},
      {"stats", "--input", responses, "--bootstrap", "300", "--seed", "5"},
  };
  for (const auto& base : commands) {
    CAPTURE(base[0]);
    std::vector<std::string> outputs;
    for (int rep = 0; rep < 2; ++rep) {
      auto args = base;
      const auto tag = base[0] + std::to_string(rep);
      args.insert(args.end(), {"--out-csv", ws.path(tag + ".csv")});
      if (base[0] != "stats") args.insert(args.end(), {"--out", ws.path(tag + ".svg")});
      const auto r = run(args);
      REQUIRE(r.code == 0);
      outputs.push_back(r.out + slurp(ws.path(tag + ".csv")) +
                        (base[0] != "stats" ? slurp(ws.path(tag + ".svg")) : ""));
    }
    CHECK(outputs[0] == outputs[1]);
  }
}

TEST_CASE("thread count does not change envelope output", "[cli]") {
  Workspace ws;
  const auto input = ws.file("in.csv", two_groups());
  std::vector<std::string> csvs;
  for (const char* threads : {"1", "3"}) {
    const auto out = ws.path(std::string("t") + threads + ".csv");
    REQUIRE(run({"diff", "--input", input, "--permutations", "100", "--seed", "3", "--threads",
                 threads, "--out-csv", out})
                .code == 0);
    csvs.push_back(slurp(out));
  }
  CHECK(csvs[0] == csvs[1]);
  CHECK(csvs[0].starts_with("t,value,lower,upper,n_defined\n"));
}
