#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bfly/cli.hpp"

using namespace bfly;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"bfly"};
  for (const auto& arg : args) argv.push_back(arg.c_str());
  std::ostringstream out, err;
  const int code =
      run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) lines += (c == '\n');
  return lines;
}

std::size_t count_occurrences(const std::string& text, const std::string& pat) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(pat, pos)) != std::string::npos) {
    ++count;
    pos += pat.size();
  }
  return count;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = std::string("cli_test_tmp_") + std::to_string(counter++) + ".txt";
    std::ofstream f(path);
    f << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
  static int counter;
};
int TempFile::counter = 0;

}  // namespace

TEST_CASE("build emits the requested formats") {
  SUBCASE("edge lines: 16 directed edges for m=2") {
    const auto result = run({"build", "--m", "2", "--format", "edges"});
    CHECK(result.code == kExitOk);
    CHECK(count_lines(result.out) == 16);
  }
  SUBCASE("dot output mentions all 24 nodes of WBF(3)") {
    const auto result = run({"build", "--m", "3", "--format", "dot"});
    CHECK(result.code == kExitOk);
    // 24 node declarations plus 48 edge lines reference node literals.
    CHECK(count_occurrences(result.out, "\"(0,000)\"") >= 1);
    std::size_t declarations = 0;
    std::istringstream stream(result.out);
    std::string line;
    while (std::getline(stream, line)) {
      declarations += line.find("->") == std::string::npos &&
                      line.find("\"(") != std::string::npos;
    }
    CHECK(declarations == 24);
  }
  SUBCASE("invalid dimension is a usage error") {
    const auto result = run({"build", "--m", "1"});
    CHECK(result.code == kExitUsage);
    CHECK_FALSE(result.err.empty());
  }
  SUBCASE("unknown format is a usage error") {
    CHECK(run({"build", "--m", "3", "--format", "pdf"}).code == kExitUsage);
  }
}

TEST_CASE("route subcommand") {
  const auto result = run({"route", "--m", "7", "--w", "(6,0110111)"});
  CHECK(result.code == kExitOk);
  CHECK(count_lines(result.out) == 14);  // 13 hops -> 14 nodes
  const auto json_result =
      run({"route", "--m", "7", "--w", "(6,0110111)", "--format", "json"});
  CHECK(json_result.code == kExitOk);
  CHECK(json_result.out.find("\"length\": 13") != std::string::npos);
}

TEST_CASE("multipath subcommand") {
  SUBCASE("figure configuration: 4 routes, verdict pass") {
    const auto result = run({"multipath", "--m", "7", "--h", "2", "--w",
                             "(6,0110111)"});
    CHECK(result.code == kExitOk);
    CHECK(count_occurrences(result.out, "\"s\":") == 4);
    CHECK(result.out.find("\"independent\": true") != std::string::npos);
  }
  SUBCASE("h=1 pair: 2 routes") {
    const auto result =
        run({"multipath", "--m", "6", "--h", "1", "--w", "(3,011100)"});
    CHECK(result.code == kExitOk);
    CHECK(count_occurrences(result.out, "\"s\":") == 2);
  }
  SUBCASE("adjacent destination is a precondition error") {
    const auto result =
        run({"multipath", "--m", "6", "--h", "1", "--w", "(1,000000)"});
    CHECK(result.code == kExitPrecondition);
    CHECK(result.err.find("d=1") != std::string::npos);
  }
  SUBCASE("dot overlay renders") {
    const auto result = run({"multipath", "--m", "4", "--h", "1", "--w",
                             "(2,1111)", "--format", "dot"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("digraph") != std::string::npos);
    CHECK(result.out.find("s0") != std::string::npos);
    CHECK(result.out.find("s1") != std::string::npos);
  }
}

TEST_CASE("redundancy subcommand") {
  SUBCASE("path graph endpoints") {
    const TempFile file("v a\na b\nb w\n");
    const auto result = run({"redundancy", "--graph", file.path, "--v", "v",
                             "--w", "w", "--h", "1"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("\"delta\": 1") != std::string::npos);
  }
  SUBCASE("disconnected pair reports delta 0") {
    const TempFile file("v a\nb w\n");
    const auto result = run({"redundancy", "--graph", file.path, "--v", "v",
                             "--w", "w", "--h", "1"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("\"delta\": 0") != std::string::npos);
  }
  SUBCASE("mutually trusted pair still exits zero") {
    const TempFile file("v w\n");
    const auto result = run({"redundancy", "--graph", file.path, "--v", "v",
                             "--w", "w", "--h", "1"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("\"mutually_trusted\": true") != std::string::npos);
  }
  SUBCASE("butterfly with the theorem lower bound") {
    const auto result = run({"redundancy", "--butterfly", "7", "--w",
                             "(6,0110111)", "--h", "2"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("\"route_lower_bound\": 4") != std::string::npos);
    CHECK(result.out.find("\"lower_bound_ok\": true") != std::string::npos);
    CHECK(result.out.find("\"upper_bound_ok\": true") != std::string::npos);
  }
  SUBCASE("needs exactly one input graph") {
    CHECK(run({"redundancy", "--w", "x", "--h", "1"}).code == kExitUsage);
  }
}

TEST_CASE("sweep subcommand") {
  SUBCASE("delta=4 grid has 20 data rows with the stated exact values") {
    const auto result =
        run({"sweep", "--delta", "4", "--trials", "2000", "--seed", "9"});
    CHECK(result.code == kExitOk);
    CHECK(count_lines(result.out) == 21);  // header + 20 rows
    std::istringstream stream(result.out);
    std::string line;
    std::getline(stream, line);
    CHECK(line == "delta,k,c,exact,estimate,stderr,trials,seed");
    bool saw_row_2_3 = false;
    while (std::getline(stream, line)) {
      std::istringstream fields(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(fields, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 8);
      const int k = std::stoi(cells[1]);
      const int c = std::stoi(cells[2]);
      const double exact = std::stod(cells[3]);
      if (k == 2 && c == 3) {
        saw_row_2_3 = true;
        CHECK(exact == doctest::Approx(0.5));
      }
      if (k > c) {
        CHECK(exact == 0.0);
        CHECK(std::stod(cells[4]) == 0.0);
      }
    }
    CHECK(saw_row_2_3);
  }
  SUBCASE("same seed gives byte-identical output, across worker counts too") {
    const auto a =
        run({"sweep", "--delta", "5", "--trials", "3000", "--seed", "4"});
    const auto b =
        run({"sweep", "--delta", "5", "--trials", "3000", "--seed", "4"});
    const auto c = run({"sweep", "--delta", "5", "--trials", "3000", "--seed",
                        "4", "--workers", "4"});
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
}

TEST_CASE("simulate subcommand") {
  SUBCASE("no compromised nodes: zero failures") {
    const auto result = run({"simulate", "--m", "6", "--h", "2", "--w",
                             "(3,011100)", "--k", "2", "--c", "0", "--trials",
                             "300"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("\"undetected_failure\": 0") != std::string::npos);
    CHECK(result.out.find("\"detected_error\": 0") != std::string::npos);
  }
  SUBCASE("failure rate near one half for the equivalence setting") {
    const auto result = run({"simulate", "--m", "6", "--h", "2", "--w",
                             "(3,011100)", "--k", "2", "--c", "3", "--trials",
                             "10000", "--seed", "3"});
    CHECK(result.code == kExitOk);
    CHECK(result.out.find("\"exact\": 0.5") != std::string::npos);
  }
  SUBCASE("k beyond the route count is a usage error") {
    const auto result = run({"simulate", "--m", "6", "--h", "2", "--w",
                             "(3,011100)", "--k", "5", "--c", "0"});
    CHECK(result.code == kExitUsage);
  }
  SUBCASE("byte-identical across runs and worker counts") {
    const std::vector<std::string> base{"simulate", "--m",      "6",  "--h",
                                        "2",        "--w",      "(3,011100)",
                                        "--k",      "2",        "--c", "3",
                                        "--trials", "2001",     "--seed", "5"};
    auto with_workers = base;
    with_workers.push_back("--workers");
    with_workers.push_back("3");
    const auto a = run(base);
    const auto b = run(base);
    const auto c = run(with_workers);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
}

TEST_CASE("verify subcommand passes and prints per-property lines") {
  const auto result = run({"verify", "--seed", "2"});
  CHECK(result.code == kExitOk);
  CHECK(count_occurrences(result.out, "PASS") >= 5);
  CHECK(count_occurrences(result.out, "FAIL") == 0);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"multipath", "--m", "6"}).code == kExitUsage);  // missing flags
  const auto help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("multipath") != std::string::npos);
}

#include <json.hpp>

TEST_CASE("emitted JSON parses against the documented shapes") {
  SUBCASE("build --format json") {
    const auto result = run({"build", "--m", "2", "--format", "json"});
    CHECK(result.code == kExitOk);
    const auto doc = nlohmann::json::parse(result.out);
    CHECK(doc["m"] == 2);
    CHECK(doc["nodes"].size() == 8);
    CHECK(doc["edges"].size() == 16);
  }
  SUBCASE("multipath routes") {
    const auto result =
        run({"multipath", "--m", "7", "--h", "2", "--w", "(6,0110111)"});
    const auto doc = nlohmann::json::parse(result.out);
    CHECK(doc["routes"].size() == 4);
    for (const auto& route : doc["routes"]) {
      CHECK(route["hops"].size() == route["length"].get<std::size_t>() + 1);
      CHECK(route["stages"].size() == route["length"].get<std::size_t>());
      CHECK(route["hops"].back() == "(6,0110111)");
    }
    CHECK(doc["independent"] == true);
    CHECK(doc["violations"].empty());
  }
  SUBCASE("redundancy record") {
    const auto result = run({"redundancy", "--butterfly", "6", "--w",
                             "(3,011100)", "--h", "2"});
    const auto doc = nlohmann::json::parse(result.out);
    CHECK(doc["delta"].is_number());
    CHECK(doc["min_cut"].size() == doc["delta"].get<std::size_t>());
    CHECK(doc["witness_paths"].size() == doc["delta"].get<std::size_t>());
    CHECK(doc["boundary_v"].is_number());
  }
  SUBCASE("simulate fault report") {
    const auto result = run({"simulate", "--m", "6", "--h", "2", "--w",
                             "(3,011100)", "--k", "2", "--c", "3", "--trials",
                             "500"});
    const auto doc = nlohmann::json::parse(result.out);
    const auto& tallies = doc["tallies"];
    CHECK(tallies["accepted_clean"].get<long long>() +
              tallies["detected_error"].get<long long>() +
              tallies["undetected_failure"].get<long long>() ==
          500);
    CHECK(doc["exact"] == 0.5);
    CHECK(doc["delta"] == 4);
  }
}
