#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "evosand/graph.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("evosand-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (scratch() / name).string(); }

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + EVOSAND_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

nlohmann::json manifest(const std::string& out) { return nlohmann::json::parse(slurp(out + ".manifest.json")); }

}  // namespace

TEST_CASE("pattern writes the cropped static pile of 8 as PGM") {
  const auto out = at("s8.pgm");
  REQUIRE(cli("pattern --schedule static --grains 8 --out " + out) == 0);
  CHECK(slurp(out) == "P2\n3 3\n255\n0 154 0\n154 0 154\n0 154 0\n");
  const auto m = manifest(out);
  CHECK(m["command"] == "pattern");
  CHECK(m["parameters"]["grains"] == 8);
  CHECK(m["total_topplings"] == 2);
  CHECK(m["result"]["status"] == "stabilized");
  CHECK(m["result"]["rounds"] == 3);
  CHECK(m["seed"].is_null());
  CHECK(m["outputs"] == nlohmann::json::array({out}));
  CHECK(m["wall_clock_seconds"].get<double>() >= 0);
}

TEST_CASE("a single grain is a one-pixel image") {
  const auto out = at("one.pgm");
  REQUIRE(cli("pattern --schedule model-g --grains 1 --out " + out) == 0);
  CHECK(slurp(out) == "P2\n1 1\n255\n89\n");
  CHECK(manifest(out)["total_topplings"] == 0);
}

TEST_CASE("pattern output format follows the extension or --format") {
  const auto png = at("g.png");
  REQUIRE(cli("pattern --schedule model-g --grains 50 --out " + png) == 0);
  CHECK(slurp(png).substr(1, 3) == "PNG");

  const auto csv = at("g.txt");
  REQUIRE(cli("pattern --schedule model-g --grains 8 --format csv --out " + csv) == 0);
  const auto text = slurp(csv);
  CHECK(text.rfind("i,j,value\n", 0) == 0);
  // Final model G pile of 8: (+-2, +-1), (0, +-2), (+-1, 0) hold one grain each.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  long total = 0;
  int cells = 0;
  while (std::getline(in, line)) {
    total += std::stol(line.substr(line.rfind(',') + 1));
    ++cells;
  }
  CHECK(total == 8);
  CHECK(cells == 8);
}

TEST_CASE("pattern trace lines use the window the run reached") {
  const auto out = at("t.pgm");
  const auto trace = at("t.trace");
  REQUIRE(cli("pattern --schedule static --grains 8 --out " + out + " --trace " + trace) == 0);
  CHECK(slurp(trace) ==
        "t=0 toppled=1 config=0,1,0,1,4,1,0,1,0\n"
        "t=1 toppled=1 config=0,2,0,2,0,2,0,2,0\n"
        "t=2 toppled=0 config=0,2,0,2,0,2,0,2,0\n");
  CHECK(manifest(out)["outputs"].size() == 2);
}

TEST_CASE("pattern reports exhausted round limits with exit code 2") {
  CHECK(cli("pattern --schedule static --grains 1000 --max-rounds 3 --out " + at("lim.pgm")) == 2);
  CHECK(manifest(at("lim.pgm"))["result"]["status"] == "limit-exceeded");
}

TEST_CASE("usage errors exit with 64") {
  CHECK(cli("") == 64);
  CHECK(cli("pattern --grains 8 --out " + at("x.pgm")) == 64);
  CHECK(cli("pattern --schedule static --grains 0 --out " + at("x.pgm")) == 64);
  CHECK(cli("pattern --schedule static --grains 8 --mode sometimes --out " + at("x.pgm")) == 64);
  CHECK(cli("pattern --schedule static --grains 8 --format tiff --out " + at("x.pgm")) == 64);
  CHECK(cli("avalanche --schedule static --width 0 --out " + at("x.csv")) == 64);
  CHECK(cli("fit " + at("missing.csv") + " --compare weibull --out " + at("x.json")) != 0);
}

TEST_CASE("unreadable or malformed input files exit with 66") {
  CHECK(cli("pattern --schedule " + at("nope.json") + " --grains 8 --out " + at("x.pgm")) == 66);
  spit(at("bad.json"), "{\"period\": 2, \"rules\": [\"grid4\"]}");
  CHECK(cli("pattern --schedule " + at("bad.json") + " --grains 8 --out " + at("x.pgm")) == 66);
  CHECK(cli("fit " + at("nope.csv") + " --out " + at("x.json")) == 66);
  spit(at("nosize.csv"), "index,count\n0,1\n");
  CHECK(cli("fit " + at("nosize.csv") + " --out " + at("x.json")) == 66);
}

TEST_CASE("a lattice schedule file is accepted") {
  spit(at("md.json"), "{\"period\": 2, \"rules\": [\"grid4\", \"diag4\"]}");
  REQUIRE(cli("pattern --schedule " + at("md.json") + " --grains 100 --out " + at("md.pgm")) == 0);
  REQUIRE(cli("pattern --schedule model-d --grains 100 --out " + at("md2.pgm")) == 0);
  CHECK(slurp(at("md.pgm")) == slurp(at("md2.pgm")));
}

TEST_CASE("avalanche output is byte-identical for a fixed seed") {
  const auto a = at("a1.csv");
  const auto b = at("a2.csv");
  const auto c = at("a3.csv");
  const std::string args = "avalanche --schedule model-g --width 12 --height 9 --iterations 500 ";
  REQUIRE(cli(args + "--seed 7 --out " + a) == 0);
  REQUIRE(cli(args + "--seed 7 --out " + b) == 0);
  REQUIRE(cli(args + "--seed 8 --out " + c) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(slurp(a).rfind("index,size\n0,", 0) == 0);
  const auto m = manifest(a);
  CHECK(m["seed"] == 7);
  CHECK(m["parameters"]["width"] == 12);
  CHECK(m["parameters"]["mode"] == "first-quiet");
}

TEST_CASE("avalanche runs on a graph schedule file") {
  spit(at("tri.json"), evosand::schedule_to_json(evosand::trigonometric_triangle_schedule()));
  REQUIRE(cli("avalanche --schedule " + at("tri.json") + " --iterations 20 --out " + at("tri.csv")) == 0);
  std::istringstream in(slurp(at("tri.csv")));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 20);
}

TEST_CASE("avalanche on a never-stabilizing schedule exits with 3") {
  spit(at("path.json"), evosand::schedule_to_json(evosand::alternating_path_schedule()));
  CHECK(cli("avalanche --schedule " + at("path.json") + " --iterations 50 --out " + at("path.csv")) == 3);
}

TEST_CASE("fit writes the report, histogram and manifest") {
  std::string csv = "index,size\n";
  // 200 samples from a heavy tail: values k repeated about 400/k^2 times.
  int index = 0;
  for (int k = 1; k <= 60; ++k) {
    for (int r = 0; r < 400 / (k * k) + (k % 7 == 0); ++r) csv += std::to_string(index++) + "," + std::to_string(k) + "\n";
  }
  spit(at("h.csv"), csv);
  const auto out = at("h.json");
  REQUIRE(cli("fit " + at("h.csv") + " --compare exponential --compare lognormal --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["x_min"].get<long>() >= 1);
  CHECK(j["alpha"].get<double>() > 1);
  CHECK(j["ks"].get<double>() >= 0);
  CHECK(j["n_tail"].get<long>() >= 1);
  REQUIRE(j["lrt"].size() == 2);
  CHECK(j["lrt"][0]["alternative"] == "exponential");
  CHECK(j["lrt"][1]["alternative"] == "lognormal");
  CHECK(j["bootstrap_p"].is_null());
  CHECK(slurp(out + ".histogram.csv").rfind("size,", 0) == 0);
  const auto m = manifest(out);
  CHECK(m["command"] == "fit");
  CHECK(m["outputs"].size() == 2);

  REQUIRE(cli("fit " + at("h.csv") + " --bootstrap 5 --seed 3 --out " + at("hb.json")) == 0);
  const auto p = nlohmann::json::parse(slurp(at("hb.json")))["bootstrap_p"].get<double>();
  CHECK(p >= 0);
  CHECK(p <= 1);
}

TEST_CASE("fit refuses degenerate and short inputs with exit code 4") {
  std::string same = "size\n";
  for (int k = 0; k < 100; ++k) same += "5\n";
  spit(at("same.csv"), same);
  CHECK(cli("fit " + at("same.csv") + " --out " + at("same.json")) == 4);
  CHECK_FALSE(fs::exists(at("same.json")));

  spit(at("short.csv"), "size\n1\n2\n3\n");
  CHECK(cli("fit " + at("short.csv") + " --out " + at("short.json")) == 4);
}

TEST_CASE("stabilize runs a graph schedule and reports cycles") {
  spit(at("tri.json"), evosand::schedule_to_json(evosand::trigonometric_triangle_schedule()));
  REQUIRE(cli("stabilize --schedule " + at("tri.json") + " --config 3,2 --out " + at("tri.out.json") +
              " --trace " + at("tri.trace")) == 0);
  const auto r = nlohmann::json::parse(slurp(at("tri.out.json")));
  CHECK(r["status"] == "stabilized");
  CHECK(r["config"] == nlohmann::json::array({0, 0}));
  CHECK(r["total_topplings"] == 4);
  CHECK(slurp(at("tri.trace")).rfind("t=0 toppled=2 config=1,1\nt=1 toppled=0 config=1,1\n", 0) == 0);

  spit(at("path.json"), evosand::schedule_to_json(evosand::alternating_path_schedule()));
  CHECK(cli("stabilize --schedule " + at("path.json") + " --config 1,0 --out " + at("path.out.json")) == 3);
  const auto p = nlohmann::json::parse(slurp(at("path.out.json")));
  CHECK(p["status"] == "non-terminating");
  CHECK(p["cycle_length"] == 2);
  CHECK(cli("stabilize --schedule " + at("tri.json") + " --config 3,x --out " + at("x.json")) == 64);
}

TEST_CASE("unwritable output exits with 73") {
  CHECK(cli("pattern --schedule static --grains 8 --out /nonexistent-dir/x.pgm") == 73);
}
