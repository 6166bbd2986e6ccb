#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sbmlab/version.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() / ("sbmlab_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

Run cli(const std::string& args) {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = std::string("'") + SBMLAB_CLI_PATH + "' " + args + " > '" + out.string() +
                          "' 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string data(const std::string& name) { return std::string(SBMLAB_TEST_DATA) + "/" + name; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help output matches the golden files") {
  for (const std::string sub : {"", "threshold", "generate", "detect", "ml", "sweep", "bound"}) {
    CAPTURE(sub);
    const auto r = cli(sub + " --help");
    CHECK(r.status == 0);
    CHECK(r.out == slurp(data("help_" + (sub.empty() ? std::string("main") : sub) + ".txt")));
  }
}

TEST_CASE("threshold reports the graph-only condition at beta 0") {
  const auto r = cli("threshold --a 16 --b 4 --model noisy --beta 0");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["version"] == sbmlab::kVersion);
  CHECK(j["condition_value"].get<double>() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(j["achievable"] == "yes");
}

TEST_CASE("exit statuses") {
  auto usage = cli("threshold --a 5");
  CHECK(usage.status == 2);
  CHECK(usage.out.empty());
  CHECK(cli("").status == 2);
  CHECK(cli("bogus").status == 2);
  CHECK(cli("threshold --a 5 --b 1 --model noisy --beta -1").status == 2);

  auto domain = cli("threshold --a 3 --b 3 --model noisy --beta 0.5");
  CHECK(domain.status == 3);
  CHECK(domain.out.empty());
  CHECK_FALSE(domain.err.empty());

  auto cap = cli("ml --n 40 --a 3 --b 1 --seed 1");
  CHECK(cap.status == 3);
  CHECK(cap.out.empty());
  CHECK(cap.err.find("cap") != std::string::npos);

  auto io = cli("detect --input /nonexistent/graph.txt");
  CHECK(io.status == 4);
  CHECK(io.out.empty());
  CHECK(cli("sweep --config /nonexistent/x.cfg").status == 4);
}

TEST_CASE("detect is reproducible for a fixed seed") {
  const std::string args = "detect --n 600 --a 12 --b 2 --model erasure --beta 0.3 --seed 17 --labels";
  const auto first = cli(args);
  const auto second = cli(args);
  REQUIRE(first.status == 0);
  CHECK(first.out == second.out);
  const auto j = nlohmann::json::parse(first.out);
  CHECK(j["seed"] == 17);
  CHECK(j["labels"].size() == 600);
}

TEST_CASE("omitted seed is generated and echoed") {
  const auto r = cli("detect --n 200 --a 12 --b 2 --model noisy --alpha 0.2");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto seed = j["seed"].get<std::uint64_t>();
  const auto again = cli("detect --n 200 --a 12 --b 2 --model noisy --alpha 0.2 --seed " + std::to_string(seed));
  CHECK(again.out == r.out);
}

TEST_CASE("generate then detect from the file matches direct detection") {
  const auto file = (scratch() / "g.txt").string();
  const std::string gen = "--n 400 --a 12 --b 2 --model noisy --alpha 0.25 --seed 5";
  REQUIRE(cli("generate " + gen + " --output '" + file + "'").status == 0);
  const auto from_file = cli("detect --input '" + file + "'");
  const auto direct = cli("detect " + gen);
  REQUIRE(from_file.status == 0);
  CHECK(from_file.out == direct.out);
}

TEST_CASE("ml subcommand") {
  const auto r = cli("ml --n 10 --a 3 --b 1 --model noisy --alpha 0.1 --seed 4");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["best_labels"].size() == 10);
  CHECK(j["tie_count"].get<int>() >= 1);
}

TEST_CASE("sweep writes the golden CSV") {
  const auto r = cli("sweep --config '" + data("golden_two_cell.cfg") + "' --threads 2 --format csv");
  REQUIRE(r.status == 0);
  CHECK(r.out == slurp(data("golden_two_cell.csv")));
  const auto js = cli("sweep --config '" + data("golden_two_cell.cfg") + "' --threads 1 --format json");
  REQUIRE(js.status == 0);
  CHECK(nlohmann::json::parse(js.out)["version"] == sbmlab::kVersion);
}

TEST_CASE("bound subcommand") {
  const auto r = cli("bound --kind tstar --a 5 --b 1 --beta 0.5");
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["t_star"].get<double>() ==
        doctest::Approx(0.5860496572751927546).epsilon(1e-14));
  CHECK(cli("bound --kind tstar --a 2 --b 2 --beta 0.5").status == 3);
}

}
