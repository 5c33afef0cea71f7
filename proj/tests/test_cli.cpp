#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "penalearn/cli.hpp"
#include "penalearn/errors.hpp"
#include "penalearn/problems.hpp"

using namespace penalearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("penalearn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "penalearn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("minimal config file takes documented defaults") {
  const auto dir = scratch_dir("defaults");
  const auto file = write_text(dir / "run.cfg", "# only the problem\nproblem = rosenbrock-1c\n");
  const RunConfig cfg = parse_config(file, {});
  CHECK(cfg.problem == "rosenbrock-1c");
  CHECK(cfg.train.penalty.mode == PenaltyMode::piecewise);
  CHECK(cfg.train.penalty.eta_ineq == std::vector<double>{1e8});
  CHECK(cfg.train.penalty.gamma == 2.0);
  CHECK(cfg.train.sample_count == 1000);
  CHECK(cfg.train.batch_size == 100);
  CHECK(cfg.train.adam.learning_rate == 1e-3);
  CHECK(cfg.train.resolved_shape(make_problem("rosenbrock-1c")) == std::vector<int>{2, 20, 20, 2});
  CHECK(cfg.oracle.grid_points_per_dim == 201);
}

TEST_CASE("config values are range checked") {
  const auto dir = scratch_dir("ranges");
  const auto file = write_text(dir / "run.cfg", "problem = rosenbrock-1c\ngamma = 0.5\n");
  try {
    parse_config(file, {});
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    const std::string what = e.what();
    CHECK(what.find("gamma") != std::string::npos);
    CHECK(what.find("0.5") != std::string::npos);
    CHECK(what.find("accepted") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"problem", "rosenbrock-1c"}, {"epochs", "-3"}}), UsageError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"problem", "rosenbrock-1c"}, {"batch_size", "ten"}}), UsageError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"problem", "no-such-problem"}}), UsageError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {}), UsageError);
  write_text(dir / "bad.cfg", "problem = rosenbrock-1c\nwarp_factor = 9\n");
  CHECK_THROWS_AS(parse_config(dir / "bad.cfg", {}), UsageError);
}

TEST_CASE("flags override the file") {
  const auto dir = scratch_dir("override");
  const auto file = write_text(dir / "run.cfg", "problem = rosenbrock-1c\nepochs = 5000\nseed = 4\n");
  const RunConfig cfg = parse_config(file, {{"epochs", "10"}});
  CHECK(cfg.train.epochs == 10);
  CHECK(cfg.seed == 4);
}

TEST_CASE("seed falls back to the environment") {
  ::setenv("PENALEARN_SEED", "1234", 1);
  CHECK(parse_config(std::nullopt, {{"problem", "ackley-1c"}}).seed == 1234);
  CHECK(parse_config(std::nullopt, {{"problem", "ackley-1c"}, {"seed", "9"}}).seed == 9);
  ::unsetenv("PENALEARN_SEED");
  CHECK(parse_config(std::nullopt, {{"problem", "ackley-1c"}}).seed == 0);
}

TEST_CASE("commands needing a model fail cleanly without one") {
  const auto dir = scratch_dir("nomodel");
  const std::string model = (dir / "absent.model").string();
  for (const char* cmd : {"bench", "eval", "table"}) {
    const Run r = run({cmd, "--problem", "rosenbrock-1c", "--model", model});
    CHECK(r.status == 2);
    CHECK(r.err.find("absent.model") != std::string::npos);
  }
  CHECK(run({"train"}).status == 2);
  CHECK(run({"frobnicate"}).status == 2);
  CHECK(run({"oracle", "--problem", "rosenbrock-1c"}).status == 2);
  CHECK(run({"oracle", "--problem", "rosenbrock-1c", "--params", "1,2,3"}).status == 2);
}

TEST_CASE("oracle command solves one instance") {
  const Run r = run({"oracle", "--problem", "rosenbrock-1c", "--params", "1,1"});
  REQUIRE(r.status == 0);
  std::istringstream is(r.out);
  std::string line;
  double x1 = 0, x2 = 0;
  bool found = false;
  while (std::getline(is, line)) {
    if (line.rfind("x ", 0) == 0) {
      found = std::sscanf(line.c_str(), "x %lf,%lf", &x1, &x2) == 2;
    }
  }
  REQUIRE(found);
  CHECK(std::hypot(x1 - 0.8082, x2 - 0.5889) <= 1e-2);
  CHECK(r.out.find("feasible 1") != std::string::npos);
}

TEST_CASE("train is reproducible and feeds eval, bench and table") {
  const auto dir = scratch_dir("pipeline");
  const std::vector<std::string> common{"--problem", "rosenbrock-1c", "--epochs", "20", "--samples", "40",
                                        "--batch_size", "20", "--seed", "5"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const std::string a = (dir / "a.model").string(), b = (dir / "b.model").string();
  REQUIRE(run(with({"train"}, {"--model", a, "--log_every", "5"})).status == 0);
  REQUIRE(run(with({"train"}, {"--model", b, "--log_every", "5"})).status == 0);
  CHECK(read_text(a) == read_text(b));
  CHECK(read_text(a).rfind("penalearn-model v1", 0) == 0);

  const Run eval = run(with({"eval"}, {"--model", a, "--eval_samples", "7"}));
  REQUIRE(eval.status == 0);
  CHECK(std::count(eval.out.begin(), eval.out.end(), '\n') == 8);

  const std::string csv = (dir / "bench.csv").string();
  const Run bench =
      run(with({"bench"}, {"--model", a, "--bench_samples", "3", "--starts", "2", "--output", csv}));
  REQUIRE(bench.status == 0);
  CHECK(bench.err.find("speedup") != std::string::npos);
  CHECK(read_text(csv).find("# mac_count=480") != std::string::npos);

  const Run table = run(with({"table"}, {"--model", a}));
  REQUIRE(table.status == 0);
  CHECK(table.out.find("0.8082") != std::string::npos);
}

TEST_CASE("help lists every key with default and range") {
  const Run r = run({"train", "--help"});
  CHECK(r.status == 0);
  for (const auto& key : config_keys()) {
    CAPTURE(key.name);
    CHECK(r.out.find("--" + key.name) != std::string::npos);
  }
  CHECK(r.out.find("range:") != std::string::npos);
  CHECK(r.out.find("default: 1e8") != std::string::npos);
}
