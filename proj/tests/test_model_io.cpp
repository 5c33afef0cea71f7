#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "penalearn/errors.hpp"
#include "penalearn/model_io.hpp"

using namespace penalearn;

TEST_CASE("model text round-trips bit-exactly") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Mlp net = Mlp::xavier({5, 10, 20, 20, 20, 10, 2}, seed);
    const Mlp back = model_from_string(model_to_string(net));
    CHECK(back.layer_sizes() == net.layer_sizes());
    CHECK(back.params().flatten() == net.params().flatten());
    Vec p(5);
    p << 20, 0.2, 0.5, 0.5, 20;
    CHECK(mlp_predict(back, p) == mlp_predict(net, p));
    CHECK(model_to_string(back) == model_to_string(net));
  }
}

TEST_CASE("model file layout") {
  const std::string text = model_to_string(Mlp({1, 1, 1}));
  CHECK(text == "penalearn-model v1\nlayers 1 1 1\n0\n0\n0\n0\n");
}

TEST_CASE("save and load through the filesystem") {
  const auto path = std::filesystem::temp_directory_path() / "penalearn_test_model.txt";
  const Mlp net = Mlp::xavier({2, 20, 20, 2}, 9);
  save_model(net, path);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  CHECK(load_model(path).params().flatten() == net.params().flatten());
  std::filesystem::remove(path);
}

TEST_CASE("malformed model files") {
  const std::string good = model_to_string(Mlp::xavier({2, 3, 2}, 1));
  SUBCASE("truncated") {
    const std::string truncated = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
    CHECK_THROWS_AS(model_from_string(truncated), ParseError);
    try {
      model_from_string(truncated);
    } catch (const ParseError& e) {
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("version mismatch") {
    CHECK_THROWS_AS(model_from_string("penalearn-model v2\n" + good.substr(good.find('\n') + 1)), VersionError);
  }
  SUBCASE("garbage header") { CHECK_THROWS_AS(model_from_string("hello\n"), ParseError); }
  SUBCASE("bad number") {
    std::string bad = good;
    bad.replace(bad.find("layers 2 3 2\n") + 13, 1, "x");
    CHECK_THROWS_AS(model_from_string(bad), ParseError);
  }
  SUBCASE("wrong tensor length") {
    CHECK_THROWS_AS(model_from_string("penalearn-model v1\nlayers 1 1 1\n0 0\n0\n0\n0\n"), ParseError);
  }
}
