#include <doctest.h>

#include "leelab/config.hpp"
#include "leelab/error.hpp"

using namespace leelab;

namespace {

ErrorCode parse_error(const std::string& text, std::string* message = nullptr) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  return ErrorCode::assertion_failed;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    auto c = parse_config("{}");
    CHECK(c.manifold.kind == ManifoldKind::torus);
    CHECK(c.manifold.L1 == doctest::Approx(2 * 3.14159265358979323846));
    CHECK(c.model.mass == 1.0);
    CHECK(c.model.mu_p == 0.5);
    CHECK(c.model.coupling == 1.0);
    CHECK(c.model.n == 1);
    CHECK(c.truncation.lambda_cutoff == 10.0);
    CHECK(c.truncation.prune_uncoupled);
    CHECK_FALSE(c.scan.e_grid.has_value());
    CHECK(c.output.csv());
  }

  TEST_CASE("full document") {
    auto c = parse_config(R"({
      "manifold": {"kind": "sphere", "radius": 2.0, "impurity": [0.3, 1.0]},
      "model": {"m": 2.0, "mu_p": 1.5, "lambda": 0.25, "n": 2},
      "truncation": {"lambda_cutoff": 12, "mode_ceiling": 500, "dense_ceiling": 100,
                     "sector_ceiling": 9000, "prune_uncoupled": false},
      "scan": {"E_grid": {"min": -1, "max": 0.5, "count": 7, "spacing": "linear"},
               "lambda_k": {"min": 10, "max": 1000, "count": 3, "spacing": "log"},
               "pair_count": 4},
      "output": {"directory": "out", "formats": ["json"]}
    })");
    CHECK(c.manifold.kind == ManifoldKind::sphere);
    CHECK(c.manifold.radius == 2.0);
    CHECK(c.manifold.impurity[0] == 0.3);
    CHECK(c.model.n == 2);
    CHECK(c.truncation.sector_ceiling == 9000);
    CHECK_FALSE(c.truncation.prune_uncoupled);
    REQUIRE(c.scan.e_grid.has_value());
    CHECK(c.scan.e_grid->points().size() == 7);
    CHECK(c.scan.e_grid->points().front() == -1.0);
    CHECK(c.scan.e_grid->points().back() == 0.5);
    auto lk = c.scan.lambda_k.points();
    REQUIRE(lk.size() == 3);
    CHECK(lk[1] == doctest::Approx(100.0));
    CHECK(c.scan.pair_count == 4);
    CHECK(c.output.directory == "out");
    CHECK_FALSE(c.output.csv());
  }

  TEST_CASE("canonical form round trips and hashes") {
    auto c = parse_config(R"({"model": {"lambda": 0.5}, "manifold": {"kind": "torus", "L1": 3}})");
    auto j = to_json(c);
    auto again = parse_config(j.dump());
    CHECK(to_json(again) == j);
    CHECK(content_hash(j) == content_hash(to_json(again)));
    CHECK(content_hash(j).size() == 16);
    CHECK(content_hash(j) != content_hash(to_json(parse_config("{}"))));
    auto reordered = parse_config(R"({"manifold": {"L1": 3, "kind": "torus"}, "model": {"lambda": 0.5}})");
    CHECK(content_hash(to_json(reordered)) == content_hash(j));
  }

  TEST_CASE("syntax errors carry line and column") {
    std::string msg;
    CHECK(parse_error("{\n  \"model\": {\n    \"m\": 1,,\n  }\n}", &msg) == ErrorCode::config_error);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }

  TEST_CASE("field errors name the offending field") {
    std::string msg;
    CHECK(parse_error(R"({"model": {"mass": 1}})", &msg) == ErrorCode::config_error);
    CHECK(msg.find("/model/mass") != std::string::npos);
    CHECK(parse_error(R"({"extra": 1})", &msg) == ErrorCode::config_error);
    CHECK(msg.find("/extra") != std::string::npos);
    CHECK(parse_error(R"({"model": {"n": 1.5}})", &msg) == ErrorCode::config_error);
    CHECK(msg.find("/model/n") != std::string::npos);
    CHECK(parse_error(R"({"model": {"mu_p": 1.0}})", &msg) == ErrorCode::config_error);
    CHECK(msg.find("/model") != std::string::npos);
    CHECK(parse_error(R"({"manifold": {"kind": "cube"}})", &msg) == ErrorCode::config_error);
    CHECK(msg.find("/manifold/kind") != std::string::npos);
    CHECK(parse_error(R"({"manifold": {"kind": "torus", "L1": -1}})") == ErrorCode::config_error);
    CHECK(parse_error(R"({"manifold": {"kind": "sphere", "L1": 1}})") == ErrorCode::config_error);
    CHECK(parse_error(R"({"scan": {"lambda_k": {"min": 10, "max": 1, "count": 3}}})") ==
          ErrorCode::config_error);
    CHECK(parse_error(R"({"scan": {"heat_t": {"min": 0, "max": 1, "count": 3, "spacing": "log"}}})") ==
          ErrorCode::config_error);
    CHECK(parse_error(R"({"output": {"formats": ["json", "png"]}})") == ErrorCode::config_error);
    CHECK(parse_error(R"({"truncation": {"mode_ceiling": -4}})") == ErrorCode::config_error);
    CHECK(parse_error("[1, 2]") == ErrorCode::config_error);
  }

  TEST_CASE("missing file") {
    try {
      load_config("/nonexistent/leelab.json");
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config_error);
    }
  }
}
