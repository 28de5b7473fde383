#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drmdp/fixtures.hpp"
#include "drmdp/io.hpp"

using namespace drmdp;

namespace {

const char* kMinimalText = R"JSON({
  "mdp": {
    "horizon": 1,
    "states": [["s_A"], ["s_B", "s_C"]],
    "actions": [{"s_A": ["a_L", "a_R"]}],
    "costs": [{"s_A": {"a_L": [0.0, 0.0], "a_R": [0.0, 0.0]}}],
    "terminal_costs": {"s_B": 1.0, "s_C": 0.0},
    "initial_state": "s_A"
  },
  "ambiguity": [{
    "type": "s_rect",
    "sets": {"s_A": {"pieces": [{"vertices": [[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]]}]}}
  }]
})JSON";

}  // namespace

TEST_CASE("a minimal file parses into the expected shapes") {
  InstanceFile file = parse_instance_text(kMinimalText);
  CHECK(file.mdp.horizon == 1);
  CHECK(file.mdp.states[1].size() == 2);
  CHECK(file.mdp.terminal_cost == Vec{1.0, 0.0});
  REQUIRE(file.ambiguity);
  CHECK(std::holds_alternative<SRectModel>(file.ambiguity->stages[0]));
}

TEST_CASE("serialization round-trips every bundled fixture field by field") {
  for (const std::string& name : fixture_names()) {
    Fixture fx = get_fixture(name);
    const std::string text = serialize_instance_file(fx.file);
    InstanceFile reparsed = parse_instance_text(text);
    CHECK(instance_files_equal(fx.file, reparsed));
    // Byte-identical output across repeated serializations of the same data.
    CHECK(serialize_instance_file(reparsed) == text);
  }
}

TEST_CASE("unknown keys are rejected everywhere") {
  SUBCASE("top level") {
    CHECK_THROWS_WITH_AS(parse_instance_text(R"({"mdp": {}, "extra": 1})"),
                         doctest::Contains("unknown key"), ValidationError);
  }
  SUBCASE("inside the mdp block") {
    std::string text = kMinimalText;
    text.replace(text.find("\"horizon\""), 9, "\"horizons\"");
    CHECK_THROWS_WITH_AS(parse_instance_text(text), doctest::Contains("unknown key"),
                         ValidationError);
  }
  SUBCASE("inside a model block") {
    std::string text = kMinimalText;
    text.replace(text.find("\"sets\""), 6, "\"set\"");
    CHECK_THROWS_AS(parse_instance_text(text), ValidationError);
  }
}

TEST_CASE("malformed documents fail with diagnostics") {
  CHECK_THROWS_WITH_AS(parse_instance_text("{"), doctest::Contains("parse error"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_instance_text("{}"), doctest::Contains("missing key"), ValidationError);
  SUBCASE("unknown state names are flagged") {
    std::string text = kMinimalText;
    text.replace(text.find("\"initial_state\": \"s_A\""), 22, "\"initial_state\": \"s_Z\"");
    CHECK_THROWS_WITH_AS(parse_instance_text(text), doctest::Contains("s_Z"), ValidationError);
  }
  SUBCASE("kernel rows failing the simplex tolerance are rejected") {
    std::string text = R"JSON({
      "mdp": {
        "horizon": 1,
        "states": [["s"], ["t"]],
        "actions": [{"s": ["a"]}],
        "terminal_costs": {"t": 0.0},
        "initial_state": "s"
      },
      "kernel": [{"s": {"a": [0.9]}}]
    })JSON";
    CHECK_THROWS_AS(parse_instance_text(text), ValidationError);
  }
}

TEST_CASE("missing files raise a validation error") {
  CHECK_THROWS_WITH_AS(load_instance_file("/nonexistent/missing.json"),
                       doctest::Contains("cannot open"), ValidationError);
}

TEST_CASE("invalid ambiguity content is rejected at load time") {
  std::string text = kMinimalText;
  // Break a vertex so the composed row sums to 2.
  const std::string needle = "[0.0, 1.0, 1.0, 0.0]";
  text.replace(text.find(needle), needle.size(), "[1.0, 1.0, 1.0, 0.0]");
  CHECK_THROWS_AS(parse_instance_text(text), ValidationError);
}

TEST_CASE("every fixture parses back to a solvable instance") {
  for (const std::string& name : fixture_names()) {
    Fixture fx = get_fixture(name);
    InstanceFile reparsed = parse_instance_text(serialize_instance_file(fx.file));
    CHECK(validate_instance(reparsed.mdp).empty());
    if (reparsed.ambiguity) CHECK(validate_ambiguity(*reparsed.ambiguity, reparsed.mdp).empty());
  }
}
