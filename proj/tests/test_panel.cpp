#include <doctest.h>

#include <sstream>

#include "synth/errors.hpp"
#include "synth/panel.hpp"

using synth::CsvSchema;
using synth::IngestError;
using synth::ConfigError;
using synth::Panel;

namespace {

// 3 units x 4 periods, complete.
const char* kSmallPanel =
    "unit,time,outcome\n"
    "west,1,1.5\n"
    "west,2,2.5\n"
    "west,3,3.5\n"
    "west,4,4.5\n"
    "a,1,1.0\n"
    "a,2,2.0\n"
    "a,3,3.0\n"
    "a,4,4.0\n"
    "b,1,0.5\n"
    "b,2,1.5\n"
    "b,3,2.5\n"
    "b,4,3.5\n";

Panel load_from_string(const std::string& text, const std::string& marker,
                       CsvSchema schema = {}) {
  std::istringstream in(text);
  return synth::load_panel(in, schema, marker);
}

}  // namespace

TEST_CASE("well-formed panel round-trips") {
  const Panel panel = load_from_string(kSmallPanel, "2");
  CHECK(panel.num_donors() == 2);
  CHECK(panel.num_periods() == 4);
  CHECK(panel.t0 == 2);
  CHECK(panel.units[0] == "west");
  CHECK(panel.outcomes(0, 0) == 1.5);
  CHECK(panel.outcomes(3, 2) == 3.5);
}

TEST_CASE("missing cell is rejected with the cell named") {
  std::string broken = kSmallPanel;
  const auto pos = broken.find("a,3,3.0\n");
  broken.erase(pos, 8);
  try {
    load_from_string(broken, "2");
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    const std::string what = e.what();
    CHECK(what.find("a") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);
  }
}

TEST_CASE("duplicate row is rejected") {
  std::string broken = kSmallPanel;
  broken += "b,4,9.9\n";
  CHECK_THROWS_AS(load_from_string(broken, "2"), IngestError);
}

TEST_CASE("empty outcome cell is rejected") {
  std::string broken = kSmallPanel;
  const auto pos = broken.find("b,2,1.5");
  broken.replace(pos, 7, "b,2,");
  CHECK_THROWS_AS(load_from_string(broken, "2"), IngestError);
}

TEST_CASE("unknown t0 marker") {
  CHECK_THROWS_AS(load_from_string(kSmallPanel, "1999"), ConfigError);
}

TEST_CASE("marker on first or last period violates t0 bounds") {
  CHECK_THROWS_AS(load_from_string(kSmallPanel, "1"), ConfigError);
  CHECK_THROWS_AS(load_from_string(kSmallPanel, "4"), ConfigError);
}

TEST_CASE("integer period labels sort numerically") {
  const char* shuffled =
      "unit,time,outcome\n"
      "t,10,10\nt,2,2\nt,1,1\n"
      "d,10,10\nd,2,2\nd,1,1\n";
  const Panel panel = load_from_string(shuffled, "2");
  CHECK(panel.times == std::vector<std::string>{"1", "2", "10"});
  CHECK(panel.outcomes(2, 0) == 10.0);
}

TEST_CASE("treated override via schema") {
  CsvSchema schema;
  schema.treated = "b";
  const Panel panel = load_from_string(kSmallPanel, "2", schema);
  CHECK(panel.units[0] == "b");
  CHECK(panel.units[1] == "west");
  CHECK(panel.outcomes(0, 0) == 0.5);
}

TEST_CASE("write and reload is bit-exact") {
  std::string noisy =
      "unit,time,outcome\n"
      "t,1,0.1\nt,2,0.30000000000000004\nt,3,1e-17\n"
      "d,1,-2.5000000000000001e+100\nd,2,3.141592653589793\nd,3,7\n";
  const Panel first = load_from_string(noisy, "2");
  std::ostringstream out;
  synth::write_panel(first, out);
  const Panel second = load_from_string(out.str(), "2");
  CHECK(first.outcomes == second.outcomes);
  CHECK(first.units == second.units);
  CHECK(first.times == second.times);
}

TEST_CASE("covariates averaged over pre period") {
  const char* with_covariates =
      "unit,time,outcome,gdp\n"
      "t,1,1,10\nt,2,2,20\nt,3,3,99\n"
      "d,1,1,4\nd,2,2,6\nd,3,3,99\n";
  const Panel panel = load_from_string(with_covariates, "2");
  REQUIRE(panel.predictor_names == std::vector<std::string>{"gdp"});
  CHECK(panel.predictors(0, 0) == doctest::Approx(15.0));  // mean of 10, 20
  CHECK(panel.predictors(0, 1) == doctest::Approx(5.0));
}

TEST_CASE("json export carries shape") {
  const Panel panel = load_from_string(kSmallPanel, "2");
  const std::string json = synth::panel_to_json(panel);
  CHECK(json.find("\"t0\": 2") != std::string::npos);
  CHECK(json.find("west") != std::string::npos);
}

TEST_CASE("tail slice keeps trailing window") {
  const Panel panel = load_from_string(kSmallPanel, "3");
  const Panel sliced = synth::tail_slice(panel, 2, 1);
  CHECK(sliced.num_periods() == 3);
  CHECK(sliced.t0 == 2);
  CHECK(sliced.times.front() == "2");
  CHECK(sliced.outcomes(0, 0) == 2.5);
  CHECK_THROWS_AS(synth::tail_slice(panel, 4, 1), ConfigError);
}
