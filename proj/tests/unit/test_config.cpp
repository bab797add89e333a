#include <doctest.h>

#include <set>
#include <string>

#include "mmeit/builtin_scenarios.hpp"
#include "mmeit/config.hpp"
#include "mmeit/error.hpp"

using namespace mmeit;
using namespace mmeit::config;

namespace {

const std::string kBase = R"(name: base
medium:
  gamma: 6 MHz
  optical_depth: 10
  length: 12 cm
grid:
  duration: 20 us
  dt: 10 ns
  z_slices: 20
control:
  - amplitude: 5 MHz
probe:
  amplitude: 10 kHz
  matched: true
  envelope: {shape: gaussian, center: 8 us, duration: 3 us}
solver: full
measurements: [transmission]
)";

std::string with_line(std::string yaml, const std::string& line) { return yaml + line + "\n"; }

}  // namespace

TEST_CASE("every shipped scenario round-trips") {
  REQUIRE(scenarios::builtin().size() == 10);
  for (const auto& s : scenarios::builtin()) {
    CAPTURE(s.name);
    const auto c = parse_config(s.yaml);
    CHECK(c.name == s.name);
    const auto text = serialize_config(c);
    const auto again = parse_config(text);
    CHECK(again == c);
    CHECK(serialize_config(again) == text);
    CHECK(config_hash(again) == config_hash(c));
  }
}

TEST_CASE("shipped scenario set") {
  std::set<std::string> names;
  for (const auto& s : scenarios::builtin()) names.emplace(s.name);
  for (const char* n : {"fig1b_comb_scan", "fig1c_transmitted_spectrum", "fig1d_matched_probe",
                        "fig2a_broadband_delay", "fig2b_broadband_storage", "fig3_groupvel", "fig4a_conversion",
                        "fig4b_two_color", "beer_lambert", "dark_state_cw"})
    CHECK(names.count(n) == 1);
  CHECK_THROWS_AS(scenarios::load_builtin("nope"), Error);
}

TEST_CASE("defaults are explicit after parsing") {
  const auto c = parse_config(kBase);
  CHECK(c.grid.velocity_classes == 1);
  CHECK(c.outputs.directory == "out");
  const auto text = serialize_config(c);
  CHECK(text.find("velocity_classes") != std::string::npos);
  CHECK(text.find("runtime_budget") != std::string::npos);
}

TEST_CASE("strict parsing") {
  SUBCASE("unknown key") { CHECK_THROWS_AS(parse_config(with_line(kBase, "colour: blue")), ValidationError); }
  SUBCASE("bare number for a rate") {
    std::string y = kBase;
    y.replace(y.find("6 MHz"), 5, "6e6");
    CHECK_THROWS_AS(parse_config(y), ValidationError);
  }
  SUBCASE("unknown measurement") {
    std::string y = kBase;
    y.replace(y.find("[transmission]"), 14, "[telepathy]");
    CHECK_THROWS_AS(parse_config(y), ValidationError);
  }
  SUBCASE("even velocity class count") {
    std::string y = kBase;
    y.replace(y.find("z_slices: 20"), 12, "z_slices: 20\n  velocity_classes: 4");
    CHECK_THROWS_AS(parse_config(y), ValidationError);
  }
  SUBCASE("adiabatic solver needs a matched probe") {
    std::string y = kBase;
    y.replace(y.find("matched: true"), 13, "matched: false");
    y.replace(y.find("solver: full"), 12, "solver: adiabatic");
    try {
      parse_config(y);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "solver");
    }
  }
  SUBCASE("storage measurement needs a storage section") {
    std::string y = kBase;
    y.replace(y.find("[transmission]"), 14, "[storage]");
    CHECK_THROWS_AS(parse_config(y), ValidationError);
  }
  SUBCASE("empty sweep value list") {
    CHECK_THROWS_AS(parse_config(with_line(kBase, "sweep: {parameter: control.0.amplitude, values: []}")),
                    ValidationError);
  }
  SUBCASE("sweep over a missing path") {
    CHECK_THROWS_AS(parse_config(with_line(kBase, "sweep: {parameter: control.3.amplitude, values: [1 MHz]}")),
                    ValidationError);
  }
}

TEST_CASE("empty measurement list is valid") {
  std::string y = kBase;
  y.replace(y.find("[transmission]"), 14, "[]");
  CHECK(parse_config(y).measurements.empty());
}

TEST_CASE("parameter paths") {
  const auto c = parse_config(kBase);
  CHECK(has_parameter(c, "control.0.amplitude"));
  CHECK(has_parameter(c, "medium.gamma"));
  CHECK(has_parameter(c, "probe.envelope.duration"));
  CHECK_FALSE(has_parameter(c, "control.1.amplitude"));
  CHECK_FALSE(has_parameter(c, "medium"));
  CHECK_FALSE(has_parameter(c, "medium.nothing"));

  const auto d = with_parameter(c, "control.0.amplitude", "7 MHz");
  CHECK(d.control[0].component.amplitude == doctest::Approx(2 * M_PI * 7e6));
  CHECK(config_hash(d) != config_hash(c));
  CHECK_THROWS_AS(with_parameter(c, "control.0.amplitude", "7"), ValidationError);
  CHECK_THROWS_AS(with_parameter(c, "control.9.amplitude", "7 MHz"), ValidationError);
}

TEST_CASE("sweep expansion") {
  const auto c = parse_config(kBase);
  SweepSpec product;
  product.axes.push_back({"control.0.amplitude", {"4 MHz", "5 MHz"}});
  product.axes.push_back({"probe.envelope.duration", {"2 us", "3 us", "4 us"}});
  const auto members = expand_sweep(c, product);
  REQUIRE(members.size() == 6);
  CHECK(product.size() == 6);
  CHECK(members[0].assignments[0].second == "4 MHz");
  CHECK(members[0].assignments[1].second == "2 us");
  CHECK(members[1].assignments[1].second == "3 us");
  CHECK(members[3].assignments[0].second == "5 MHz");
  for (std::size_t i = 0; i < members.size(); ++i) {
    CHECK(members[i].index == i);
    REQUIRE(members[i].config);
    CHECK_FALSE(members[i].config->sweep);
  }

  SweepSpec zip = product;
  zip.zip = true;
  CHECK_THROWS_AS(expand_sweep(c, zip), ValidationError);
  zip.axes[1].values.pop_back();
  const auto zipped = expand_sweep(c, zip);
  REQUIRE(zipped.size() == 2);
  CHECK(zipped[1].assignments[1].second == "3 us");

  SweepSpec bad;
  bad.axes.push_back({"grid.dt", {"10 ns", "1 ms"}});
  const auto mixed = expand_sweep(c, bad);
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].config);
  CHECK_FALSE(mixed[1].config);
  CHECK_FALSE(mixed[1].error.empty());
}

TEST_CASE("resolution scaling") {
  const auto c = parse_config(kBase);
  const auto fine = apply_resolution(c, Resolution::fine);
  CHECK(fine.grid.dt == doctest::Approx(c.grid.dt / 2));
  CHECK(fine.grid.z_slices == 2 * c.grid.z_slices);
  const auto coarse = apply_resolution(c, Resolution::coarse);
  CHECK(coarse.grid.dt == doctest::Approx(c.grid.dt * 2));
  CHECK(coarse.grid.z_slices == c.grid.z_slices / 2);
  CHECK(apply_resolution(c, Resolution::standard) == c);
  CHECK(resolution_from_string("default") == Resolution::standard);
  CHECK(to_string(Resolution::standard) == "default");
  CHECK_THROWS(resolution_from_string("medium"));
}
