#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mmeit/builtin_scenarios.hpp"
#include "mmeit/config.hpp"
#include "mmeit/runner.hpp"

using namespace mmeit;
using namespace mmeit::config;
namespace fs = std::filesystem;

namespace {

const std::string kSmall = R"(name: small
medium:
  gamma: 6 MHz
  optical_depth: 10
  length: 12 cm
grid:
  duration: 40 us
  dt: 20 ns
  z_slices: 20
control:
  - amplitude: 5 MHz
probe:
  amplitude: 10 kHz
  matched: true
  envelope: {shape: gaussian, center: 6 us, duration: 3 us}
solver: both
measurements: [transmission, delay, overlap, margins, spectrum, zero_span, waveform]
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mmeit_runner_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("single run produces scalars and tables") {
  const auto c = parse_config(kSmall);
  const auto r = runner::execute(c);
  REQUIRE(r.ok());
  CHECK(r.config_hash == config_hash(c));
  CHECK(r.scalar("full.transmission").value() > 0.95);
  CHECK(r.scalar("cross_solver.relative_l2").value() < 0.05);
  CHECK(r.scalar("margin_a").value() > 10.0);
  CHECK_FALSE(r.scalar("no.such.scalar"));
  for (const char* t : {"transmission", "delay", "overlap", "margins", "spectrum", "zero_span", "waveform",
                        "cross_solver"})
    CHECK(r.tables.count(t) == 1);
  CHECK(r.tables.at("delay").columns.at(1) == "delay_s");
  CHECK(r.provenance.n_time_samples == c.grid.n_samples());
  CHECK(r.provenance.z_slices == 20);
  CHECK(r.provenance.version == runner::version());
}

TEST_CASE("empty measurement list gives provenance only") {
  std::string y = kSmall;
  y.replace(y.find("[transmission"), y.find(']', y.find("[transmission")) - y.find("[transmission") + 1, "[]");
  const auto r = runner::execute(parse_config(y));
  REQUIRE(r.ok());
  CHECK(r.tables.empty());
  CHECK(r.scalars.empty());
  CHECK(r.provenance.n_time_samples > 0);
}

TEST_CASE("solver failures are captured with their kind") {
  std::string y = kSmall;
  y.replace(y.find("amplitude: 5 MHz"), 16, "amplitude: 0.2 MHz");
  const auto r = runner::execute(parse_config(y));
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == ErrorKind::window_overrun);
  runner::RunOptions opt;
  opt.write = false;
  CHECK_THROWS_AS(runner::run_scenario(parse_config(y), opt), Error);
}

TEST_CASE("single-value sweep equals a plain run") {
  const auto c = parse_config(kSmall);
  runner::RunOptions opt;
  opt.write = false;
  const auto plain = runner::run_scenario(c, opt);
  SweepSpec s;
  s.axes.push_back({"control.0.amplitude", {"5 MHz"}});
  const auto swept = runner::run_sweep(c, s, opt);
  REQUIRE(swept.size() == 1);
  CHECK(swept[0].scalars == plain.scalars);
  CHECK(swept[0].config_hash == plain.config_hash);
  for (const auto& [name, table] : plain.tables) CHECK(swept[0].tables.at(name).rows == table.rows);
}

TEST_CASE("sweep members keep order and record failures") {
  const auto c = parse_config(kSmall);
  SweepSpec s;
  s.axes.push_back({"control.0.amplitude", {"6 MHz", "0.2 MHz", "4 MHz", "5 MHz"}});
  runner::RunOptions opt;
  opt.write = false;
  opt.workers = 3;
  const auto records = runner::run_sweep(c, s, opt);
  REQUIRE(records.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(records[i].run_index == i);
  CHECK(records[0].ok());
  CHECK_FALSE(records[1].ok());
  CHECK(records[2].ok());
  CHECK(records[3].ok());
  CHECK(records[0].scalar("full.delay_s").value() < records[2].scalar("full.delay_s").value());
}

TEST_CASE("output files are identical for any worker count") {
  auto c = parse_config(kSmall);
  SweepSpec s;
  s.axes.push_back({"control.0.amplitude", {"4 MHz", "5 MHz", "6 MHz"}});
  c.sweep = s;
  const auto one = scratch("w1");
  const auto three = scratch("w3");
  runner::RunOptions opt;
  opt.out_dir = one;
  runner::run(c, opt);
  opt.out_dir = three;
  opt.workers = 3;
  runner::run(c, opt);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(one)) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
    const auto rel = fs::relative(entry.path(), one);
    CAPTURE(rel.string());
    REQUIRE(fs::exists(three / rel));
    CHECK(slurp(entry.path()) == slurp(three / rel));
    ++compared;
  }
  CHECK(compared >= 10);
  CHECK(fs::exists(one / "sweep_summary.csv"));
  CHECK(fs::exists(one / "runs" / "run_0002.json"));
  CHECK(parse_config(slurp(one / "config.yaml")) == c);
  fs::remove_all(one);
  fs::remove_all(three);
}

TEST_CASE("shipped oracle scenario runs") {
  runner::RunOptions opt;
  opt.write = false;
  opt.resolution = Resolution::coarse;
  const auto records = runner::run(scenarios::load_builtin("beer_lambert"), opt);
  REQUIRE(records.size() == 3);
  for (const auto& r : records) CHECK(r.ok());
}
