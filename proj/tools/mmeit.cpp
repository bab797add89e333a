// mmeit: run, list, validate and sweep scenarios.
//
// Every command prints one JSON object on stdout. Failures print
// {"status": "error", "error": {...}} and exit nonzero:
//   1 configuration or run error, 2 usage error, 3 some sweep members failed.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mmeit/builtin_scenarios.hpp"
#include "mmeit/config.hpp"
#include "mmeit/error.hpp"
#include "mmeit/runner.hpp"

namespace {

using nlohmann::ordered_json;
namespace cfg = mmeit::config;

int print(const ordered_json& j, int code) {
  std::cout << j.dump(2) << '\n';
  return code;
}

int fail(std::string_view kind, const std::string& message, const std::string& field = {}) {
  ordered_json err{{"kind", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  return print({{"status", "error"}, {"error", err}}, kind == "usage" ? 2 : 1);
}

cfg::ScenarioConfig load(const std::string& ref) {
  if (std::filesystem::exists(ref)) return cfg::load_config(ref);
  if (mmeit::scenarios::builtin_yaml(ref)) return mmeit::scenarios::load_builtin(ref);
  throw mmeit::Error(mmeit::ErrorKind::io, "no config file or shipped scenario named '" + ref + "'");
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char ch : text) {
    if (ch == ',') {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

int report(const cfg::ScenarioConfig& config, const std::vector<mmeit::runner::RunRecord>& records,
           const std::filesystem::path& dir) {
  std::size_t failed = 0;
  ordered_json errors = ordered_json::array();
  for (const auto& r : records) {
    if (r.ok()) continue;
    ++failed;
    errors.push_back({{"run_index", r.run_index},
                      {"kind", std::string(mmeit::to_string(r.error->kind))},
                      {"message", r.error->message}});
  }
  ordered_json j;
  if (failed == 0) {
    j["status"] = "ok";
  } else if (failed < records.size()) {
    j["status"] = "partial";
  } else {
    j["status"] = "error";
  }
  j["scenario"] = config.name;
  j["output_dir"] = dir.string();
  j["runs"] = records.size();
  j["failed"] = failed;
  if (failed) {
    j["errors"] = errors;
    if (failed == records.size()) {
      j["error"] = errors.front();
      return print(j, 1);
    }
    return print(j, 3);
  }
  return print(j, 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimode EIT propagation simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(mmeit::runner::version()));

  std::string out_dir;
  std::size_t workers = 1;
  std::string resolution = "default";
  app.add_option("--out", out_dir, "Output directory (default: <outputs.directory>/<scenario name>)");
  app.add_option("--workers", workers, "Concurrent sweep members")->check(CLI::PositiveNumber);
  app.add_option("--resolution", resolution, "Grid resolution")
      ->check(CLI::IsMember({"coarse", "default", "fine"}));

  std::string config_ref;
  auto* run = app.add_subcommand("run", "Run a scenario file or shipped scenario (and its sweep, if any)");
  run->add_option("config", config_ref, "Config path or shipped scenario name")->required();

  auto* list = app.add_subcommand("list", "List shipped scenarios");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config, including its sweep members");
  validate->add_option("config", config_ref, "Config path or shipped scenario name")->required();

  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter of a config");
  sweep->add_option("config", config_ref, "Config path or shipped scenario name")->required();
  sweep->add_option("--param", param, "Dotted parameter path, e.g. control.0.amplitude")->required();
  sweep->add_option("--values", values, "Comma-separated values with units, e.g. \"1 MHz,2 MHz\"")->required();

  std::string show_name;
  auto* show = app.add_subcommand("show", "Print the YAML of a shipped scenario");
  show->add_option("name", show_name, "Shipped scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    mmeit::runner::RunOptions options;
    options.workers = workers;
    options.resolution = cfg::resolution_from_string(resolution);

    if (*list) {
      ordered_json items = ordered_json::array();
      for (const auto& s : mmeit::scenarios::builtin()) {
        const auto c = cfg::parse_config(s.yaml);
        items.push_back({{"name", c.name},
                         {"description", c.description},
                         {"runs", c.sweep ? c.sweep->size() : 1},
                         {"runtime_budget_s", c.runtime_budget}});
      }
      return print({{"status", "ok"}, {"scenarios", items}}, 0);
    }

    if (*show) {
      const auto yaml = mmeit::scenarios::builtin_yaml(show_name);
      if (!yaml) return fail("invalid_argument", "unknown shipped scenario '" + show_name + "'");
      std::cout << *yaml;
      return 0;
    }

    const cfg::ScenarioConfig config = load(config_ref);
    const std::filesystem::path dir =
        out_dir.empty() ? std::filesystem::path(config.outputs.directory) / config.name : std::filesystem::path(out_dir);
    options.out_dir = dir;

    if (*validate) {
      std::size_t n_runs = 1;
      ordered_json member_errors = ordered_json::array();
      if (config.sweep) {
        const auto members = cfg::expand_sweep(config, *config.sweep);
        n_runs = members.size();
        for (const auto& m : members) {
          if (!m.config) member_errors.push_back({{"run_index", m.index}, {"message", m.error}});
        }
      }
      ordered_json j{{"status", member_errors.empty() ? "ok" : "error"},
                     {"scenario", config.name},
                     {"config_hash", cfg::config_hash(config)},
                     {"runs", n_runs}};
      if (!member_errors.empty()) {
        j["error"] = {{"kind", "validation"}, {"message", "some sweep members do not validate"}};
        j["members"] = member_errors;
        return print(j, 1);
      }
      return print(j, 0);
    }

    if (*run) return report(config, mmeit::runner::run(config, options), dir);

    if (*sweep) {
      cfg::SweepSpec spec;
      spec.axes.push_back({param, split_csv(values)});
      return report(config, mmeit::runner::run_sweep(config, spec, options), dir);
    }
  } catch (const mmeit::ValidationError& e) {
    return fail("validation", e.what(), e.field());
  } catch (const mmeit::Error& e) {
    return fail(mmeit::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return fail("usage", "no command given");
}
