// Command-line front end: scenario files in, CSV/JSON artifact bundles out.
#include <algorithm>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "swarm/scenario.hpp"

namespace sc = swarm::scenario;

namespace {

struct Globals {
  std::string config;
  std::string out;
  int grid = 0;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool print_defaults = false;
  bool print_schema = false;
};

void drop_default(sc::ScenarioConfig& c, const std::string& path) {
  auto& d = c.defaults_applied;
  d.erase(std::remove(d.begin(), d.end(), path), d.end());
}

sc::ScenarioConfig load(const Globals& g, const std::string& path) {
  if (path.empty()) throw swarm::ConfigError("--config is required for this command");
  auto c = sc::parse_config_file(path);
  if (!g.out.empty()) {
    c.outputs.dir = g.out;
    drop_default(c, "outputs.dir");
  }
  if (g.grid > 0) {
    c.grid.n_u = c.grid.n_v = g.grid;
    drop_default(c, "grid.n_u");
    drop_default(c, "grid.n_v");
  }
  if (g.seed && c.perturbation) {
    c.perturbation->spec.master_seed = *g.seed;
    drop_default(c, "perturbation.master_seed");
  }
  return c;
}

void emit(const sc::ScenarioConfig& c, const std::vector<sc::Artifact>& files, const std::string& command) {
  sc::write_bundle(c.outputs.dir, files, command, c);
  for (const auto& f : files) std::cout << (std::filesystem::path(c.outputs.dir) / f.name).string() << "\n";
}

int fail(const std::string& kind, const std::string& message, int code) {
  sc::json err = {{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed phased-array design toolkit"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  Globals g;
  app.add_option("--config", g.config, "scenario file (JSON)");
  app.add_option("--out", g.out, "output directory (overrides outputs.dir)");
  app.add_option("--grid", g.grid, "samples per axis of the angular grid")->check(CLI::Range(3, 1 << 14));
  app.add_option("--seed", g.seed, "Monte Carlo master seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_flag("--print-defaults", g.print_defaults, "print every default and exit");
  app.add_flag("--print-schema", g.print_schema, "print the config schema and exit");

  auto* geometry = app.add_subcommand("geometry", "element positions CSV");
  auto* pattern = app.add_subcommand("pattern", "array-factor CSV and sidecar per beam");
  auto* metrics = app.add_subcommand("metrics", "HPBW, directivity, sidelobe and grating-lobe metrics");
  auto* linkbudget = app.add_subcommand("linkbudget", "downlink budget JSON");
  auto* perturb = app.add_subcommand("perturb", "Monte Carlo degradation statistics");
  auto* run = app.add_subcommand("run", "full artifact bundle");

  auto* sweep = app.add_subcommand("sweep", "long-form CSV over one numeric parameter");
  std::string param;
  std::vector<double> values;
  sweep->add_option("--param", param, "dotted config path, e.g. geometry.n_platforms")->required();
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',')->required();

  auto* compare = app.add_subcommand("compare", "side-by-side design table");
  std::vector<std::string> designs;
  compare->add_option("designs", designs, "scenario files, one per design")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (g.print_schema) {
      std::cout << sc::schema().dump(2) << "\n";
      return 0;
    }
    if (g.print_defaults) {
      std::cout << sc::defaults().dump(2) << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 2;
    }
    sc::RunOptions opt;
    opt.threads = g.threads ? g.threads : std::max(1u, std::thread::hardware_concurrency());

    if (*compare) {
      std::vector<std::pair<std::string, sc::ScenarioConfig>> list;
      for (const auto& path : designs) list.emplace_back(std::filesystem::path(path).stem().string(), load(g, path));
      const auto table = sc::compare_designs(list, opt);
      const std::string dir = g.out.empty() ? list.front().second.outputs.dir : g.out;
      sc::write_bundle(dir, {{"compare.csv", table.csv()}, {"compare.json", table.json_text()}}, "compare",
                       std::nullopt);
      std::cout << table.csv();
      return 0;
    }

    const auto c = load(g, g.config);
    if (*geometry) {
      emit(c, {sc::geometry_artifact(c)}, "geometry");
    } else if (*pattern) {
      emit(c, sc::pattern_artifacts(c, opt), "pattern");
    } else if (*metrics) {
      const auto files = sc::metrics_artifacts(c, opt);
      emit(c, files, "metrics");
    } else if (*linkbudget) {
      const auto file = sc::link_artifact(c);
      emit(c, {file}, "linkbudget");
    } else if (*perturb) {
      emit(c, sc::perturbation_artifacts(c, opt), "perturb");
    } else if (*run) {
      emit(c, sc::build_bundle(c, opt), "run");
    } else if (*sweep) {
      const std::string csv = sc::sweep(c, param, values, opt);
      emit(c, {{"sweep.csv", csv}}, "sweep");
    }
    return 0;
  } catch (const swarm::IoError& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const swarm::Error& e) {
    return fail(e.kind(), e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 2);
  }
}
