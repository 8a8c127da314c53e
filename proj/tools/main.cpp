// altproj: run projection experiments from JSON configs.
//
//   altproj certify --config configs/planes_remotest.json --out out/planes
//   altproj sweep --config configs/sweep_block_epsilon.json

#include "altproj/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("--config", args.config, "experiment config (JSON)")->required();
  sub->add_option("--seed", args.seed, "seed, overrides the config");
  sub->add_option("--out", args.out, "output directory, overrides the config");
}

int run_mode(const Args& args, altproj::Mode mode) {
  altproj::json j = altproj::load_json_file(args.config);
  if (!j.is_object()) throw altproj::ConfigError("config: expected a JSON object");
  if (args.seed) j["seed"] = *args.seed;
  if (args.out) {
    j.erase("output");
    j["out"] = *args.out;
  }
  const altproj::ExperimentConfig cfg = altproj::parse_config(j);
  const altproj::ExperimentResult res = altproj::run_experiment(cfg, mode);
  for (const auto& f : res.files) std::cout << f.string() << "\n";
  if (!res.error.empty()) std::cerr << "error: " << res.error << "\n";
  if (res.summary.contains("failed_checks")) {
    for (const auto& name : res.summary["failed_checks"]) std::cerr << "FAILED " << name.get<std::string>() << "\n";
  }
  return res.exit_code;
}

int run_sweep(const Args& args) {
  const altproj::json j = altproj::load_json_file(args.config);
  std::optional<std::filesystem::path> out;
  if (args.out) out = *args.out;
  const altproj::SweepResult res = altproj::run_sweep(j, args.seed, out);
  std::cout << res.path.string() << "\n";
  for (const auto& cell : res.table["cells"]) {
    if (!cell["produced_output"].get<bool>()) {
      std::cerr << "cell " << cell["cell"].get<std::size_t>() << ": " << cell.value("error", std::string("no output"))
                << "\n";
    }
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating, remotest and greedy projection experiments"};
  app.require_subcommand(1);
  Args args;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"construct", "build the family and write family.json"},
      {"simulate", "run the engine and write the trajectory"},
      {"measure", "compute the requested quantities"},
      {"certify", "run everything and check the requested certifications"},
      {"sweep", "run a template config over a parameter grid"},
  };
  for (const auto& s : subs) add_common(app.add_subcommand(s.name, s.help), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : altproj::exit_code::config_error;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "sweep") return run_sweep(args);
    return run_mode(args, altproj::mode_from_string(name));
  } catch (const altproj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return altproj::exit_code::config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return altproj::exit_code::failed;
  }
}
