#include "altproj/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

namespace altproj {

void set_dotted(json& j, const std::string& path, const json& value) {
  if (path.empty()) throw ConfigError("grid: empty path");
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("grid: malformed path \"" + path + "\"");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("grid: \"" + path + "\" passes through a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

namespace {

struct Cell {
  json params = json::object();
  json config;
  std::filesystem::path dir;
  int exit_code = exit_code::ok;
  bool produced = false;
  std::string error;
  json summary;
};

void run_cell(Cell& cell, Mode mode) {
  try {
    const ExperimentConfig cfg = parse_config(cell.config);
    const ExperimentResult r = run_experiment(cfg, mode);
    cell.exit_code = r.exit_code;
    cell.produced = !r.files.empty();
    cell.error = r.error;
    cell.summary = r.summary;
  } catch (const ConfigError& e) {
    cell.exit_code = exit_code::config_error;
    cell.error = e.what();
  } catch (const std::exception& e) {
    cell.exit_code = exit_code::failed;
    cell.error = e.what();
  }
}

}  // namespace

SweepResult run_sweep(const json& sc, std::optional<std::uint64_t> seed_override,
                      std::optional<std::filesystem::path> out_override) {
  if (!sc.is_object()) throw ConfigError("sweep: expected a JSON object");
  for (const auto& [key, _] : sc.items()) {
    if (key != "template" && key != "grid" && key != "mode" && key != "threads" && key != "out" &&
        key != "schema_version") {
      throw ConfigError("sweep: unknown key \"" + key + "\"");
    }
  }
  if (!sc.contains("template") || !sc["template"].is_object()) throw ConfigError("sweep: template must be an object");
  if (!sc.contains("grid") || !sc["grid"].is_object() || sc["grid"].empty()) {
    throw ConfigError("sweep: grid must be a nonempty object");
  }
  Mode mode = Mode::certify;
  if (sc.contains("mode")) {
    if (!sc["mode"].is_string()) throw ConfigError("sweep.mode: expected a string");
    mode = mode_from_string(sc["mode"].get<std::string>());
  }
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (sc.contains("threads")) {
    if (!sc["threads"].is_number_unsigned() || sc["threads"].get<std::size_t>() < 1) {
      throw ConfigError("sweep.threads: expected a positive integer");
    }
    threads = sc["threads"].get<std::size_t>();
  }
  std::filesystem::path out = "sweep_out";
  if (sc.contains("out")) {
    if (!sc["out"].is_string()) throw ConfigError("sweep.out: expected a path");
    out = sc["out"].get<std::string>();
  }
  if (out_override) out = *out_override;

  // nlohmann objects iterate in sorted key order.
  std::vector<std::pair<std::string, json>> axes;
  std::size_t n_cells = 1;
  for (const auto& [key, values] : sc["grid"].items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("sweep.grid." + key + ": expected a nonempty array");
    if (key == "out" || key.rfind("output", 0) == 0) throw ConfigError("sweep.grid: output paths are set per cell");
    axes.emplace_back(key, values);
    n_cells *= values.size();
    if (n_cells > 100000) throw ConfigError("sweep.grid: more than 100000 cells");
  }

  json base = sc["template"];
  if (seed_override) base["seed"] = *seed_override;
  base.erase("out");
  base.erase("output");

  std::vector<Cell> cells(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    Cell& cell = cells[i];
    cell.config = base;
    std::size_t rest = i;
    // Last axis varies fastest.
    std::vector<std::size_t> pick(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      pick[a] = rest % axes[a].second.size();
      rest /= axes[a].second.size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const json& v = axes[a].second[pick[a]];
      cell.params[axes[a].first] = v;
      set_dotted(cell.config, axes[a].first, v);
    }
    char name[32];
    std::snprintf(name, sizeof name, "cell_%03zu", i);
    cell.dir = out / name;
    cell.config["out"] = cell.dir.string();
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_cells; i = next++) run_cell(cells[i], mode);
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(threads, n_cells);
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult res;
  json keys = json::array();
  for (const auto& a : axes) keys.push_back(a.first);
  json rows = json::array();
  bool all = true;
  for (std::size_t i = 0; i < n_cells; ++i) {
    const Cell& c = cells[i];
    all = all && c.produced;
    json row = {{"cell", i},
                {"params", c.params},
                {"dir", c.dir.string()},
                {"exit_code", c.exit_code},
                {"produced_output", c.produced}};
    if (!c.error.empty()) row["error"] = c.error;
    if (!c.summary.is_null()) row["summary"] = c.summary;
    rows.push_back(row);
  }
  res.table = {{"schema_version", kSchemaVersion},
               {"mode", to_string(mode)},
               {"parameters", keys},
               {"cells", rows},
               {"all_produced_output", all}};
  std::filesystem::create_directories(out);
  res.path = out / "sweep.json";
  std::ofstream os(res.path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + res.path.string());
  os << res.table.dump(2) << "\n";
  res.exit_code = all ? exit_code::ok : exit_code::failed;
  return res;
}

}  // namespace altproj
