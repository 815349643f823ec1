// ncslice: run slicing sweeps for the RLNC and HARQ/ARQ schemes, or check
// the closed-form models against the simulator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncslice/experiments.hpp"

#ifndef NCSLICE_VERSION
#define NCSLICE_VERSION "unknown"
#endif

namespace ex = ncslice::experiments;

namespace {

struct Flags {
  std::optional<std::string> scenario, protocol, sweep, config, out, goodput_mode;
  std::optional<std::size_t> iterations, packets;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma1, gamma2, sim_gamma1;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--scenario", f.scenario, "Preset: low-rtt-fixed, low-rtt-random, high-rtt")
      ->check(CLI::IsMember(ex::preset_names()));
  app->add_option("--config", f.config, "TOML file layered on top of the preset")->check(CLI::ExistingFile);
  app->add_option("--iterations", f.iterations, "Independent iterations")->check(CLI::PositiveNumber);
  app->add_option("--packets", f.packets, "Source packets per iteration")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--gamma1", f.gamma1, "FEC rate (default 1/(1-p))");
  app->add_option("--gamma2", f.gamma2, "FB rate (default 2/(1-p))");
  app->add_option("--goodput-mode", f.goodput_mode, "busy | elapsed")->check(CLI::IsMember({"busy", "elapsed"}));
  app->add_option("--threads", f.threads, "Worker threads for iterations (0 = all cores)");
}

ex::ExperimentConfig resolve(const Flags& f, std::optional<toml::table>& file) {
  if (f.config) file = ex::parse_toml_file(*f.config);
  std::string scenario = "low-rtt-fixed";
  if (file)
    if (auto s = ex::toml_scenario(*file)) scenario = *s;
  if (f.scenario) scenario = *f.scenario;

  ex::ExperimentConfig c = ex::preset(scenario);
  if (file) ex::apply_toml(c, *file);
  c.scenario = scenario;
  if (f.protocol) c.protocols = ex::parse_protocols(*f.protocol);
  if (f.sweep) std::tie(c.sweep_first, c.sweep_last) = ex::parse_sweep(*f.sweep);
  if (f.iterations) c.iterations = *f.iterations;
  if (f.packets) c.packets = *f.packets;
  if (f.seed) c.seed = *f.seed;
  if (f.gamma1) c.gamma1 = *f.gamma1;
  if (f.gamma2) c.gamma2 = *f.gamma2;
  if (f.sim_gamma1) c.sim_gamma1 = *f.sim_gamma1;
  if (f.goodput_mode) c.goodput_mode = ex::parse_goodput_mode(*f.goodput_mode);
  if (f.threads) c.threads = *f.threads;
  c.validate();
  return c;
}

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << body;
}

int cmd_run(const Flags& f) {
  std::optional<toml::table> file;
  const auto cfg = resolve(f, file);
  const auto rows = ex::run_experiment(cfg);

  std::ostringstream csv;
  ex::write_csv(csv, rows);
  const std::filesystem::path out = f.out.value_or("results.csv");
  write_text(out, csv.str());

  nlohmann::json meta;
  meta["version"] = NCSLICE_VERSION;
  meta["seed"] = cfg.seed;
  meta["config"] = ex::to_json(cfg);
  meta["csv"] = out.filename().string();
  meta["rows"] = rows.size();
  auto sidecar = out;
  sidecar.replace_extension(".json");
  write_text(sidecar, meta.dump(2) + "\n");

  std::printf("%-9s %5s %5s %10s %10s %10s %10s %12s %8s\n", "protocol", "index", "links", "mean_ppd",
              "mean_iod", "iod_sd", "goodput", "completion", "failed");
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::printf("%-9s %5zu %5zu %10.3f %10.3f %10.3f %10.4f %12.1f %8zu\n",
                ncslice::sim::to_string(r.protocol).c_str(), r.slicing_index, r.links_in_slice, m.mean_ppd,
                m.mean_iod, m.iod_stddev, m.goodput, m.completion_time, m.failures);
  }
  std::printf("wrote %s and %s\n", out.string().c_str(), sidecar.string().c_str());
  return 0;
}

int cmd_validate(const Flags& f, std::size_t packets, std::size_t iterations) {
  std::optional<toml::table> file;
  auto cfg = resolve(f, file);
  // Validation has its own sample-size defaults; only explicit settings override them.
  auto in_file = [&](std::string_view key) { return file && file->at_path(key).node() != nullptr; };
  ex::ValidationOptions vo;
  vo.packets = f.packets || in_file("run.packets") ? cfg.packets : packets;
  vo.iterations = f.iterations || in_file("run.iterations") ? cfg.iterations : iterations;
  const auto checks = ex::run_validation(cfg, vo);

  bool all = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& c : checks) {
    std::printf("%s\n", ex::format_check(c).c_str());
    all = all && c.pass;
    report.push_back(ex::to_json(c));
  }
  if (f.out) {
    nlohmann::json doc{{"version", NCSLICE_VERSION}, {"config", ex::to_json(cfg)}, {"checks", report}};
    write_text(*f.out, doc.dump(2) + "\n");
  }
  for (const auto& c : checks)
    if (!c.pass) std::fprintf(stderr, "tolerance breach: %s\n", c.name.c_str());
  std::printf("%s\n", all ? "all checks passed" : "validation FAILED");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slot-level simulator for RLNC vs HARQ/ARQ over sliced multi-link networks"};
  app.set_version_flag("--version", std::string(NCSLICE_VERSION));
  app.require_subcommand(1);

  Flags run_flags, val_flags;
  auto* run = app.add_subcommand("run", "Run a scenario sweep and write CSV + JSON metadata");
  add_common(run, run_flags);
  run->add_option("--protocol", run_flags.protocol, "rlnc | baseline | both")
      ->check(CLI::IsMember({"rlnc", "baseline", "both"}));
  run->add_option("--sweep", run_flags.sweep, "Slicing indices A..B");
  run->add_option("--out", run_flags.out, "CSV path (sidecar gets .json)");

  auto* val = app.add_subcommand("validate", "Compare closed forms with simulation");
  add_common(val, val_flags);
  val->add_option("--out", val_flags.out, "Write the report as JSON");
  val->add_option("--sim-gamma1", val_flags.sim_gamma1, "FEC rate used by the simulator only");
  val->get_option("--packets")->description("Source packets per check (default 100000)");
  val->get_option("--iterations")->description("Iterations per check (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_flags);
    return cmd_validate(val_flags, 100'000, 1);
  } catch (const ncslice::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ncslice::RunAbortError& e) {
    std::fprintf(stderr, "run aborted: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
