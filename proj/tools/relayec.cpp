// SPDX-License-Identifier: Apache-2.0
//
// relayec: regenerates the data behind the relay power-allocation figures and
// the solver timing benchmark.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relayec/experiment.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kIoError = 2;

void print_bench_summary(const std::vector<relayec::BenchCell>& cells, std::FILE* f) {
  std::fprintf(f, "%-28s %12s %12s %8s\n", "cell", "exact_ms", "approx_ms", "ratio");
  for (const auto& c : cells) {
    const std::string label = std::string(relayec::to_string(c.scenario.mode)) + " " + c.scenario.label;
    std::fprintf(f, "%-28s %12.4f %12.4f %8.2f\n", label.c_str(), 1e3 * c.exact_mean_s, 1e3 * c.approx_mean_s,
                 c.ratio());
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace relayec;
  CLI::App app{"Effective capacity of two-way HD/FD relays with short packets"};
  app.set_help_flag("-h,--help", "Print this help and exit");

  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed, samples;
  std::optional<unsigned> threads;
  std::optional<int> repeats;
  std::optional<std::string> mode, omega, w, d_a, out, format, method;
  bool paper_defaults = false;
  bool timing = false;

  app.add_option("command", command, "fig2 | fig3 | fig4 | fig5 | fig6 | fig7 | fig8 | bench")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "bench"}));
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "Channel seed");
  app.add_option("--samples", samples, "Channel samples per scenario");
  app.add_option("--mode", mode, "hd | fd (fixes the mode for every curve)");
  app.add_option("--omega", omega, "Residual self-interference coefficient (fixes it for every curve)");
  app.add_option("--w", w, "Weight of node A (fixes it for every curve)");
  app.add_option("--d-a", d_a, "Normalized A-relay distance (fixes it for every curve)");
  app.add_option("--out", out, "Output file (default: stdout)");
  app.add_option("--format", format, "csv | json");
  app.add_option("--method", method, "exact | approx");
  app.add_option("--threads", threads, "Worker threads (0: all cores)");
  app.add_option("--repeats", repeats, "bench: solves per cell");
  app.add_flag("--timing", timing, "Add wall-time columns (output then differs between runs)");
  app.add_flag("--paper-defaults", paper_defaults,
               "Ignore scenario keys in --config and keep the built-in scenario for this subcommand");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  ExperimentConfig cfg;
  try {
    cfg = default_config(parse_command(command));
    if (!config_path.empty()) load_config_file(cfg, config_path, !paper_defaults);
    if (seed) apply_setting(cfg, "seed", std::to_string(*seed));
    if (samples) apply_setting(cfg, "samples", std::to_string(*samples));
    if (threads) apply_setting(cfg, "threads", std::to_string(*threads));
    if (repeats) apply_setting(cfg, "repeats", std::to_string(*repeats));
    if (mode) pin_setting(cfg, "mode", *mode);
    if (omega) pin_setting(cfg, "omega", *omega);
    if (w) {
      if (cfg.axis == "w") throw ConfigError("--w: this subcommand sweeps w");
      pin_setting(cfg, "w", *w);
    }
    if (d_a) pin_setting(cfg, "d_a", *d_a);
    if (out) apply_setting(cfg, "out", *out);
    if (format) apply_setting(cfg, "format", *format);
    if (method) apply_setting(cfg, "method", *method);
    if (timing) cfg.timing = true;
    validate(cfg);
  } catch (const ConfigIoError& e) {
    std::cerr << "relayec: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "relayec: " << e.what() << '\n';
    return kConfigError;
  }

  Table table;
  try {
    if (cfg.command == Command::Bench) {
      const auto cells = run_bench_cells(cfg);
      print_bench_summary(cells, cfg.out.empty() ? stderr : stdout);
      table = bench_table(cells, cfg.timing);
    } else {
      table = run_experiment(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "relayec: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (cfg.out.empty()) {
      if (table.rows.empty()) throw EmitError("table: no rows to write");
      write_table(std::cout, table, cfg.format);
      std::cout.flush();
      if (!std::cout) throw EmitError("write to stdout failed");
    } else {
      emit_table(table, cfg.out, cfg.format);
    }
  } catch (const std::exception& e) {
    std::cerr << "relayec: " << e.what() << '\n';
    return kIoError;
  }
  return 0;
}
