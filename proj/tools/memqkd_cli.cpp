// memqkd: command-line driver for the memory-assisted MDI-QKD simulator.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "memqkd/commands.hpp"
#include "memqkd/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> cycles;
  std::optional<unsigned> threads;
  std::string out;
};

memqkd::ScenarioConfig resolve(const GlobalFlags& flags) {
  if (!flags.config.empty() && !flags.preset.empty()) {
    throw memqkd::ConfigError("--config and --preset are mutually exclusive");
  }
  memqkd::ScenarioConfig cfg;
  if (!flags.preset.empty()) cfg = memqkd::load_preset(flags.preset);
  if (!flags.config.empty()) cfg = memqkd::load_scenario(flags.config);
  if (flags.seed) cfg.run.seed = *flags.seed;
  if (flags.cycles) cfg.run.cycles = *flags.cycles;
  if (flags.threads) cfg.run.threads = *flags.threads;
  cfg.validate();
  return cfg;
}

// CSV goes to --out when given (report on stdout), otherwise CSV on stdout
// and the report on stderr.
void emit(const memqkd::CommandOutput& result, const std::string& out) {
  if (out.empty()) {
    std::cout << result.csv;
    std::cerr << result.summary;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + out + "'");
  file << result.csv;
  if (!file.flush()) throw std::runtime_error("failed writing '" + out + "'");
  std::cout << result.summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-assisted MDI-QKD simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "Scenario file (INI)");
  app.add_option("--preset", flags.preset, "Compiled-in scenario preset");
  app.add_option("--seed", flags.seed, "Session seed (overrides [run] seed)");
  app.add_option("--cycles", flags.cycles, "Memory cycles (overrides [run] cycles)");
  app.add_option("--threads", flags.threads, "Worker threads (results do not depend on it)");
  app.add_option("--out", flags.out, "Write CSV to this file");

  auto* simulate = app.add_subcommand("simulate", "Run one session at the configured point");

  auto* sweep = app.add_subcommand("sweep", "Run one session per sweep value");
  std::string axis;
  std::optional<std::string> values;
  sweep->add_option("--axis", axis, "N or n_m (overrides [run] sweep_axis)");
  sweep->add_option("--values", values, "Comma-separated values (overrides [run] sweep_values)");

  auto* truth = app.add_subcommand("truth-table", "Parity of forced two-photon cycles, ideal noise");
  std::uint64_t trials = 10'000;
  truth->add_option("--trials", trials, "Cycles per input pair and frame");

  auto* chsh = app.add_subcommand("chsh", "CHSH session over all eight input states");

  auto* rates = app.add_subcommand("rates", "Analytic key-rate report");
  memqkd::RatesQuery query;
  rates->add_option("--qber", query.qber, "QBER maximum-likelihood value");
  rates->add_option("--sigma", query.sigma, "QBER posterior width");
  rates->add_option("--eta", query.eta, "Heralding efficiency");
  rates->add_option("--n-pi", query.n_pi, "Pi pulses per cycle");
  rates->add_option("--n-sub", query.n_sub, "Qubits per free-precession interval");
  rates->add_option("--bias", query.basis_bias, "X-basis probability (0.99 for 99:1)");
  rates->add_option("--p-ab", query.p_ab, "Effective channel transmission");
  rates->add_flag("--exact-plob", query.exact_plob, "Compare against -log2(1-p)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      emit(memqkd::cmd_simulate(resolve(flags)), flags.out);
    } else if (sweep->parsed()) {
      memqkd::ScenarioConfig cfg = resolve(flags);
      if (!axis.empty()) cfg.run.sweep_axis = memqkd::parse_sweep_axis(axis);
      if (values) {
        // Same list syntax as config files.
        cfg.run.sweep_values =
            memqkd::parse_scenario("[run]\nsweep_values = " + *values + "\n").run.sweep_values;
      }
      emit(memqkd::cmd_sweep(cfg), flags.out);
    } else if (truth->parsed()) {
      const std::uint64_t seed = flags.seed.value_or(memqkd::kDefaultSeed);
      emit(memqkd::cmd_truth_table(seed, trials), flags.out);
    } else if (chsh->parsed()) {
      emit(memqkd::cmd_chsh(resolve(flags)), flags.out);
    } else if (rates->parsed()) {
      emit(memqkd::cmd_rates(query), flags.out);
    }
  } catch (const memqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
