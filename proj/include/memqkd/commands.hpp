#pragma once

#include <cstdint>
#include <string>

#include "memqkd/rates.hpp"
#include "memqkd/scenario.hpp"

namespace memqkd {

// Subcommand bodies. Each returns the CSV table (header always present,
// floats with 9 significant digits) and a short text report.

struct CommandOutput {
  std::string csv;
  std::string summary;
};

/// One session at the configured operating point.
CommandOutput cmd_simulate(const ScenarioConfig& config);

/// One session per value of run.sweep_values along run.sweep_axis. When
/// sweeping N, n_m is held fixed and N is split with the configured N_sub.
/// Throws ConfigError for a missing axis or an empty value list.
CommandOutput cmd_sweep(const ScenarioConfig& config);

/// Parity statistics of forced two-photon cycles under ideal noise for the
/// eight XX/YY input pairs, in the even frame (heralds in one free-precession
/// interval) and the odd frame (one pi pulse between them).
CommandOutput cmd_truth_table(std::uint64_t seed, std::uint64_t trials_per_row = 10'000);

/// CHSH session (inputs uniform over all eight states) and S for both
/// parity outcomes.
CommandOutput cmd_chsh(const ScenarioConfig& config);

struct RatesQuery {
  double qber = 0.110;
  double sigma = 0.004;  // posterior width around qber
  double eta = kDefaultHeraldingEfficiency;
  int n_pi = 62;
  int n_sub = 2;
  double basis_bias = 0.5;
  double p_ab = ChannelConfig{}.p_ab();
  bool exact_plob = false;
};

/// Analytic key-rate report from the sifted-enhancement formula.
CommandOutput cmd_rates(const RatesQuery& query);

/// Same value formatting the CSV writers use ("{:.9g}").
std::string format_float(double v);

}  // namespace memqkd
