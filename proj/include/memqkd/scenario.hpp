#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "memqkd/bsm_engine.hpp"
#include "memqkd/cavity.hpp"
#include "memqkd/session.hpp"

namespace memqkd {

// Sectioned key=value scenario files:
//
//   [cavity]    g, kappa, kappa_wg, gamma, delta_c
//   [noise]     eps_leak, p_mw, p_scatter_dephase, f_readout, f_init
//   [sequence]  n_pi, n_sub, delta_t_ns, pi_time_ns, lock_time_s,
//               cycles_per_lock, readout_time_s, readouts_per_cycle,
//               duty_multiplier
//   [channel]   n_m, eta, sender_mode
//   [parties]   mode, basis_bias
//   [run]       seed, cycles, threads, frame_correction, sweep_axis,
//               sweep_values
//
// Lines starting with ';' or '#' are comments. Every key is optional;
// unknown sections and keys are errors.

inline constexpr std::uint64_t kDefaultSeed = 20200323;

enum class SweepAxis : int { None = 0, N = 1, NM = 2 };

std::string_view sweep_axis_name(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t cycles = 1'000'000;
  unsigned threads = 1;
  bool frame_correction = true;
  SweepAxis sweep_axis = SweepAxis::None;
  std::vector<double> sweep_values;

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ScenarioConfig {
  CavityParams cavity;
  NoiseParams noise;
  SequenceConfig sequence;
  TimingOverheads timing;
  ChannelConfig channel;  // channel.n_slots always mirrors sequence.n_slots
  PartyConfig parties;
  RunConfig run;

  /// Revalidates every component. Throws ConfigError.
  void validate() const;
  SessionOptions session_options() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses and validates a scenario. Throws ConfigError with the offending
/// key on malformed input.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Writes every key; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

std::vector<std::string> preset_names();
/// Raw text of a compiled-in preset. Throws ConfigError for unknown names.
std::string_view preset_text(std::string_view name);
/// Presets must set [run] seed explicitly.
ScenarioConfig load_preset(std::string_view name);

}  // namespace memqkd
