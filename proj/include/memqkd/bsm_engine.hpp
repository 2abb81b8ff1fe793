#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "memqkd/quantum_state.hpp"
#include "memqkd/random.hpp"

namespace memqkd {

// One memory cycle: N photonic-qubit slots interleaved with N_pi microwave
// pi pulses, N_sub slots per pulse. Heralds of Alice's and Bob's photons
// are combined with a final X readout of the spin into an asynchronous
// Bell-state measurement.

struct SequenceConfig {
  int n_slots = 124;          // N, photonic qubits per memory initialisation
  int n_pi = 62;              // pi pulses per initialisation
  int n_sub = 2;              // qubit slots per free-precession interval
  double delta_t_ns = 142.0;  // time-bin spacing, equal to the pulse spacing 2 tau
  double pi_time_ns = 32.0;

  /// Throws ConfigError unless N = N_pi * N_sub, N_sub in {1, 2, 4} and
  /// delta_t > pi_time.
  void validate() const;
  friend bool operator==(const SequenceConfig&, const SequenceConfig&) = default;

  /// N_pi (2 tau + pi time), in nanoseconds.
  double cycle_duration_ns() const noexcept;

  /// Index of the pi pulse a slot's time-bin qubit straddles.
  int pulse_group(int slot) const noexcept { return slot / n_sub; }

  static SequenceConfig from_split(int n_pi, int n_sub);

  /// Splits N into (N_pi, N_sub), trying `preferred_sub` first, then 2, 4
  /// and 1, keeping N_pi <= max_pi.
  static SequenceConfig for_total(int n_slots, int preferred_sub = 2, int max_pi = 128);
};

enum class Party : int { Alice = 0, Bob = 1 };

std::string_view party_name(Party party);

/// How the two parties share the qubit slots of a cycle.
enum class SenderMode : int {
  Simultaneous = 0,  // Alice and Bob each send a qubit in every slot (both half-links)
  Random = 1,        // each slot carries one qubit from a uniformly random party
  Alternating = 2,   // even slots Alice, odd slots Bob
};

std::string_view sender_mode_name(SenderMode mode);
SenderMode parse_sender_mode(std::string_view name);

struct ChannelConfig {
  double n_m = 0.02;  // mean photons incident per memory initialisation, per sender
  int n_slots = 124;
  double eta = 0.423;  // probability that an incident photon produces a herald
  SenderMode sender_mode = SenderMode::Simultaneous;

  /// <n>_p = <n>_m / N, the mean photon number per qubit slot.
  double n_p() const noexcept { return n_m / static_cast<double>(n_slots); }
  /// Effective channel transmission p_AB = <n>_p^2.
  double p_ab() const noexcept { return n_p() * n_p(); }

  void validate() const;
  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

enum class FrameParity : int { Even = 0, Odd = 1 };

enum class BellState : int { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

std::string_view bell_state_name(BellState state);

struct BSMRecord {
  int slot_i = 0;
  int slot_j = 0;
  Party party_i = Party::Alice;
  Party party_j = Party::Bob;
  TimeBinQubit qubit_i;
  TimeBinQubit qubit_j;
  int m1 = +1;
  int m2 = +1;
  int m3 = +1;
  int pulses_between = 0;
  FrameParity frame_parity = FrameParity::Even;
  int parity = +1;  // m1 m2 m3
  BellState bell_label = BellState::PhiPlus;
};

enum class EventKind : int { Herald, Scatter };

/// A photon arriving in a slot: detected (herald) or scattered undetected.
/// `qubit` is only meaningful for heralds.
struct CycleEvent {
  int slot = 0;
  Party party = Party::Alice;
  EventKind kind = EventKind::Herald;
  TimeBinQubit qubit;
};

using QubitSource = std::function<TimeBinQubit(int slot, Party party, SplitMix64& rng)>;

struct CycleResult {
  std::optional<BSMRecord> record;
  int heralds = 0;
  int scatters = 0;
  bool discarded = false;  // three or more heralds, or two in one slot
};

/// Samples photon arrivals slot by slot (Bernoulli with mean n_p per sender
/// slot, heralded with probability eta) and evolves the spin. A record is
/// produced for exactly two heralds in distinct slots.
CycleResult run_memory_cycle(const SequenceConfig& seq, const ChannelConfig& chan,
                             const QubitSource& source, const NoiseParams& noise,
                             std::uint64_t cycle_seed);

/// Evolves the spin through a cycle with the given arrivals (sorted by
/// slot). Randomness is used only for herald outcomes and the readout.
/// Returns nothing unless the events contain exactly two heralds in
/// distinct slots.
std::optional<BSMRecord> evolve_cycle(const SequenceConfig& seq, std::span<const CycleEvent> events,
                                      const NoiseParams& noise, SplitMix64& rng);

/// Even frame: +1 -> Phi+, -1 -> Phi-. Odd frame: +1 -> Psi+, -1 -> Psi-.
BellState classify_bell_state(int parity, FrameParity frame);

/// -1 iff both photons are Y-basis and the frame is odd.
int y_frame_correction(Basis basis_a, Basis basis_b, FrameParity frame);

/// Expected parity when phi1 + phi2 is 0 (+1) or pi (-1) modulo 2 pi.
/// Throws ConfigError for any other sum.
int ideal_parity(double phi1, double phi2);

/// True when phi1 + phi2 is 0 or pi modulo 2 pi.
bool is_valid_bsm_pair(double phi1, double phi2);

}  // namespace memqkd
