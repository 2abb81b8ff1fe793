#include "memqkd/bsm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

constexpr double kPhaseTol = 1e-9;

// Distance of an angle from the nearest multiple of 2 pi.
double wrapped_distance(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double r = std::remainder(angle, two_pi);
  return std::abs(r);
}

SpinState advance_pulses(SpinState spin, int pulses, double p_mw) {
  if (pulses <= 0) return spin;
  // Z dephasing commutes with the bit flip, so the block of pulses is one
  // flip (if odd) and one composed dephasing.
  if (pulses % 2 != 0) spin = apply_pi_pulse(spin);
  if (p_mw > 0.0) spin = apply_dephasing(spin, compose_dephasing(p_mw, static_cast<unsigned long>(pulses)));
  return spin;
}

}  // namespace

void SequenceConfig::validate() const {
  if (n_sub != 1 && n_sub != 2 && n_sub != 4) {
    throw ConfigError("sequence.n_sub must be 1, 2 or 4");
  }
  if (n_pi < 1) throw ConfigError("sequence.n_pi must be >= 1");
  if (n_slots != n_pi * n_sub) {
    throw ConfigError("sequence.n_slots must equal n_pi * n_sub (" + std::to_string(n_pi) + " * " +
                      std::to_string(n_sub) + " != " + std::to_string(n_slots) + ")");
  }
  if (!(pi_time_ns >= 0.0) || !(delta_t_ns > pi_time_ns)) {
    throw ConfigError("sequence.delta_t_ns must exceed sequence.pi_time_ns >= 0");
  }
}

double SequenceConfig::cycle_duration_ns() const noexcept {
  return static_cast<double>(n_pi) * (delta_t_ns + pi_time_ns);
}

SequenceConfig SequenceConfig::from_split(int n_pi, int n_sub) {
  SequenceConfig seq;
  seq.n_pi = n_pi;
  seq.n_sub = n_sub;
  seq.n_slots = n_pi * n_sub;
  seq.validate();
  return seq;
}

SequenceConfig SequenceConfig::for_total(int n_slots, int preferred_sub, int max_pi) {
  for (int sub : {preferred_sub, 2, 4, 1}) {
    if (sub != 1 && sub != 2 && sub != 4) continue;
    if (n_slots > 0 && n_slots % sub == 0 && n_slots / sub <= max_pi) {
      return from_split(n_slots / sub, sub);
    }
  }
  throw ConfigError("cannot split N = " + std::to_string(n_slots) +
                    " into N_pi * N_sub with N_sub in {1,2,4} and N_pi <= " + std::to_string(max_pi));
}

std::string_view party_name(Party party) { return party == Party::Alice ? "alice" : "bob"; }

std::string_view sender_mode_name(SenderMode mode) {
  switch (mode) {
    case SenderMode::Simultaneous: return "simultaneous";
    case SenderMode::Random: return "random";
    case SenderMode::Alternating: return "alternating";
  }
  return "?";
}

SenderMode parse_sender_mode(std::string_view name) {
  if (name == "simultaneous") return SenderMode::Simultaneous;
  if (name == "random") return SenderMode::Random;
  if (name == "alternating") return SenderMode::Alternating;
  throw ConfigError("unknown sender mode '" + std::string(name) + "'");
}

void ChannelConfig::validate() const {
  if (!(n_m >= 0.0 && std::isfinite(n_m))) throw ConfigError("channel.n_m must be finite and >= 0");
  if (n_slots < 1) throw ConfigError("channel slot count must be >= 1");
  if (!(n_p() <= 1.0)) throw ConfigError("channel.n_m / N must not exceed 1 (Bernoulli slots)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("channel.eta must lie in [0, 1]");
}

std::string_view bell_state_name(BellState state) {
  switch (state) {
    case BellState::PhiPlus: return "Phi+";
    case BellState::PhiMinus: return "Phi-";
    case BellState::PsiPlus: return "Psi+";
    case BellState::PsiMinus: return "Psi-";
  }
  return "?";
}

BellState classify_bell_state(int parity, FrameParity frame) {
  const bool plus = parity > 0;
  if (frame == FrameParity::Even) return plus ? BellState::PhiPlus : BellState::PhiMinus;
  return plus ? BellState::PsiPlus : BellState::PsiMinus;
}

int y_frame_correction(Basis basis_a, Basis basis_b, FrameParity frame) {
  return (basis_a == Basis::Y && basis_b == Basis::Y && frame == FrameParity::Odd) ? -1 : +1;
}

bool is_valid_bsm_pair(double phi1, double phi2) {
  const double sum = phi1 + phi2;
  return wrapped_distance(sum) < kPhaseTol || wrapped_distance(sum - std::numbers::pi) < kPhaseTol;
}

int ideal_parity(double phi1, double phi2) {
  const double sum = phi1 + phi2;
  if (wrapped_distance(sum) < kPhaseTol) return +1;
  if (wrapped_distance(sum - std::numbers::pi) < kPhaseTol) return -1;
  throw ConfigError("phase sum is neither 0 nor pi: not a valid BSM input pair");
}

std::optional<BSMRecord> evolve_cycle(const SequenceConfig& seq, std::span<const CycleEvent> events,
                                      const NoiseParams& noise, SplitMix64& rng) {
  int herald_count = 0;
  const CycleEvent* first = nullptr;
  const CycleEvent* second = nullptr;
  int previous_slot = 0;
  for (const auto& ev : events) {
    if (ev.slot < 0 || ev.slot >= seq.n_slots) throw ConfigError("event slot outside the cycle");
    if (ev.slot < previous_slot) throw ConfigError("cycle events must be sorted by slot");
    previous_slot = ev.slot;
    if (ev.kind != EventKind::Herald) continue;
    ++herald_count;
    (herald_count == 1 ? first : second) = &ev;
  }
  if (herald_count != 2 || first->slot == second->slot) return std::nullopt;

  BSMRecord rec;
  SpinState spin = prepare_superposition(noise.f_init);
  int pulses_done = 0;
  int herald_index = 0;
  for (const auto& ev : events) {
    const int group = seq.pulse_group(ev.slot);
    spin = advance_pulses(spin, group - pulses_done, noise.p_mw);
    pulses_done = std::max(pulses_done, group);
    if (ev.kind == EventKind::Scatter) {
      if (noise.p_scatter_dephase > 0.0) spin = apply_dephasing(spin, noise.p_scatter_dephase);
      continue;
    }
    auto outcome = reflect_and_herald(spin, ev.qubit, noise, uniform01(rng));
    spin = outcome.spin;
    if (herald_index++ == 0) {
      rec.slot_i = ev.slot;
      rec.party_i = ev.party;
      rec.qubit_i = ev.qubit;
      rec.m1 = outcome.herald.m;
    } else {
      rec.slot_j = ev.slot;
      rec.party_j = ev.party;
      rec.qubit_j = ev.qubit;
      rec.m2 = outcome.herald.m;
    }
  }
  spin = advance_pulses(spin, seq.n_pi - pulses_done, noise.p_mw);
  rec.m3 = measure_x(spin, noise.f_readout, uniform01(rng));

  rec.pulses_between = seq.pulse_group(rec.slot_j) - seq.pulse_group(rec.slot_i);
  rec.frame_parity = rec.pulses_between % 2 == 0 ? FrameParity::Even : FrameParity::Odd;
  rec.parity = rec.m1 * rec.m2 * rec.m3;
  rec.bell_label = classify_bell_state(rec.parity, rec.frame_parity);
  return rec;
}

CycleResult run_memory_cycle(const SequenceConfig& seq, const ChannelConfig& chan,
                             const QubitSource& source, const NoiseParams& noise,
                             std::uint64_t cycle_seed) {
  seq.validate();
  chan.validate();
  if (chan.n_slots != seq.n_slots) throw ConfigError("channel and sequence disagree on N");
  CycleResult result;
  const double n_p = chan.n_p();
  if (n_p <= 0.0) return result;

  SplitMix64 rng(cycle_seed);
  const bool both = chan.sender_mode == SenderMode::Simultaneous;
  const std::uint64_t trials = static_cast<std::uint64_t>(seq.n_slots) * (both ? 2u : 1u);

  std::vector<CycleEvent> events;
  std::uint64_t t = geometric_skip(rng, n_p);
  while (t < trials) {
    CycleEvent ev;
    ev.slot = static_cast<int>(both ? t / 2 : t);
    switch (chan.sender_mode) {
      case SenderMode::Simultaneous: ev.party = t % 2 == 0 ? Party::Alice : Party::Bob; break;
      case SenderMode::Random: ev.party = bernoulli(rng, 0.5) ? Party::Alice : Party::Bob; break;
      case SenderMode::Alternating: ev.party = ev.slot % 2 == 0 ? Party::Alice : Party::Bob; break;
    }
    if (bernoulli(rng, chan.eta)) {
      ev.kind = EventKind::Herald;
      ++result.heralds;
    } else {
      ev.kind = EventKind::Scatter;
      ++result.scatters;
    }
    events.push_back(ev);
    const std::uint64_t skip = geometric_skip(rng, n_p);
    if (skip >= trials) break;
    t += 1 + skip;
  }

  if (result.heralds < 2) return result;
  if (result.heralds > 2) {
    result.discarded = true;
    return result;
  }
  for (auto& ev : events) {
    if (ev.kind == EventKind::Herald) ev.qubit = source(ev.slot, ev.party, rng);
  }
  result.record = evolve_cycle(seq, events, noise, rng);
  if (!result.record) result.discarded = true;  // both heralds in one slot
  return result;
}

}  // namespace memqkd
