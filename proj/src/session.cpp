#include "memqkd/session.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

std::size_t sign_index(int sign) { return sign > 0 ? 0 : 1; }

int pair_index(Basis a, Basis b) {
  if (a == Basis::X && b == Basis::X) return 0;
  if (a == Basis::Y && b == Basis::Y) return 1;
  return -1;
}

// Index into ChshResult::terms for an unordered basis pair, or -1.
int chsh_term(Basis a, Basis b) {
  auto is = [&](Basis p, Basis q) { return (a == p && b == q) || (a == q && b == p); };
  if (is(Basis::X, Basis::A)) return 0;
  if (is(Basis::X, Basis::B)) return 1;
  if (is(Basis::Y, Basis::A)) return 2;
  if (is(Basis::Y, Basis::B)) return 3;
  return -1;
}

constexpr std::array<int, 2> kSigns = {+1, -1};

struct ShardCounters {
  std::uint64_t qubits = 0;
  std::uint64_t x_basis = 0;
};

void run_shard(const SequenceConfig& seq, const ChannelConfig& chan, const PartyConfig& parties,
               const NoiseParams& noise, std::uint64_t begin, std::uint64_t end, std::uint64_t seed,
               const SessionOptions& options, SessionResult& out) {
  ShardCounters counters;
  const QubitSource source = [&](int, Party, SplitMix64& rng) {
    TimeBinQubit q = draw_qubit(parties, rng);
    ++counters.qubits;
    if (q.basis == Basis::X) ++counters.x_basis;
    return q;
  };

  SessionReport& rep = out.report;
  for (std::uint64_t k = begin; k < end; ++k) {
    const CycleResult cycle = run_memory_cycle(seq, chan, source, noise, derive_seed(seed, k));
    rep.heralds += static_cast<std::uint64_t>(cycle.heralds);
    rep.scatters += static_cast<std::uint64_t>(cycle.scatters);
    if (cycle.discarded) ++rep.discarded_cycles;
    if (!cycle.record) continue;

    const BSMRecord& r = *cycle.record;
    ++rep.bsm_records;
    if (r.party_i == r.party_j) {
      ++rep.same_party_pairs;
      continue;
    }
    ++rep.bsm_successes;

    TimeBinQubit first = r.qubit_i;
    if (options.frame_correction) {
      if (parties.mode == SessionMode::Qkd) {
        if (y_frame_correction(r.qubit_i.basis, r.qubit_j.basis, r.frame_parity) < 0) {
          first.sign = -first.sign;
        }
      } else if (r.frame_parity == FrameParity::Odd) {
        first = first.conjugate();
      }
    }
    const TimeBinQubit& alice = r.party_i == Party::Alice ? first : r.qubit_j;
    const TimeBinQubit& bob = r.party_i == Party::Alice ? r.qubit_j : first;
    out.tally.add(alice, bob, r.parity);

    const int pair = pair_index(alice.basis, bob.basis);
    if (pair >= 0) {
      SiftCount& cell = rep.sifted_by_frame[pair][static_cast<int>(r.frame_parity)];
      ++cell.sifted;
      if (r.parity != ideal_parity(alice.phase(), bob.phase())) ++cell.errors;
    }
  }
  rep.cycles = end - begin;
  rep.qubits_drawn = counters.qubits;
  rep.x_basis_drawn = counters.x_basis;
}

}  // namespace

std::string_view session_mode_name(SessionMode mode) {
  return mode == SessionMode::Qkd ? "qkd" : "chsh";
}

SessionMode parse_session_mode(std::string_view name) {
  if (name == "qkd" || name == "QKD") return SessionMode::Qkd;
  if (name == "chsh" || name == "CHSH") return SessionMode::Chsh;
  throw ConfigError("unknown session mode '" + std::string(name) + "'");
}

void PartyConfig::validate() const {
  if (!(basis_bias >= 0.0 && basis_bias <= 1.0)) {
    throw ConfigError("parties.basis_bias must lie in [0, 1]");
  }
}

TimeBinQubit draw_qubit(const PartyConfig& parties, SplitMix64& rng) {
  TimeBinQubit q;
  if (parties.mode == SessionMode::Qkd) {
    q.basis = bernoulli(rng, parties.basis_bias) ? Basis::X : Basis::Y;
  } else {
    q.basis = static_cast<Basis>(rng() >> 62);
  }
  q.sign = bernoulli(rng, 0.5) ? +1 : -1;
  return q;
}

std::size_t CoincidenceTally::index(const TimeBinQubit& alice, const TimeBinQubit& bob, int parity) {
  std::size_t i = static_cast<std::size_t>(alice.basis);
  i = i * 2 + sign_index(alice.sign);
  i = i * 4 + static_cast<std::size_t>(bob.basis);
  i = i * 2 + sign_index(bob.sign);
  i = i * 2 + sign_index(parity);
  return i;
}

void CoincidenceTally::add(const TimeBinQubit& alice, const TimeBinQubit& bob, int parity,
                           std::uint64_t count) {
  counts_[index(alice, bob, parity)] += count;
}

std::uint64_t CoincidenceTally::at(const TimeBinQubit& alice, const TimeBinQubit& bob,
                                   int parity) const {
  return counts_[index(alice, bob, parity)];
}

std::uint64_t CoincidenceTally::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

CoincidenceTally& CoincidenceTally::operator+=(const CoincidenceTally& other) noexcept {
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

SiftedCounts sift(const CoincidenceTally& tally) {
  SiftedCounts out;
  for (Basis basis : {Basis::X, Basis::Y}) {
    SiftCount& dst = basis == Basis::X ? out.xx : out.yy;
    for (int sa : kSigns) {
      for (int sb : kSigns) {
        const TimeBinQubit a{basis, sa};
        const TimeBinQubit b{basis, sb};
        const int expected = ideal_parity(a.phase(), b.phase());
        for (int parity : kSigns) {
          const std::uint64_t n = tally.at(a, b, parity);
          dst.sifted += n;
          if (parity != expected) dst.errors += n;
        }
      }
    }
  }
  return out;
}

std::vector<CellCount> qber_cells(const CoincidenceTally& tally) {
  std::vector<CellCount> cells;
  for (Basis basis : {Basis::X, Basis::Y}) {
    for (int sa : kSigns) {
      for (int sb : kSigns) {
        const TimeBinQubit a{basis, sa};
        const TimeBinQubit b{basis, sb};
        const int expected = ideal_parity(a.phase(), b.phase());
        CellCount cell{basis, sa, sb, tally.at(a, b, -expected), 0};
        cell.trials = tally.at(a, b, +1) + tally.at(a, b, -1);
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

ChshResult chsh_statistic(const CoincidenceTally& tally, int parity) {
  if (parity != 1 && parity != -1) throw ConfigError("parity must be +1 or -1");
  ChshResult res;
  res.parity = parity;
  std::array<double, 4> weighted{};
  for (Basis ba : kAllBases) {
    for (Basis bb : kAllBases) {
      const int term = chsh_term(ba, bb);
      if (term < 0) continue;
      for (int sa : kSigns) {
        for (int sb : kSigns) {
          const std::uint64_t n = tally.at({ba, sa}, {bb, sb}, parity);
          res.counts[term] += n;
          weighted[term] += static_cast<double>(sa * sb) * static_cast<double>(n);
        }
      }
    }
  }
  static constexpr std::array<const char*, 4> names = {"xa", "xb", "ya", "yb"};
  for (int t = 0; t < 4; ++t) {
    if (res.counts[t] == 0) {
      throw StatisticsError(std::string("no coincidences for CHSH basis pair ") + names[t] +
                            " at parity " + (parity > 0 ? "+1" : "-1"));
    }
    res.terms[t] = weighted[t] / static_cast<double>(res.counts[t]);
  }
  res.s = std::abs(res.terms[0] - res.terms[1] - res.terms[2] - res.terms[3]);
  return res;
}

void TimingOverheads::validate() const {
  if (!(lock_time_s >= 0.0) || !(readout_time_s >= 0.0) || !(readouts_per_cycle >= 0.0)) {
    throw ConfigError("timing overheads must be >= 0");
  }
  if (cycles_per_lock == 0) throw ConfigError("timing.cycles_per_lock must be >= 1");
  if (!(duty_multiplier > 0.0 && duty_multiplier <= 1.0)) {
    throw ConfigError("timing.duty_multiplier must lie in (0, 1]");
  }
}

TimingOverheads TimingOverheads::none() {
  TimingOverheads t;
  t.lock_time_s = 0.0;
  t.readout_time_s = 0.0;
  t.readouts_per_cycle = 0.0;
  t.duty_multiplier = 1.0;
  return t;
}

ChannelAccounting channel_accounting(const SequenceConfig& seq, SenderMode mode,
                                     std::uint64_t cycles, const TimingOverheads& timing) {
  seq.validate();
  timing.validate();
  ChannelAccounting acc;
  const double slots = static_cast<double>(seq.n_slots) * static_cast<double>(cycles);
  if (mode == SenderMode::Simultaneous) {
    acc.uses = slots;
    acc.occupancy = 2.0 * slots;
  } else {
    acc.uses = 0.5 * slots;
    acc.occupancy = slots;
  }
  const double per_cycle =
      seq.cycle_duration_ns() * 1e-9 + timing.readouts_per_cycle * timing.readout_time_s;
  const std::uint64_t blocks = (cycles + timing.cycles_per_lock - 1) / timing.cycles_per_lock;
  acc.wall_clock_s = (static_cast<double>(cycles) * per_cycle +
                      static_cast<double>(blocks) * timing.lock_time_s) /
                     timing.duty_multiplier;
  acc.clock_rate_hz = acc.wall_clock_s > 0.0 ? acc.uses / acc.wall_clock_s : 0.0;
  return acc;
}

SiftedCounts SessionReport::sifted() const noexcept {
  SiftedCounts s;
  for (int f = 0; f < 2; ++f) {
    s.xx += sifted_by_frame[0][f];
    s.yy += sifted_by_frame[1][f];
  }
  return s;
}

SessionReport& SessionReport::operator+=(const SessionReport& o) noexcept {
  cycles += o.cycles;
  heralds += o.heralds;
  scatters += o.scatters;
  discarded_cycles += o.discarded_cycles;
  bsm_records += o.bsm_records;
  bsm_successes += o.bsm_successes;
  same_party_pairs += o.same_party_pairs;
  qubits_drawn += o.qubits_drawn;
  x_basis_drawn += o.x_basis_drawn;
  for (int p = 0; p < 2; ++p) {
    for (int f = 0; f < 2; ++f) sifted_by_frame[p][f] += o.sifted_by_frame[p][f];
  }
  return *this;
}

SessionResult simulate_session(const SequenceConfig& seq, const ChannelConfig& chan,
                               const PartyConfig& parties, const NoiseParams& noise,
                               std::uint64_t cycles, std::uint64_t seed,
                               const SessionOptions& options) {
  seq.validate();
  chan.validate();
  parties.validate();
  noise.validate();
  options.timing.validate();
  if (cycles < 1) throw ConfigError("cycles must be >= 1");
  if (chan.n_slots != seq.n_slots) throw ConfigError("channel and sequence disagree on N");

  const unsigned threads =
      static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(options.threads, cycles)));
  std::vector<SessionResult> shards(threads);
  std::vector<std::exception_ptr> errors(threads);
  auto bounds = [&](unsigned s) { return cycles / threads * s + std::min<std::uint64_t>(s, cycles % threads); };

  auto work = [&](unsigned s) {
    try {
      run_shard(seq, chan, parties, noise, bounds(s), bounds(s + 1), seed, options, shards[s]);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SessionResult result;
  for (const auto& shard : shards) {
    result.tally += shard.tally;
    result.report += shard.report;
  }
  result.report.channel = channel_accounting(seq, chan.sender_mode, cycles, options.timing);
  result.report.p_ab = chan.p_ab();
  result.report.basis_bias = parties.basis_bias;
  return result;
}

}  // namespace memqkd
