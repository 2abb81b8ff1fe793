#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "memqkd/bsm_engine.hpp"

namespace memqkd {

// Many memory cycles combined into an MDI-QKD or CHSH session.

enum class SessionMode : int { Qkd = 0, Chsh = 1 };

std::string_view session_mode_name(SessionMode mode);
SessionMode parse_session_mode(std::string_view name);

struct PartyConfig {
  SessionMode mode = SessionMode::Qkd;
  /// Probability of the X basis in QKD mode (0.99 for the 99:1 bias).
  /// CHSH mode draws uniformly from {x, y, a, b}.
  double basis_bias = 0.5;

  void validate() const;
  friend bool operator==(const PartyConfig&, const PartyConfig&) = default;
};

/// Draws an independent random qubit for the given configuration.
TimeBinQubit draw_qubit(const PartyConfig& parties, SplitMix64& rng);

/// Coincidence counts indexed by (basis_a, sign_a, basis_b, sign_b, parity),
/// with labels already frame-corrected. Merging is plain addition.
class CoincidenceTally {
 public:
  void add(const TimeBinQubit& alice, const TimeBinQubit& bob, int parity, std::uint64_t count = 1);
  std::uint64_t at(const TimeBinQubit& alice, const TimeBinQubit& bob, int parity) const;
  std::uint64_t total() const noexcept;

  CoincidenceTally& operator+=(const CoincidenceTally& other) noexcept;
  friend bool operator==(const CoincidenceTally&, const CoincidenceTally&) = default;

 private:
  static std::size_t index(const TimeBinQubit& alice, const TimeBinQubit& bob, int parity);
  std::array<std::uint64_t, 128> counts_{};
};

struct SiftCount {
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;

  double qber() const noexcept {
    return sifted == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(sifted);
  }
  SiftCount& operator+=(const SiftCount& o) noexcept {
    sifted += o.sifted;
    errors += o.errors;
    return *this;
  }
  friend bool operator==(const SiftCount&, const SiftCount&) = default;
};

struct SiftedCounts {
  SiftCount xx;
  SiftCount yy;

  SiftCount total() const noexcept {
    SiftCount t = xx;
    t += yy;
    return t;
  }
  /// Unweighted mean of the XX and YY error rates (the unbiased-basis QBER).
  double average_qber() const noexcept { return 0.5 * (xx.qber() + yy.qber()); }
};

/// Keeps XX and YY coincidences. An error is a parity that disagrees with
/// ideal_parity of the two (frame-corrected) input phases.
SiftedCounts sift(const CoincidenceTally& tally);

/// Per-cell error counts for the posterior: one cell per (basis, sign_a,
/// sign_b) in {XX, YY}. Empty cells are included.
struct CellCount {
  Basis basis = Basis::X;
  int sign_a = +1;
  int sign_b = +1;
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
};
std::vector<CellCount> qber_cells(const CoincidenceTally& tally);

struct ChshResult {
  int parity = +1;
  /// Input correlations <A B> for the basis pairs xa, xb, ya, yb.
  std::array<double, 4> terms{};
  std::array<std::uint64_t, 4> counts{};
  double s = 0.0;
};

/// S = |<AB>xa - <AB>xb - <AB>ya - <AB>yb| over coincidences with the given
/// parity. Basis pairs are unordered. Throws StatisticsError when a term has
/// no coincidences.
ChshResult chsh_statistic(const CoincidenceTally& tally, int parity);

struct TimingOverheads {
  double lock_time_s = 0.2;          // interferometer lock before each block
  std::uint64_t cycles_per_lock = 4000;
  double readout_time_s = 30e-6;
  /// Readouts per cycle: the m3 readout plus the initialisation feedback.
  double readouts_per_cycle = 2.0;
  /// Fraction of wall-clock time the node is available (relock downtime).
  double duty_multiplier = 1.0;

  void validate() const;
  friend bool operator==(const TimingOverheads&, const TimingOverheads&) = default;
  static TimingOverheads none();
};

struct ChannelAccounting {
  double uses = 0.0;
  double occupancy = 0.0;
  double wall_clock_s = 0.0;
  double clock_rate_hz = 0.0;  // channel uses per modeled second
};

/// A channel use is one slot of the full link (both half-links); an
/// occupancy is one half-link slot carrying a qubit, so
/// rate per occupancy = rate per use / 2 in every sender mode.
/// Simultaneous: uses = N cycles, occupancy = 2 N cycles.
/// Random/alternating: occupancy = N cycles, uses = N cycles / 2.
ChannelAccounting channel_accounting(const SequenceConfig& seq, SenderMode mode,
                                     std::uint64_t cycles, const TimingOverheads& timing);

struct SessionOptions {
  bool frame_correction = true;
  unsigned threads = 1;
  TimingOverheads timing;
};

struct SessionReport {
  std::uint64_t cycles = 0;
  ChannelAccounting channel;
  std::uint64_t heralds = 0;
  std::uint64_t scatters = 0;
  std::uint64_t discarded_cycles = 0;
  std::uint64_t bsm_records = 0;      // cycles with exactly two heralds
  std::uint64_t bsm_successes = 0;    // one herald from each party
  std::uint64_t same_party_pairs = 0;  // excluded from the key
  std::uint64_t qubits_drawn = 0;
  std::uint64_t x_basis_drawn = 0;
  /// Sifted statistics split by frame parity: [basis pair XX/YY][even/odd].
  std::array<std::array<SiftCount, 2>, 2> sifted_by_frame{};
  double p_ab = 0.0;
  double basis_bias = 0.5;

  SiftedCounts sifted() const noexcept;
  SessionReport& operator+=(const SessionReport& other) noexcept;
};

struct SessionResult {
  CoincidenceTally tally;
  SessionReport report;
};

/// Runs `cycles` independent memory cycles. Cycle k is seeded with
/// derive_seed(seed, k), so the result does not depend on `threads`.
SessionResult simulate_session(const SequenceConfig& seq, const ChannelConfig& chan,
                               const PartyConfig& parties, const NoiseParams& noise,
                               std::uint64_t cycles, std::uint64_t seed,
                               const SessionOptions& options = {});

}  // namespace memqkd
