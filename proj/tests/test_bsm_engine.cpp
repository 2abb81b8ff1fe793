#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bsm_oracle.hpp"
#include "chi_square.hpp"
#include "memqkd/bsm_engine.hpp"
#include "memqkd/errors.hpp"

using namespace memqkd;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<TimeBinQubit> all_states() {
  std::vector<TimeBinQubit> out;
  for (Basis b : kAllBases) {
    for (int s : {+1, -1}) out.push_back({b, s});
  }
  return out;
}

std::array<CycleEvent, 2> forced(int slot_a, const TimeBinQubit& a, int slot_b, const TimeBinQubit& b) {
  return {CycleEvent{slot_a, Party::Alice, EventKind::Herald, a},
          CycleEvent{slot_b, Party::Bob, EventKind::Herald, b}};
}

}  // namespace

TEST_CASE("sequence configuration") {
  SequenceConfig seq;
  CHECK_NOTHROW(seq.validate());
  CHECK(seq.cycle_duration_ns() == doctest::Approx(62 * 174.0));
  CHECK(seq.pulse_group(0) == 0);
  CHECK(seq.pulse_group(1) == 0);
  CHECK(seq.pulse_group(2) == 1);

  seq.n_slots = 125;
  CHECK_THROWS_AS(seq.validate(), ConfigError);
  CHECK_THROWS_AS(SequenceConfig::from_split(40, 3), ConfigError);
  seq = {};
  seq.pi_time_ns = 150.0;
  CHECK_THROWS_AS(seq.validate(), ConfigError);

  const auto s60 = SequenceConfig::for_total(60);
  CHECK((s60.n_pi == 30 && s60.n_sub == 2));
  const auto s124 = SequenceConfig::for_total(124);
  CHECK((s124.n_pi == 62 && s124.n_sub == 2));
  const auto s248 = SequenceConfig::for_total(248);
  CHECK((s248.n_pi == 124 && s248.n_sub == 2));
  const auto s504 = SequenceConfig::for_total(504);
  CHECK((s504.n_pi == 126 && s504.n_sub == 4));
  CHECK_THROWS_AS(SequenceConfig::for_total(1030), ConfigError);
}

TEST_CASE("channel configuration") {
  ChannelConfig chan;
  CHECK(chan.n_p() == 0.02 / 124.0);
  CHECK(chan.p_ab() == chan.n_p() * chan.n_p());
  chan.eta = 1.2;
  CHECK_THROWS_AS(chan.validate(), ConfigError);
  chan = {};
  chan.n_m = -1.0;
  CHECK_THROWS_AS(chan.validate(), ConfigError);
  CHECK(parse_sender_mode("random") == SenderMode::Random);
  CHECK(sender_mode_name(SenderMode::Alternating) == "alternating");
  CHECK_THROWS_AS(parse_sender_mode("both"), ConfigError);
}

TEST_CASE("parity rule") {
  CHECK(ideal_parity(0.0, 0.0) == +1);
  CHECK(ideal_parity(kPi / 2, kPi / 2) == -1);
  CHECK(ideal_parity(kPi / 4, 7 * kPi / 4) == +1);
  CHECK(ideal_parity(kPi / 4, 3 * kPi / 4) == -1);
  CHECK_THROWS_AS(ideal_parity(0.0, kPi / 2), ConfigError);
  CHECK(is_valid_bsm_pair(kPi, 3 * kPi));
  CHECK_FALSE(is_valid_bsm_pair(kPi / 4, kPi / 4));

  CHECK(classify_bell_state(+1, FrameParity::Even) == BellState::PhiPlus);
  CHECK(classify_bell_state(-1, FrameParity::Even) == BellState::PhiMinus);
  CHECK(classify_bell_state(+1, FrameParity::Odd) == BellState::PsiPlus);
  CHECK(classify_bell_state(-1, FrameParity::Odd) == BellState::PsiMinus);

  CHECK(y_frame_correction(Basis::Y, Basis::Y, FrameParity::Odd) == -1);
  CHECK(y_frame_correction(Basis::X, Basis::X, FrameParity::Odd) == +1);
  CHECK(y_frame_correction(Basis::Y, Basis::Y, FrameParity::Even) == +1);
}

TEST_CASE("oracle: Bell-state inputs select the frame") {
  using oracle::Vec4;
  const double r = 1.0 / std::sqrt(2.0);
  Vec4 phi_plus, phi_minus, psi_plus, psi_minus;
  phi_plus << r, 0, 0, r;
  phi_minus << r, 0, 0, -r;
  psi_plus << 0, r, r, 0;
  psi_minus << 0, r, -r, 0;

  for (int k : {0, 2, 4}) {
    CHECK(oracle::asynchronous_bsm(phi_plus, k).p_plus == doctest::Approx(1.0));
    CHECK(oracle::asynchronous_bsm(phi_minus, k).p_plus == doctest::Approx(0.0));
    CHECK(oracle::asynchronous_bsm(psi_plus, k).herald_probability < 1e-15);
    CHECK(oracle::asynchronous_bsm(psi_minus, k).herald_probability < 1e-15);
  }
  for (int k : {1, 3, 61}) {
    CHECK(oracle::asynchronous_bsm(psi_plus, k).p_plus == doctest::Approx(1.0));
    CHECK(oracle::asynchronous_bsm(psi_minus, k).p_plus == doctest::Approx(0.0));
    CHECK(oracle::asynchronous_bsm(phi_plus, k).herald_probability < 1e-15);
    CHECK(oracle::asynchronous_bsm(phi_minus, k).herald_probability < 1e-15);
  }
}

TEST_CASE("forced heralds follow the state-vector oracle for every input pair") {
  const SequenceConfig seq;
  const NoiseParams ideal = NoiseParams::ideal();
  // (second slot, pulses between) with the first herald in slot 0 or 1.
  struct Placement {
    int slot_a;
    int slot_b;
    int pulses;
  };
  const Placement placements[] = {{0, 1, 0}, {0, 2, 1}, {1, 4, 2}, {1, 7, 3}, {3, 123, 60}};
  SplitMix64 rng(99);
  const int trials = 2000;
  for (const auto& pl : placements) {
    for (const auto& a : all_states()) {
      for (const auto& b : all_states()) {
        const double p = oracle::asynchronous_bsm(oracle::product(a.phase(), b.phase()), pl.pulses).p_plus;
        const auto events = forced(pl.slot_a, a, pl.slot_b, b);
        int plus = 0;
        for (int t = 0; t < trials; ++t) {
          const auto rec = evolve_cycle(seq, events, ideal, rng);
          REQUIRE(rec.has_value());
          REQUIRE(rec->pulses_between == pl.pulses);
          plus += rec->parity > 0;
        }
        if (p < 1e-12 || p > 1.0 - 1e-12) {
          CHECK(plus == (p > 0.5 ? trials : 0));
        } else {
          const double sd = std::sqrt(trials * p * (1.0 - p));
          CHECK(std::abs(plus - trials * p) < 5.0 * sd);
        }
      }
    }
  }
}

TEST_CASE("frame-corrected labels reproduce the even-frame parity") {
  const SequenceConfig seq;
  const NoiseParams ideal = NoiseParams::ideal();
  SplitMix64 rng(5);
  for (Basis basis : {Basis::X, Basis::Y}) {
    for (int sa : {+1, -1}) {
      for (int sb : {+1, -1}) {
        const TimeBinQubit a{basis, sa};
        const TimeBinQubit b{basis, sb};
        for (int second : {1, 2}) {
          const auto rec = evolve_cycle(seq, forced(0, a, second, b), ideal, rng);
          TimeBinQubit corrected = a;
          if (y_frame_correction(basis, basis, rec->frame_parity) < 0) corrected.sign = -corrected.sign;
          CHECK(rec->parity == ideal_parity(corrected.phase(), b.phase()));
          const TimeBinQubit seen = second == 2 ? a.conjugate() : a;
          CHECK(rec->parity == ideal_parity(seen.phase(), b.phase()));
        }
      }
    }
  }
}

TEST_CASE("herald outcomes carry no information about the inputs") {
  // Pairs with phase sum 0 in the even frame: (m1, m2) must be uniform.
  const SequenceConfig seq;
  const NoiseParams ideal = NoiseParams::ideal();
  SplitMix64 rng(3);
  const std::pair<TimeBinQubit, TimeBinQubit> pairs[] = {
      {{Basis::X, +1}, {Basis::X, +1}},
      {{Basis::Y, +1}, {Basis::Y, -1}},
      {{Basis::A, +1}, {Basis::B, -1}},
  };
  for (const auto& [a, b] : pairs) {
    std::array<double, 4> counts{};
    const int n = 20000;
    for (int t = 0; t < n; ++t) {
      const auto rec = evolve_cycle(seq, forced(0, a, 1, b), ideal, rng);
      counts[(rec->m1 > 0 ? 0 : 2) + (rec->m2 > 0 ? 0 : 1)] += 1.0;
    }
    double stat = 0.0;
    for (double c : counts) stat += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
    CHECK(stat < chi_square_critical_001(3));
  }
}

TEST_CASE("event validation") {
  const SequenceConfig seq;
  const NoiseParams ideal = NoiseParams::ideal();
  SplitMix64 rng(1);
  const TimeBinQubit x{Basis::X, +1};
  CHECK_THROWS_AS(evolve_cycle(seq, forced(5, x, 2, x), ideal, rng), ConfigError);
  CHECK_THROWS_AS(evolve_cycle(seq, forced(0, x, 124, x), ideal, rng), ConfigError);
  CHECK_FALSE(evolve_cycle(seq, forced(3, x, 3, x), ideal, rng).has_value());

  const std::array<CycleEvent, 3> three = {CycleEvent{0, Party::Alice, EventKind::Herald, x},
                                           CycleEvent{1, Party::Bob, EventKind::Herald, x},
                                           CycleEvent{2, Party::Alice, EventKind::Herald, x}};
  CHECK_FALSE(evolve_cycle(seq, three, ideal, rng).has_value());
  const std::array<CycleEvent, 1> one = {CycleEvent{0, Party::Alice, EventKind::Herald, x}};
  CHECK_FALSE(evolve_cycle(seq, one, ideal, rng).has_value());
}

TEST_CASE("an undetected photon between heralds destroys the correlation") {
  const SequenceConfig seq;
  NoiseParams noise = NoiseParams::ideal();
  noise.p_scatter_dephase = 0.5;
  const TimeBinQubit x{Basis::X, +1};
  const std::array<CycleEvent, 3> events = {CycleEvent{0, Party::Alice, EventKind::Herald, x},
                                            CycleEvent{1, Party::Bob, EventKind::Scatter, x},
                                            CycleEvent{4, Party::Bob, EventKind::Herald, x}};
  SplitMix64 rng(3);
  int plus = 0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) plus += evolve_cycle(seq, events, noise, rng)->parity > 0;
  CHECK(std::abs(plus - n / 2.0) < 5.0 * std::sqrt(n / 4.0));
}

TEST_CASE("memory cycles") {
  const SequenceConfig seq;
  const NoiseParams noise;
  const QubitSource source = [](int, Party, SplitMix64& rng) {
    return TimeBinQubit{bernoulli(rng, 0.5) ? Basis::X : Basis::Y, bernoulli(rng, 0.5) ? 1 : -1};
  };

  SUBCASE("no photons, no records") {
    ChannelConfig dark;
    dark.n_m = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const auto r = run_memory_cycle(seq, dark, source, noise, k);
      CHECK_FALSE(r.record.has_value());
      CHECK(r.heralds == 0);
    }
  }

  SUBCASE("seeded cycles are reproducible") {
    ChannelConfig bright;
    bright.n_m = 1.0;
    for (std::uint64_t k = 0; k < 2000; ++k) {
      const auto r1 = run_memory_cycle(seq, bright, source, noise, derive_seed(4, k));
      const auto r2 = run_memory_cycle(seq, bright, source, noise, derive_seed(4, k));
      REQUIRE(r1.heralds == r2.heralds);
      REQUIRE(r1.record.has_value() == r2.record.has_value());
      if (r1.record) {
        CHECK(r1.record->slot_i < r1.record->slot_j);
        CHECK(r1.record->m3 == r2.record->m3);
        CHECK(r1.record->parity == r1.record->m1 * r1.record->m2 * r1.record->m3);
        const bool odd = r1.record->frame_parity == FrameParity::Odd;
        const BellState label = r1.record->bell_label;
        CHECK(odd == (label == BellState::PsiPlus || label == BellState::PsiMinus));
      }
    }
  }

  SUBCASE("herald probability per slot is n_p eta") {
    for (SenderMode mode : {SenderMode::Simultaneous, SenderMode::Random, SenderMode::Alternating}) {
      ChannelConfig chan;
      chan.n_m = 0.5;
      chan.sender_mode = mode;
      const std::uint64_t cycles = 20000;
      double heralds = 0.0;
      for (std::uint64_t k = 0; k < cycles; ++k) {
        heralds += run_memory_cycle(seq, chan, source, noise, derive_seed(10, k)).heralds;
      }
      const double slots = static_cast<double>(cycles) * seq.n_slots *
                           (mode == SenderMode::Simultaneous ? 2.0 : 1.0);
      const double p = chan.n_p() * chan.eta;
      CHECK(std::abs(heralds - slots * p) < 3.0 * std::sqrt(slots * p * (1.0 - p)));
    }
  }

  SUBCASE("slot configuration mismatch is rejected") {
    ChannelConfig chan;
    SequenceConfig bad = seq;
    bad.n_slots = 100;
    CHECK_THROWS_AS(run_memory_cycle(bad, chan, source, noise, 1), ConfigError);
  }
}
