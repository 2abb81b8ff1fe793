#include <doctest.h>

#include <cmath>

#include "memqkd/errors.hpp"
#include "memqkd/session.hpp"

using namespace memqkd;

namespace {

const SequenceConfig kSeq;

ChannelConfig bright_channel() {
  ChannelConfig chan;
  chan.n_m = 2.36;  // 2 n_m eta ~ 2 heralds per cycle
  return chan;
}

NoiseParams noiseless() { return NoiseParams::ideal(); }

}  // namespace

TEST_CASE("dark channel yields an empty tally") {
  ChannelConfig chan;
  chan.n_m = 0.0;
  const auto res = simulate_session(kSeq, chan, {}, NoiseParams{}, 1000, 1);
  CHECK(res.tally == CoincidenceTally{});
  CHECK(res.report.bsm_successes == 0);
  CHECK(res.report.heralds == 0);
}

TEST_CASE("session validation") {
  CHECK_THROWS_AS(simulate_session(kSeq, ChannelConfig{}, {}, NoiseParams{}, 0, 1), ConfigError);
  ChannelConfig chan;
  chan.n_slots = 60;
  CHECK_THROWS_AS(simulate_session(kSeq, chan, {}, NoiseParams{}, 10, 1), ConfigError);
  PartyConfig parties;
  parties.basis_bias = 1.5;
  CHECK_THROWS_AS(simulate_session(kSeq, ChannelConfig{}, parties, NoiseParams{}, 10, 1), ConfigError);
}

TEST_CASE("sessions are deterministic and independent of sharding") {
  const ChannelConfig chan = bright_channel();
  SessionOptions one;
  SessionOptions many;
  many.threads = 3;
  const auto a = simulate_session(kSeq, chan, {}, NoiseParams{}, 20001, 77, one);
  const auto b = simulate_session(kSeq, chan, {}, NoiseParams{}, 20001, 77, many);
  const auto c = simulate_session(kSeq, chan, {}, NoiseParams{}, 20001, 78, one);
  CHECK(a.tally == b.tally);
  CHECK(a.report.heralds == b.report.heralds);
  CHECK(a.report.qubits_drawn == b.report.qubits_drawn);
  CHECK(a.report.sifted().xx == b.report.sifted().xx);
  CHECK_FALSE(a.tally == c.tally);

  SUBCASE("merging is addition") {
    CoincidenceTally ab = a.tally;
    ab += c.tally;
    CoincidenceTally ba = c.tally;
    ba += a.tally;
    CHECK(ab == ba);
    CHECK(ab.total() == a.tally.total() + c.tally.total());
  }
}

TEST_CASE("report bookkeeping") {
  const auto res = simulate_session(kSeq, bright_channel(), {}, NoiseParams{}, 20000, 3);
  const auto& r = res.report;
  const SiftedCounts s = r.sifted();
  CHECK(res.tally.total() == r.bsm_successes);
  CHECK(s.total().sifted <= r.bsm_successes);
  CHECK(s.xx.errors <= s.xx.sifted);
  CHECK(s.yy.errors <= s.yy.sifted);
  CHECK(r.bsm_records == r.bsm_successes + r.same_party_pairs);
  CHECK(r.channel.occupancy == 2.0 * r.channel.uses);
  CHECK(r.qubits_drawn >= 2 * r.bsm_records);

  const SiftedCounts from_tally = sift(res.tally);
  CHECK(from_tally.xx == s.xx);
  CHECK(from_tally.yy == s.yy);
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  for (const auto& cell : qber_cells(res.tally)) {
    trials += cell.trials;
    errors += cell.errors;
  }
  CHECK(trials == s.total().sifted);
  CHECK(errors == s.total().errors);
}

TEST_CASE("noiseless QKD has zero QBER") {
  const auto res = simulate_session(kSeq, bright_channel(), {}, noiseless(), 100000, 5);
  const SiftedCounts s = res.report.sifted();
  CHECK(s.xx.sifted > 1000);
  CHECK(s.yy.sifted > 1000);
  CHECK(s.xx.errors == 0);
  CHECK(s.yy.errors == 0);
}

TEST_CASE("without the frame correction odd-frame YY pairs fail") {
  SessionOptions opt;
  opt.frame_correction = false;
  const auto res = simulate_session(kSeq, bright_channel(), {}, noiseless(), 100000, 5, opt);
  const auto& f = res.report.sifted_by_frame;
  CHECK(f[0][0].errors == 0);  // XX even
  CHECK(f[0][1].errors == 0);  // XX odd
  CHECK(f[1][0].errors == 0);  // YY even
  CHECK(f[1][1].sifted > 1000);
  CHECK(f[1][1].errors == f[1][1].sifted);  // YY odd: every parity inverted
  const double yy_qber = res.report.sifted().yy.qber();
  CHECK(yy_qber == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("sifting examples") {
  CoincidenceTally t;
  t.add({Basis::X, +1}, {Basis::Y, +1}, +1, 10);
  CHECK(sift(t).total().sifted == 0);

  CoincidenceTally e;
  e.add({Basis::X, +1}, {Basis::X, +1}, -1);
  CHECK(sift(e).xx.errors == 1);
  CoincidenceTally ok;
  ok.add({Basis::Y, +1}, {Basis::Y, -1}, +1);
  CHECK(sift(ok).yy.sifted == 1);
  CHECK(sift(ok).yy.errors == 0);
}

TEST_CASE("basis bias") {
  for (double bias : {0.5, 0.99}) {
    PartyConfig parties;
    parties.basis_bias = bias;
    const auto res = simulate_session(kSeq, bright_channel(), parties, NoiseParams{}, 40000, 9);
    const auto& r = res.report;
    const double n = static_cast<double>(r.qubits_drawn);
    REQUIRE(n > 1e4);
    const double x = static_cast<double>(r.x_basis_drawn);
    CHECK(std::abs(x - bias * n) < 3.0 * std::sqrt(n * bias * (1.0 - bias)));

    const double keep = bias * bias + (1.0 - bias) * (1.0 - bias);
    const double succ = static_cast<double>(r.bsm_successes);
    const double sifted = static_cast<double>(r.sifted().total().sifted);
    CHECK(std::abs(sifted - keep * succ) < 4.0 * std::sqrt(succ * keep * (1.0 - keep)));
  }
}

TEST_CASE("QBER at the default operating point") {
  const auto res = simulate_session(kSeq, ChannelConfig{}, {}, NoiseParams{}, 100'000'000, 20200323);
  const SiftedCounts s = res.report.sifted();
  const double qber = static_cast<double>(s.total().errors) / static_cast<double>(s.total().sifted);
  CHECK(qber >= 0.10);
  CHECK(qber <= 0.13);
}

TEST_CASE("CHSH statistic") {
  SUBCASE("noiseless correlations reach the Tsirelson bound") {
    PartyConfig parties;
    parties.mode = SessionMode::Chsh;
    const auto res = simulate_session(kSeq, bright_channel(), parties, noiseless(), 1'000'000, 21);
    for (int parity : {+1, -1}) {
      const ChshResult c = chsh_statistic(res.tally, parity);
      CHECK(c.s == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.05 / 2.83));
      for (double term : c.terms) CHECK(std::abs(std::abs(term) - 1.0 / std::sqrt(2.0)) < 0.03);
    }
  }

  SUBCASE("random parities give S near zero") {
    CoincidenceTally t;
    for (Basis a : kAllBases) {
      for (Basis b : kAllBases) {
        for (int sa : {+1, -1}) {
          for (int sb : {+1, -1}) t.add({a, sa}, {b, sb}, +1, 1000);
        }
      }
    }
    CHECK(chsh_statistic(t, +1).s == doctest::Approx(0.0));
  }

  SUBCASE("empty basis pair") {
    CoincidenceTally t;
    t.add({Basis::X, +1}, {Basis::A, +1}, +1);
    CHECK_THROWS_AS(chsh_statistic(t, +1), StatisticsError);
    CHECK_THROWS_AS(chsh_statistic(t, 0), ConfigError);
  }
}

TEST_CASE("channel accounting") {
  const TimingOverheads none = TimingOverheads::none();
  const auto acc = channel_accounting(kSeq, SenderMode::Simultaneous, 1000, none);
  CHECK(acc.uses == 124000.0);
  CHECK(acc.occupancy == 248000.0);
  CHECK(acc.clock_rate_hz == doctest::Approx(124.0 / (62 * 174e-9)).epsilon(1e-12));

  const auto alt = channel_accounting(kSeq, SenderMode::Random, 1000, none);
  CHECK(alt.occupancy == 124000.0);
  CHECK(alt.uses == 62000.0);

  // N = 248 with lock, readout and initialisation overheads: one 200 ms lock
  // per 4000 cycles and two 30 us readouts per cycle.
  const SequenceConfig s248 = SequenceConfig::for_total(248);
  const auto budget = channel_accounting(s248, SenderMode::Simultaneous, 4000, TimingOverheads{});
  const double per_cycle = 124 * 174e-9 + 2 * 30e-6 + 0.2 / 4000;
  CHECK(budget.clock_rate_hz == doctest::Approx(248.0 / per_cycle).epsilon(1e-12));
  CHECK(budget.clock_rate_hz == doctest::Approx(1.885e6).epsilon(1e-3));

  TimingOverheads relock;
  relock.duty_multiplier = 0.5;
  const auto slow = channel_accounting(s248, SenderMode::Simultaneous, 4000, relock);
  CHECK(slow.clock_rate_hz == doctest::Approx(0.5 * budget.clock_rate_hz));

  TimingOverheads bad;
  bad.duty_multiplier = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
