#include "memqkd/commands.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

struct PointResult {
  SequenceConfig seq;
  ChannelConfig chan;
  SessionResult session;
  QberPosterior posterior;
  KeyRateReport report;
};

PointResult run_point(const ScenarioConfig& cfg, const SequenceConfig& seq, const ChannelConfig& chan) {
  SessionResult session = simulate_session(seq, chan, cfg.parties, cfg.noise, cfg.run.cycles,
                                           cfg.run.seed, cfg.session_options());
  const auto cells = qber_cells(session.tally);
  QberPosterior posterior = QberPosterior::from_cells(cells);
  KeyRateReport report = build_report(session.report, posterior);
  return {seq, chan, std::move(session), std::move(posterior), report};
}

ScenarioConfig with_qkd_mode(ScenarioConfig cfg) {
  cfg.parties.mode = SessionMode::Qkd;
  return cfg;
}

constexpr std::string_view kSweepHeader =
    "N,n_m,n_p,p_AB,sifted_rate,qber_ml,qber_lo,qber_hi,r_s,R,R_over_Rmax,R_over_PLOB,seed\n";

std::string sweep_row(const PointResult& p, std::uint64_t seed) {
  const auto& r = p.report;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", p.seq.n_slots,
                     format_float(p.chan.n_m), format_float(p.chan.n_p()), format_float(r.p_ab),
                     format_float(r.per_use.sifted_rate), format_float(r.qber.ml),
                     format_float(r.qber.lower), format_float(r.qber.upper), format_float(r.r_s),
                     format_float(r.per_use.secure_rate), format_float(r.per_use.over_direct),
                     format_float(r.per_use.over_plob), seed);
}

}  // namespace

std::string format_float(double v) { return fmt::format("{:.9g}", v); }

CommandOutput cmd_simulate(const ScenarioConfig& config) {
  const ScenarioConfig cfg = with_qkd_mode(config);
  cfg.validate();
  const PointResult p = run_point(cfg, cfg.sequence, cfg.channel);
  const SessionReport& s = p.session.report;
  const SiftedCounts sifted = s.sifted();
  const KeyRateReport& r = p.report;
  const double conf_eu = p.posterior.probability_below(kUnconditionalQberBound);

  CommandOutput out;
  out.csv =
      "N,N_pi,N_sub,n_m,n_p,p_AB,cycles,heralds,bsm_successes,sifted_xx,errors_xx,sifted_yy,"
      "errors_yy,sifted_rate,sifted_rate_occupancy,qber_ml,qber_lo,qber_hi,r_s,R,R_over_Rmax,"
      "R_over_PLOB,confidence_below_Eu,clock_rate_hz,seed\n";
  out.csv += fmt::format(
      "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
      p.seq.n_slots, p.seq.n_pi, p.seq.n_sub, format_float(p.chan.n_m), format_float(p.chan.n_p()),
      format_float(r.p_ab), s.cycles, s.heralds, s.bsm_successes, sifted.xx.sifted,
      sifted.xx.errors, sifted.yy.sifted, sifted.yy.errors, format_float(r.per_use.sifted_rate),
      format_float(r.per_occupancy.sifted_rate), format_float(r.qber.ml),
      format_float(r.qber.lower), format_float(r.qber.upper), format_float(r.r_s),
      format_float(r.per_use.secure_rate), format_float(r.per_use.over_direct),
      format_float(r.per_use.over_plob), format_float(conf_eu),
      format_float(s.channel.clock_rate_hz), cfg.run.seed);

  out.summary = fmt::format(
      "N = {} (N_pi = {}, N_sub = {}), <n>_m = {:.4g}, p_AB = {:.4g}\n"
      "cycles {}  heralds {}  A-B coincidences {}  same-party pairs {}  discarded {}\n"
      "sifted XX {} ({} errors)  YY {} ({} errors)\n"
      "QBER {:.4f} (+{:.4f} / -{:.4f}), P(E < {:.3f}) = {:.3f}\n"
      "sifted rate {:.4g} per use, {:.4g} per occupancy\n"
      "r_s {:.4f}  R {:.4g} per use\n"
      "R / R_max {:.3f} per use, {:.3f} per occupancy;  R / PLOB {:.3f} per use\n"
      "modeled clock rate {:.4g} Hz\n",
      p.seq.n_slots, p.seq.n_pi, p.seq.n_sub, p.chan.n_m, r.p_ab, s.cycles, s.heralds,
      s.bsm_successes, s.same_party_pairs, s.discarded_cycles, sifted.xx.sifted, sifted.xx.errors,
      sifted.yy.sifted, sifted.yy.errors, r.qber.ml, r.qber.upper - r.qber.ml,
      r.qber.ml - r.qber.lower, kUnconditionalQberBound, conf_eu, r.per_use.sifted_rate,
      r.per_occupancy.sifted_rate, r.r_s, r.per_use.secure_rate, r.per_use.over_direct,
      r.per_occupancy.over_direct, r.per_use.over_plob, s.channel.clock_rate_hz);
  return out;
}

CommandOutput cmd_sweep(const ScenarioConfig& config) {
  const ScenarioConfig cfg = with_qkd_mode(config);
  cfg.validate();
  if (cfg.run.sweep_axis == SweepAxis::None) throw ConfigError("sweep needs run.sweep_axis (N or n_m)");
  if (cfg.run.sweep_values.empty()) throw ConfigError("sweep needs a non-empty run.sweep_values");

  CommandOutput out;
  out.csv = std::string(kSweepHeader);
  for (double v : cfg.run.sweep_values) {
    SequenceConfig seq = cfg.sequence;
    ChannelConfig chan = cfg.channel;
    if (cfg.run.sweep_axis == SweepAxis::N) {
      seq = SequenceConfig::for_total(static_cast<int>(v), cfg.sequence.n_sub);
      seq.delta_t_ns = cfg.sequence.delta_t_ns;
      seq.pi_time_ns = cfg.sequence.pi_time_ns;
      chan.n_slots = seq.n_slots;
    } else {
      chan.n_m = v;
    }
    chan.validate();
    const PointResult p = run_point(cfg, seq, chan);
    out.csv += sweep_row(p, cfg.run.seed);
    out.summary += fmt::format(
        "N = {:4d}  n_m = {:.4g}  QBER {:.4f}  sifted/use {:.4g}  R/R_max {:.3f}  R/PLOB {:.3f}\n",
        seq.n_slots, chan.n_m, p.report.qber.ml, p.report.per_use.sifted_rate,
        p.report.per_use.over_direct, p.report.per_use.over_plob);
  }
  return out;
}

CommandOutput cmd_truth_table(std::uint64_t seed, std::uint64_t trials_per_row) {
  if (trials_per_row < 1) throw ConfigError("truth table needs at least one trial per row");
  const SequenceConfig seq = SequenceConfig::from_split(62, 2);
  const NoiseParams ideal = NoiseParams::ideal();

  CommandOutput out;
  out.csv =
      "alice,bob,frame,pulses_between,alice_corrected,expected_parity,bell_state,trials,"
      "parity_plus,parity_minus,violations\n";
  out.summary = "alice  bob  frame  parity  state  violations\n";
  std::uint64_t row = 0;
  for (FrameParity frame : {FrameParity::Even, FrameParity::Odd}) {
    // Slots 0 and 1 share a free-precession interval; slot 2 follows the first pulse.
    const int second_slot = frame == FrameParity::Even ? 1 : 2;
    for (Basis basis : {Basis::X, Basis::Y}) {
      for (int sa : {+1, -1}) {
        for (int sb : {+1, -1}) {
          const TimeBinQubit a{basis, sa};
          const TimeBinQubit b{basis, sb};
          TimeBinQubit corrected = a;
          if (y_frame_correction(a.basis, b.basis, frame) < 0) corrected.sign = -corrected.sign;
          // The photon phase seen by the spin: conjugated when a pulse intervenes.
          const TimeBinQubit seen = frame == FrameParity::Odd ? a.conjugate() : a;
          const int expected = ideal_parity(seen.phase(), b.phase());
          const std::array<CycleEvent, 2> events = {
              CycleEvent{0, Party::Alice, EventKind::Herald, a},
              CycleEvent{second_slot, Party::Bob, EventKind::Herald, b}};

          SplitMix64 rng(derive_seed(seed, row++));
          std::uint64_t plus = 0;
          std::uint64_t pulses = 0;
          for (std::uint64_t t = 0; t < trials_per_row; ++t) {
            const auto rec = evolve_cycle(seq, events, ideal, rng);
            if (rec->parity > 0) ++plus;
            pulses = static_cast<std::uint64_t>(rec->pulses_between);
          }
          const std::uint64_t minus = trials_per_row - plus;
          const std::uint64_t violations = expected > 0 ? minus : plus;
          const auto state = bell_state_name(classify_bell_state(expected, frame));
          const std::string_view frame_name = frame == FrameParity::Even ? "even" : "odd";
          out.csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", a.label(), b.label(),
                                 frame_name, pulses, corrected.label(), expected, state,
                                 trials_per_row, plus, minus, violations);
          out.summary += fmt::format("{:>5}  {:>3}  {:>5}  {:>+6d}  {:>5}  {}\n", a.label(),
                                     b.label(), frame_name, expected, state, violations);
        }
      }
    }
  }
  return out;
}

CommandOutput cmd_chsh(const ScenarioConfig& config) {
  ScenarioConfig cfg = config;
  cfg.parties.mode = SessionMode::Chsh;
  cfg.validate();
  const SessionResult session = simulate_session(cfg.sequence, cfg.channel, cfg.parties, cfg.noise,
                                                 cfg.run.cycles, cfg.run.seed,
                                                 cfg.session_options());
  CommandOutput out;
  out.csv = "parity,S,E_xa,E_xb,E_ya,E_yb,n_xa,n_xb,n_ya,n_yb,seed\n";
  out.summary = fmt::format("{} A-B coincidences over {} cycles\n", session.report.bsm_successes,
                            session.report.cycles);
  for (int parity : {+1, -1}) {
    const ChshResult c = chsh_statistic(session.tally, parity);
    out.csv += fmt::format("{:+d},{},{},{},{},{},{},{},{},{},{}\n", parity, format_float(c.s),
                           format_float(c.terms[0]), format_float(c.terms[1]),
                           format_float(c.terms[2]), format_float(c.terms[3]), c.counts[0],
                           c.counts[1], c.counts[2], c.counts[3], cfg.run.seed);
    out.summary += fmt::format(
        "S{} = {:.3f}   <AB>xa {:+.3f}  <AB>xb {:+.3f}  <AB>ya {:+.3f}  <AB>yb {:+.3f}\n",
        parity > 0 ? '+' : '-', c.s, c.terms[0], c.terms[1], c.terms[2], c.terms[3]);
  }
  return out;
}

CommandOutput cmd_rates(const RatesQuery& q) {
  const QberPosterior posterior = QberPosterior::from_moments(q.qber, q.sigma);
  const KeyRateReport r = analytic_report(posterior, q.eta, q.n_pi, q.n_sub, q.basis_bias, q.p_ab,
                                          BoundsConfig{q.exact_plob});
  CommandOutput out;
  out.csv =
      "normalization,p_AB,basis_bias,qber_ml,qber_lo,qber_hi,r_s,R_max,PLOB,sifted_rate,R,"
      "R_over_Rmax,R_over_PLOB,confidence_over_Rmax,confidence_over_PLOB\n";
  const double plob = q.exact_plob ? r.plob.exact : r.plob.linear;
  for (const auto& [name, n] : {std::pair{"use", r.per_use}, std::pair{"occupancy", r.per_occupancy}}) {
    out.csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", name,
                           format_float(r.p_ab), format_float(r.basis_bias),
                           format_float(r.qber.ml), format_float(r.qber.lower),
                           format_float(r.qber.upper), format_float(r.r_s), format_float(r.r_max),
                           format_float(plob), format_float(n.sifted_rate),
                           format_float(n.secure_rate), format_float(n.over_direct),
                           format_float(n.over_plob), format_float(n.confidence_over_direct),
                           format_float(n.confidence_over_plob));
  }
  out.summary = fmt::format(
      "E = {:.4f} (+{:.4f} / -{:.4f}), r_s = {:.4f}, enhancement {:.4f}\n"
      "p_AB = {:.4g}, bias {:.2f}: R_max = {:.4g}, PLOB = {:.4g}\n"
      "                 R/R_max   R/PLOB   conf(R>R_max)  conf(R>PLOB)\n"
      "per use        {:9.3f} {:8.3f} {:14.3f} {:13.3f}\n"
      "per occupancy  {:9.3f} {:8.3f} {:14.3f} {:13.3f}\n",
      r.qber.ml, r.qber.upper - r.qber.ml, r.qber.ml - r.qber.lower, r.r_s,
      sifted_enhancement(q.eta, q.n_pi, q.n_sub), r.p_ab, r.basis_bias, r.r_max, plob,
      r.per_use.over_direct, r.per_use.over_plob, r.per_use.confidence_over_direct,
      r.per_use.confidence_over_plob, r.per_occupancy.over_direct, r.per_occupancy.over_plob,
      r.per_occupancy.confidence_over_direct, r.per_occupancy.confidence_over_plob);
  return out;
}

}  // namespace memqkd
