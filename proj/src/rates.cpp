#include "memqkd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

constexpr std::size_t kGridPoints = 5001;  // [0, 0.5] in steps of 1e-4

double grid_point(std::size_t i) { return static_cast<double>(i) * QberPosterior::kGridStep; }

double log_binomial_kernel(double e, double k, double n) {
  double ll = 0.0;
  if (k > 0.0) ll += k * (e > 0.0 ? std::log(e) : -std::numeric_limits<double>::infinity());
  if (n - k > 0.0) ll += (n - k) * std::log1p(-e);
  return ll;
}

NormalizedRates normalized(double sifted_rate, double r_s, double r_max, double plob,
                           const QberPosterior& posterior) {
  NormalizedRates out;
  out.sifted_rate = sifted_rate;
  out.secure_rate = r_s * sifted_rate;
  out.over_direct = out.secure_rate / r_max;
  out.over_plob = out.secure_rate / plob;
  out.confidence_over_direct =
      posterior.probability([&](double e) { return secret_fraction(e) * sifted_rate > r_max; });
  out.confidence_over_plob =
      posterior.probability([&](double e) { return secret_fraction(e) * sifted_rate > plob; });
  return out;
}

void fill_common(KeyRateReport& rep, const QberPosterior& posterior, double p_ab, double bias) {
  rep.p_ab = p_ab;
  rep.basis_bias = bias;
  rep.r_max = rate_direct_bound(p_ab, bias);
  rep.plob = plob_bound(p_ab);
  rep.qber = {posterior.ml(), posterior.lower(), posterior.upper()};
  rep.r_s = secret_fraction(rep.qber.ml);
  rep.r_s_lower = secret_fraction(rep.qber.upper);
  rep.r_s_upper = secret_fraction(rep.qber.lower);
}

}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ConfigError("binary entropy argument must lie in [0, 1], got " + std::to_string(x));
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double secret_fraction(double qber) {
  if (!(qber >= 0.0 && qber <= 0.5)) {
    throw ConfigError("QBER must lie in [0, 1/2], got " + std::to_string(qber));
  }
  const double eve = 0.5 + std::sqrt(qber * (1.0 - qber));
  return std::max(0.0, binary_entropy(std::min(eve, 1.0)) - binary_entropy(qber));
}

double individual_attack_threshold() {
  // The unclamped difference is decreasing on (0, 1/2) with one root.
  auto f = [](double e) {
    return binary_entropy(0.5 + std::sqrt(e * (1.0 - e))) - binary_entropy(e);
  };
  double lo = 0.05;
  double hi = 0.25;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

QberPosterior::QberPosterior(std::vector<double> log_likelihood) {
  grid_.resize(kGridPoints);
  for (std::size_t i = 0; i < kGridPoints; ++i) grid_[i] = grid_point(i);

  const auto peak = std::max_element(log_likelihood.begin(), log_likelihood.end());
  ml_index_ = static_cast<std::size_t>(peak - log_likelihood.begin());
  const double max_ll = *peak;

  density_.resize(kGridPoints);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    density_[i] = std::exp(log_likelihood[i] - max_ll);
    sum += density_[i];
  }
  for (auto& d : density_) d /= sum * kGridStep;

  // Walk out from the ML point until each side holds 34.1% of the mass.
  // The ML cell's own mass is split evenly between the two sides.
  const double centre = 0.5 * density_[ml_index_] * kGridStep;
  double mass = centre;
  std::size_t i = ml_index_;
  while (i > 0 && mass < kHalfWidthMass) mass += density_[--i] * kGridStep;
  lower_ = grid_[i];
  mass = centre;
  i = ml_index_;
  while (i + 1 < kGridPoints && mass < kHalfWidthMass) mass += density_[++i] * kGridStep;
  upper_ = grid_[i];
}

QberPosterior QberPosterior::from_counts(std::span<const BinomialCount> cells) {
  double total_trials = 0.0;
  for (const auto& c : cells) {
    if (!(c.errors >= 0.0 && c.trials >= 0.0) || c.errors > c.trials) {
      throw ConfigError("posterior cell needs 0 <= errors <= trials");
    }
    total_trials += c.trials;
  }
  if (total_trials <= 0.0) throw StatisticsError("QBER posterior needs at least one trial");

  std::vector<double> ll(kGridPoints, 0.0);
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    const double e = grid_point(i);
    for (const auto& c : cells) ll[i] += log_binomial_kernel(e, c.errors, c.trials);
  }
  return QberPosterior(std::move(ll));
}

QberPosterior QberPosterior::from_cells(std::span<const CellCount> cells) {
  std::vector<BinomialCount> counts;
  counts.reserve(cells.size());
  for (const auto& c : cells) {
    counts.push_back({static_cast<double>(c.errors), static_cast<double>(c.trials)});
  }
  return from_counts(counts);
}

QberPosterior QberPosterior::from_moments(double ml, double sigma) {
  if (!(ml > 0.0 && ml < 0.5)) throw ConfigError("posterior ML value must lie in (0, 1/2)");
  if (!(sigma > 0.0)) throw ConfigError("posterior width must be > 0");
  const double n = ml * (1.0 - ml) / (sigma * sigma);
  const BinomialCount cell{ml * n, n};
  return from_counts(std::span<const BinomialCount>(&cell, 1));
}

double QberPosterior::probability_below(double threshold) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < grid_.size() && grid_[i] < threshold; ++i) {
    mass += density_[i] * kGridStep;
  }
  return mass;
}

double QberPosterior::probability(const std::function<bool(double)>& pred) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (pred(grid_[i])) mass += density_[i] * kGridStep;
  }
  return mass;
}

double rate_direct_bound(double p_ab, double basis_bias) {
  if (!(p_ab >= 0.0 && p_ab <= 1.0)) throw ConfigError("p_AB must lie in [0, 1]");
  if (!(basis_bias >= 0.0 && basis_bias <= 1.0)) throw ConfigError("basis bias must lie in [0, 1]");
  return (basis_bias * basis_bias + (1.0 - basis_bias) * (1.0 - basis_bias)) * p_ab;
}

PlobBound plob_bound(double p_ab) {
  if (!(p_ab >= 0.0 && p_ab < 1.0)) throw ConfigError("repeaterless bound needs p_AB in [0, 1)");
  return {kPlobSlope * p_ab, -std::log1p(-p_ab) / std::log(2.0)};
}

double sifted_enhancement(double eta, int n_pi, int n_sub) {
  if (n_pi < 3) throw ConfigError("sifted enhancement needs N_pi >= 3");
  if (n_sub < 1) throw ConfigError("sifted enhancement needs N_sub >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  const double np = static_cast<double>(n_pi);
  return eta * eta * (np - 1.0) * (np - 2.0) * static_cast<double>(n_sub) / (2.0 * np);
}

KeyRateReport build_report(const SessionReport& session, const QberPosterior& posterior,
                           const BoundsConfig& bounds) {
  if (session.channel.uses <= 0.0) throw StatisticsError("session has no channel uses");
  KeyRateReport rep;
  fill_common(rep, posterior, session.p_ab, session.basis_bias);
  if (rep.r_max <= 0.0) throw StatisticsError("direct-transmission bound is zero (p_AB = 0)");
  const double plob = bounds.exact_plob ? rep.plob.exact : rep.plob.linear;
  const double sifted = static_cast<double>(session.sifted().total().sifted);
  rep.per_use = normalized(sifted / session.channel.uses, rep.r_s, rep.r_max, plob, posterior);
  rep.per_occupancy =
      normalized(sifted / session.channel.occupancy, rep.r_s, rep.r_max, plob, posterior);
  return rep;
}

KeyRateReport analytic_report(const QberPosterior& posterior, double eta, int n_pi, int n_sub,
                              double basis_bias, double p_ab, const BoundsConfig& bounds) {
  KeyRateReport rep;
  fill_common(rep, posterior, p_ab, basis_bias);
  if (rep.r_max <= 0.0) throw ConfigError("p_AB must be > 0 for a rate report");
  const double plob = bounds.exact_plob ? rep.plob.exact : rep.plob.linear;
  const double enhancement = sifted_enhancement(eta, n_pi, n_sub);
  rep.per_occupancy = normalized(enhancement * rep.r_max, rep.r_s, rep.r_max, plob, posterior);
  rep.per_use = normalized(2.0 * enhancement * rep.r_max, rep.r_s, rep.r_max, plob, posterior);
  // Ratios straight from the formula, free of the rounding in R / R_max.
  rep.per_occupancy.over_direct = enhancement * rep.r_s;
  rep.per_use.over_direct = 2.0 * enhancement * rep.r_s;
  return rep;
}

}  // namespace memqkd
