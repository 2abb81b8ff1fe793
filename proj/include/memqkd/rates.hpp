#pragma once

#include <functional>
#include <span>
#include <vector>

#include "memqkd/session.hpp"

namespace memqkd {

// QBER inference, secret fraction and key-rate bounds.

/// -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0.
double binary_entropy(double x);

/// Secret fraction against individual attacks:
///   r_s = max(0, h(1/2 + sqrt(E(1-E))) - h(E)),
/// i.e. I(A,B) = 1 - h(E) minus I_Eve = 1 - h(1/2 + sqrt(E(1-E))).
double secret_fraction(double qber);

/// Zero crossing of secret_fraction (about 0.1464).
double individual_attack_threshold();

/// QBER bound for unconditional security (Shor-Preskill).
inline constexpr double kUnconditionalQberBound = 0.110;

struct BinomialCount {
  double errors = 0.0;
  double trials = 0.0;
};

/// Posterior of the QBER E on a uniform grid over [0, 1/2] with a flat
/// prior. The likelihood is the product of one binomial per input
/// combination, all sharing E.
class QberPosterior {
 public:
  static constexpr double kGridStep = 1e-4;
  static constexpr double kHalfWidthMass = 0.341;

  /// Throws ConfigError if errors > trials or counts are negative, and
  /// StatisticsError if every cell is empty.
  static QberPosterior from_counts(std::span<const BinomialCount> cells);
  static QberPosterior from_cells(std::span<const CellCount> cells);

  /// Posterior of a single binomial with ml (1 - ml) / n = sigma^2 and
  /// k = ml n (fractional pseudo-counts).
  static QberPosterior from_moments(double ml, double sigma);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& density() const noexcept { return density_; }

  double ml() const noexcept { return grid_[ml_index_]; }
  /// Bounds enclosing 34.1% of the posterior mass on each side of the ML value.
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  /// Posterior mass of E < threshold.
  double probability_below(double threshold) const;
  /// Posterior mass of the set where pred(E) holds.
  double probability(const std::function<bool(double)>& pred) const;

 private:
  explicit QberPosterior(std::vector<double> log_likelihood);

  std::vector<double> grid_;
  std::vector<double> density_;
  std::size_t ml_index_ = 0;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

/// Direct-transmission MDI-QKD bound: (q^2 + (1-q)^2) p, which is p/2 for
/// unbiased bases and 0.9802 p for a 99:1 bias.
double rate_direct_bound(double p_ab, double basis_bias = 0.5);

struct PlobBound {
  double linear = 0.0;  // 1.44 p
  double exact = 0.0;   // -log2(1 - p)
};

/// Repeaterless secret-key capacity. Throws ConfigError for p outside [0, 1).
PlobBound plob_bound(double p_ab);

inline constexpr double kPlobSlope = 1.44;

/// Sifted-rate enhancement over direct transmission per channel occupancy:
///   eta^2 (N_pi - 1)(N_pi - 2) N_sub / (2 N_pi).
double sifted_enhancement(double eta, int n_pi, int n_sub);

struct QberSummary {
  double ml = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct NormalizedRates {
  double sifted_rate = 0.0;
  double secure_rate = 0.0;
  double over_direct = 0.0;  // R / R_max
  double over_plob = 0.0;    // R / (1.44 p) or R / (-log2(1-p))
  /// Posterior probability that the secure rate exceeds each bound.
  double confidence_over_direct = 0.0;
  double confidence_over_plob = 0.0;
};

struct KeyRateReport {
  double p_ab = 0.0;
  double basis_bias = 0.5;
  double r_max = 0.0;
  PlobBound plob;
  QberSummary qber;
  double r_s = 0.0;
  double r_s_lower = 0.0;  // r_s at the upper QBER bound
  double r_s_upper = 0.0;  // r_s at the lower QBER bound
  NormalizedRates per_use;
  NormalizedRates per_occupancy;
};

struct BoundsConfig {
  /// Compare against -log2(1-p) instead of the linearised 1.44 p.
  bool exact_plob = false;
};

/// Report from simulated counts: sifted rates are sifted coincidences over
/// channel uses and occupancies of the session.
KeyRateReport build_report(const SessionReport& session, const QberPosterior& posterior,
                           const BoundsConfig& bounds = {});

/// Report from the enhancement formula: the sifted rate per occupancy is
/// sifted_enhancement(eta, N_pi, N_sub) R_max(p, bias).
KeyRateReport analytic_report(const QberPosterior& posterior, double eta, int n_pi, int n_sub,
                              double basis_bias, double p_ab, const BoundsConfig& bounds = {});

}  // namespace memqkd
