#pragma once

#include <complex>

namespace memqkd {

// Spin-dependent cavity response and the heralding-efficiency budget.
// All frequencies in GHz; detunings are signed.

struct CavityParams {
  double g = 8.38;         // single-photon Rabi frequency
  double kappa = 21.6;     // cavity linewidth (a fit of the far-detuned spectrum gives 21.8)
  double kappa_wg = 10.8;  // cavity-waveguide coupling; kappa/2 is critical coupling
  double gamma = 0.123;    // atomic linewidth
  double delta_c = 0.0;    // probe-cavity detuning

  /// Throws ConfigError unless g >= 0, kappa > 0, 0 <= kappa_wg <= kappa, gamma > 0.
  void validate() const;
  friend bool operator==(const CavityParams&, const CavityParams&) = default;
};

/// Measured power reflectivities of the two spin states.
struct SpinReflectances {
  double r_up = 0.944;
  double r_down = 0.041;

  void validate() const;
  friend bool operator==(const SpinReflectances&, const SpinReflectances&) = default;
};

struct EfficiencyBudget {
  double eta_sp = 0.493;  // average device reflectivity
  double eta_c = 0.930;   // tapered fiber to diamond waveguide coupling
  double eta_f = 0.934;   // fiber network, 99:1 splitter and TDI
  double eta_qe = 0.99;   // detector quantum efficiency (lower bound)

  void validate() const;
  friend bool operator==(const EfficiencyBudget&, const EfficiencyBudget&) = default;
};

/// Heralding efficiency quoted for the node (mean of two calibrations).
inline constexpr double kDefaultHeraldingEfficiency = 0.423;

/// Single-port reflection amplitude of a resonant atom-cavity system at
/// probe detuning delta_c:
///
///   r = (i d + g^2/(i d + gamma/2) - kappa_wg + kappa/2)
///       / (i d + g^2/(i d + gamma/2) + kappa/2)
///
/// g = 0 gives the bare cavity response, which vanishes on resonance at
/// critical coupling.
std::complex<double> reflection_coefficient(const CavityParams& params);

/// C = 4 g^2 / (kappa gamma).
double cooperativity(const CavityParams& params);

/// Mean of the two spin-state reflectivities.
double average_reflectivity(const SpinReflectances& refl);

/// eta_sp * eta_c * eta_f * eta_qe.
double total_heralding_efficiency(const EfficiencyBudget& budget);

}  // namespace memqkd
