#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <string>
#include <string_view>

namespace memqkd {

// Spin memory and time-bin photonic qubits.
//
// Spin basis ordering is {|up>, |down>}. |up> is the state that couples to
// the cavity and reflects strongly. Every map here is a completely positive
// map on a 2x2 density matrix; randomness enters only through explicit
// uniform draws in [0, 1) supplied by the caller.

using Matrix2c = Eigen::Matrix2cd;

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

class SpinState {
 public:
  /// Throws NonPhysicalState unless rho is Hermitian with unit trace and
  /// eigenvalues >= -1e-10.
  explicit SpinState(const Matrix2c& rho);

  static SpinState from_bloch(const BlochVector& r);

  const Matrix2c& rho() const noexcept { return rho_; }
  BlochVector bloch() const noexcept;
  double purity() const noexcept;
  double min_eigenvalue() const noexcept;

 private:
  Matrix2c rho_;
};

enum class Basis : int { X = 0, Y = 1, A = 2, B = 3 };

inline constexpr std::array<Basis, 4> kAllBases = {Basis::X, Basis::Y, Basis::A, Basis::B};

std::string_view basis_name(Basis basis);
Basis parse_basis(std::string_view name);

/// (|e> + e^{i phase}|l>)/sqrt(2). The phase is fixed by (basis, sign):
///   X: {0, pi}  Y: {pi/2, 3pi/2}  A: {pi/4, 5pi/4}  B: {3pi/4, 7pi/4}
/// with sign +1 taking the first entry.
struct TimeBinQubit {
  Basis basis = Basis::X;
  int sign = +1;

  double phase() const;

  /// The qubit whose phase is -phase(). An odd number of pi pulses between
  /// two heralds conjugates the stored phase of the first photon, so
  /// relabelling that photon by its conjugate restores the even-frame
  /// parity rule. X is invariant, Y flips sign, A and B swap.
  TimeBinQubit conjugate() const;

  std::string label() const;  // e.g. "+x", "-b"

  friend bool operator==(const TimeBinQubit&, const TimeBinQubit&) = default;
};

struct HeraldResult {
  int m = +1;  // +1 or -1: which interferometer output fired
};

struct NoiseParams {
  /// Amplitude of the residual |down> reflection relative to |up>.
  /// The measured reflectivities give sqrt(0.041/0.944) = 0.208; the default
  /// is the calibrated value that puts the spin-photon fidelity at 0.945 for
  /// <n>_m = 0.002.
  double eps_leak = 0.24;
  /// Dephasing (Z-flip) probability per microwave pi pulse (ohmic heating).
  double p_mw = 0.00093;
  /// Z-flip probability per scattered photon that was not detected.
  /// 0.5 destroys the coherence completely.
  double p_scatter_dephase = 0.5;
  double f_readout = 0.9998;
  double f_init = 0.998;

  void validate() const;
  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;

  /// All noise switched off.
  static NoiseParams ideal();
  /// Default noise with eps_leak = sqrt(r_down / r_up).
  static NoiseParams from_reflectances(double r_up, double r_down);
};

/// Spin initialised into |down> with fidelity f_init and rotated to +x.
/// f_init = 1 gives the pure state (|up> + |down>)/sqrt(2).
SpinState prepare_superposition(double f_init = 1.0);

/// Unnormalised Kraus operator of a heralded reflection with outcome m:
///   (1 + eps m e^{i phase}) |up><up| + (m e^{i phase} + eps) |down><down|
Matrix2c herald_kraus(double phase, int m, double eps_leak);

/// Born probability of outcome m given that a reflected photon was detected.
double herald_probability(const SpinState& spin, double phase, int m, double eps_leak);

/// Conditional spin state after a herald with the given outcome.
SpinState apply_herald(const SpinState& spin, double phase, int m, double eps_leak);

struct HeraldOutcome {
  HeraldResult herald;
  SpinState spin;
};

/// Samples m from its Born distribution using the draw u and returns the
/// conditional spin state. With eps_leak = 0 and spin +x the result is
/// (|up> + m e^{i phase}|down>)/sqrt(2) and m is uniform.
HeraldOutcome reflect_and_herald(const SpinState& spin, double phase, double eps_leak, double u);
HeraldOutcome reflect_and_herald(const SpinState& spin, const TimeBinQubit& qubit,
                                 const NoiseParams& noise, double u);

SpinState conjugate_by(const SpinState& spin, const Matrix2c& unitary);

/// Microwave pi pulse: conjugation by the bit flip.
SpinState apply_pi_pulse(const SpinState& spin);

/// rho -> (1 - p) rho + p Z rho Z.
SpinState apply_dephasing(const SpinState& spin, double p);

/// Z-flip probability equivalent to k independent dephasings of probability p.
double compose_dephasing(double p, unsigned long k);

/// Projective X measurement followed by a classical flip with probability
/// 1 - f_readout, sampled with the single draw u.
int measure_x(const SpinState& spin, double f_readout, double u);

/// Fidelity of the heralded spin-photon state with the ideal Bell state
/// (|up e> + |down l>)/sqrt(2):
///
///   F = (1 + exp(-2 p_scatter lambda)) / (2 (1 + eps^2)),
///   lambda = n_m (1 - eta_detect),
///
/// where lambda is the mean number of undetected photons per memory
/// initialisation (Poisson). p_scatter = 1/2 reproduces (1 + e^-lambda)/2.
double spin_photon_fidelity(const NoiseParams& noise, double n_m,
                            double eta_detect = 0.423);

}  // namespace memqkd
