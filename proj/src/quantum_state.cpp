#include "memqkd/quantum_state.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

using namespace std::complex_literals;

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPositivityTol = 1e-10;

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

void require_sign(int m) {
  if (m != 1 && m != -1) throw ConfigError("herald outcome must be +1 or -1");
}

Matrix2c pauli_x() {
  Matrix2c x;
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

Matrix2c pauli_z() {
  Matrix2c z;
  z << 1.0, 0.0, 0.0, -1.0;
  return z;
}

}  // namespace

SpinState::SpinState(const Matrix2c& rho) : rho_(rho) {
  if (!rho_.allFinite()) throw NonPhysicalState("density matrix has non-finite entries");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw NonPhysicalState("density matrix is not Hermitian");
  }
  if (std::abs(rho_.trace() - 1.0) > kTraceTol) {
    throw NonPhysicalState("density matrix trace differs from 1");
  }
  if (min_eigenvalue() < -kPositivityTol) {
    throw NonPhysicalState("density matrix is not positive semidefinite");
  }
}

SpinState SpinState::from_bloch(const BlochVector& r) {
  Matrix2c rho;
  rho << 0.5 * (1.0 + r.z), 0.5 * std::complex<double>(r.x, -r.y),
      0.5 * std::complex<double>(r.x, r.y), 0.5 * (1.0 - r.z);
  return SpinState(rho);
}

BlochVector SpinState::bloch() const noexcept {
  const std::complex<double> c = rho_(0, 1);
  return {2.0 * c.real(), -2.0 * c.imag(), (rho_(0, 0) - rho_(1, 1)).real()};
}

double SpinState::purity() const noexcept { return (rho_ * rho_).trace().real(); }

double SpinState::min_eigenvalue() const noexcept {
  const double a = rho_(0, 0).real();
  const double d = rho_(1, 1).real();
  const double half_gap = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(rho_(0, 1)));
  return 0.5 * (a + d) - half_gap;
}

std::string_view basis_name(Basis basis) {
  switch (basis) {
    case Basis::X: return "x";
    case Basis::Y: return "y";
    case Basis::A: return "a";
    case Basis::B: return "b";
  }
  return "?";
}

Basis parse_basis(std::string_view name) {
  if (name == "x" || name == "X") return Basis::X;
  if (name == "y" || name == "Y") return Basis::Y;
  if (name == "a" || name == "A") return Basis::A;
  if (name == "b" || name == "B") return Basis::B;
  throw ConfigError("unknown basis '" + std::string(name) + "'");
}

double TimeBinQubit::phase() const {
  constexpr double pi = std::numbers::pi;
  double base = 0.0;
  switch (basis) {
    case Basis::X: base = 0.0; break;
    case Basis::Y: base = pi / 2.0; break;
    case Basis::A: base = pi / 4.0; break;
    case Basis::B: base = 3.0 * pi / 4.0; break;
  }
  require_sign(sign);
  return sign > 0 ? base : base + pi;
}

TimeBinQubit TimeBinQubit::conjugate() const {
  require_sign(sign);
  switch (basis) {
    case Basis::X: return *this;
    case Basis::Y: return {Basis::Y, -sign};
    case Basis::A: return {Basis::B, -sign};
    case Basis::B: return {Basis::A, -sign};
  }
  return *this;
}

std::string TimeBinQubit::label() const {
  return std::string(sign > 0 ? "+" : "-") + std::string(basis_name(basis));
}

void NoiseParams::validate() const {
  if (!(eps_leak >= 0.0 && std::isfinite(eps_leak))) {
    throw ConfigError("noise.eps_leak must be finite and >= 0");
  }
  require_probability(p_mw, "noise.p_mw");
  require_probability(p_scatter_dephase, "noise.p_scatter_dephase");
  require_probability(f_readout, "noise.f_readout");
  require_probability(f_init, "noise.f_init");
}

NoiseParams NoiseParams::ideal() {
  return {.eps_leak = 0.0, .p_mw = 0.0, .p_scatter_dephase = 0.0, .f_readout = 1.0, .f_init = 1.0};
}

NoiseParams NoiseParams::from_reflectances(double r_up, double r_down) {
  if (!(r_up > 0.0 && r_down >= 0.0 && r_down <= r_up && r_up <= 1.0)) {
    throw ConfigError("reflectances must satisfy 0 <= r_down <= r_up <= 1, r_up > 0");
  }
  NoiseParams noise;
  noise.eps_leak = std::sqrt(r_down / r_up);
  return noise;
}

SpinState prepare_superposition(double f_init) {
  require_probability(f_init, "f_init");
  // Imperfect initialisation into |down>, then the pi/2 pulse U with
  // U|down> = +x and U|up> = -x.
  Matrix2c initial = Matrix2c::Zero();
  initial(0, 0) = 1.0 - f_init;
  initial(1, 1) = f_init;
  Matrix2c u;
  u << 1.0, 1.0, -1.0, 1.0;
  u /= std::sqrt(2.0);
  return SpinState(u * initial * u.adjoint());
}

Matrix2c herald_kraus(double phase, int m, double eps_leak) {
  require_sign(m);
  const std::complex<double> photon = static_cast<double>(m) * std::exp(1i * phase);
  Matrix2c k = Matrix2c::Zero();
  k(0, 0) = 1.0 + eps_leak * photon;
  k(1, 1) = photon + eps_leak;
  return k;
}

double herald_probability(const SpinState& spin, double phase, int m, double eps_leak) {
  const Matrix2c k = herald_kraus(phase, m, eps_leak);
  const double weight = (k * spin.rho() * k.adjoint()).trace().real();
  // Summed over m, each diagonal element picks up 2 (1 + eps^2).
  return weight / (2.0 * (1.0 + eps_leak * eps_leak));
}

SpinState apply_herald(const SpinState& spin, double phase, int m, double eps_leak) {
  const Matrix2c k = herald_kraus(phase, m, eps_leak);
  Matrix2c out = k * spin.rho() * k.adjoint();
  const double norm = out.trace().real();
  if (!(norm > 0.0)) throw NonPhysicalState("herald outcome has zero probability");
  out /= norm;
  out = 0.5 * (out + out.adjoint()).eval();
  return SpinState(out);
}

HeraldOutcome reflect_and_herald(const SpinState& spin, double phase, double eps_leak, double u) {
  if (!(eps_leak >= 0.0)) throw ConfigError("eps_leak must be >= 0");
  const double p_plus = herald_probability(spin, phase, +1, eps_leak);
  const int m = u < p_plus ? +1 : -1;
  return {HeraldResult{m}, apply_herald(spin, phase, m, eps_leak)};
}

HeraldOutcome reflect_and_herald(const SpinState& spin, const TimeBinQubit& qubit,
                                 const NoiseParams& noise, double u) {
  return reflect_and_herald(spin, qubit.phase(), noise.eps_leak, u);
}

SpinState conjugate_by(const SpinState& spin, const Matrix2c& unitary) {
  return SpinState(unitary * spin.rho() * unitary.adjoint());
}

SpinState apply_pi_pulse(const SpinState& spin) { return conjugate_by(spin, pauli_x()); }

SpinState apply_dephasing(const SpinState& spin, double p) {
  require_probability(p, "dephasing probability");
  const Matrix2c z = pauli_z();
  return SpinState((1.0 - p) * spin.rho() + p * z * spin.rho() * z);
}

double compose_dephasing(double p, unsigned long k) {
  require_probability(p, "dephasing probability");
  // Each dephasing scales the coherence by (1 - 2p).
  return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, static_cast<double>(k)));
}

int measure_x(const SpinState& spin, double f_readout, double u) {
  require_probability(f_readout, "f_readout");
  const double p_plus = 0.5 * (1.0 + spin.bloch().x);
  const double reported_plus = p_plus * f_readout + (1.0 - p_plus) * (1.0 - f_readout);
  return u < reported_plus ? +1 : -1;
}

double spin_photon_fidelity(const NoiseParams& noise, double n_m, double eta_detect) {
  noise.validate();
  if (!(n_m >= 0.0)) throw ConfigError("n_m must be >= 0");
  require_probability(eta_detect, "eta_detect");
  const double undetected = n_m * (1.0 - eta_detect);
  const double coherence = std::exp(-2.0 * noise.p_scatter_dephase * undetected);
  return 0.5 * (1.0 + coherence) / (1.0 + noise.eps_leak * noise.eps_leak);
}

}  // namespace memqkd
