#include "memqkd/cavity.hpp"

#include <cmath>
#include <string>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

void CavityParams::validate() const {
  if (!(g >= 0.0)) throw ConfigError("cavity.g must be >= 0");
  if (!(kappa > 0.0)) throw ConfigError("cavity.kappa must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("cavity.gamma must be > 0");
  if (!(kappa_wg >= 0.0 && kappa_wg <= kappa)) {
    throw ConfigError("cavity.kappa_wg must lie in [0, kappa]");
  }
  if (!std::isfinite(delta_c)) throw ConfigError("cavity.delta_c must be finite");
}

void SpinReflectances::validate() const {
  require_probability(r_up, "r_up");
  require_probability(r_down, "r_down");
  if (r_down > r_up) throw ConfigError("r_down must not exceed r_up");
}

void EfficiencyBudget::validate() const {
  require_probability(eta_sp, "eta_sp");
  require_probability(eta_c, "eta_c");
  require_probability(eta_f, "eta_f");
  require_probability(eta_qe, "eta_qe");
}

std::complex<double> reflection_coefficient(const CavityParams& params) {
  params.validate();
  using namespace std::complex_literals;
  const std::complex<double> probe = 1i * params.delta_c;
  const std::complex<double> atom = params.g * params.g / (probe + params.gamma / 2.0);
  const std::complex<double> denominator = probe + atom + params.kappa / 2.0;
  return (denominator - params.kappa_wg) / denominator;
}

double cooperativity(const CavityParams& params) {
  if (!(params.kappa > 0.0)) throw ConfigError("cooperativity requires kappa > 0");
  if (!(params.gamma > 0.0)) throw ConfigError("cooperativity requires gamma > 0");
  return 4.0 * params.g * params.g / (params.kappa * params.gamma);
}

double average_reflectivity(const SpinReflectances& refl) {
  refl.validate();
  return 0.5 * (refl.r_up + refl.r_down);
}

double total_heralding_efficiency(const EfficiencyBudget& budget) {
  budget.validate();
  return budget.eta_sp * budget.eta_c * budget.eta_f * budget.eta_qe;
}

}  // namespace memqkd
