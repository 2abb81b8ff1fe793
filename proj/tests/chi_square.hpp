#pragma once

#include <boost/math/distributions/chi_squared.hpp>

// Upper 1% point of the chi-square distribution.
inline double chi_square_critical_001(int dof) {
  const boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, 0.01));
}
