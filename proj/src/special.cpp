#include "ssmabc/special.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <limits>

namespace ssmabc {

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double inverse_mills_ratio(double c) {
  if (std::isinf(c) && c < 0.0) return 0.0;
  if (c < 25.0) return normal_pdf(c) / normal_sf(c);
  // continued-fraction tail: lambda(c) ~ c + 1/c - 2/c^3 + 10/c^5
  const double inv2 = 1.0 / (c * c);
  return c + (1.0 / c) * (1.0 - 2.0 * inv2 + 10.0 * inv2 * inv2);
}

}  // namespace ssmabc
