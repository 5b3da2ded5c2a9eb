#include "ssmabc/params.hpp"

#include <cmath>
#include <stdexcept>

namespace ssmabc {

bool SvSqParams::feasible() const {
  return std::isfinite(phi1) && std::isfinite(phi2) && std::isfinite(phi3) && phi1 > 0.0 && phi3 > 0.0 &&
         phi2 > 0.0 && phi2 < 1.0 && 2.0 * phi1 >= phi3 * phi3;
}

void SvSqParams::validate() const {
  if (!(phi1 > 0.0) || !(phi3 > 0.0)) {
    throw std::domain_error("SvSqParams: phi1 and phi3 must be positive");
  }
  if (!(phi2 > 0.0 && phi2 < 1.0)) {
    throw std::domain_error("SvSqParams: phi2 must lie in (0, 1)");
  }
  if (2.0 * phi1 < phi3 * phi3) {
    throw std::domain_error("SvSqParams: 2*phi1 >= phi3^2 is required for positive volatility");
  }
}

SvSqParams SvSqParams::from_span(std::span<const double> v) {
  if (v.size() != 3) {
    throw std::invalid_argument("SvSqParams: expected 3 components");
  }
  return {v[0], v[1], v[2]};
}

bool StableSvParams::feasible() const {
  return std::isfinite(phi1) && phi2 > 0.0 && phi2 < 1.0 && phi3 >= 0.0 && std::isfinite(phi3) && phi4 > 1.0 &&
         phi4 <= 2.0;
}

void StableSvParams::validate() const {
  if (!std::isfinite(phi1)) {
    throw std::domain_error("StableSvParams: phi1 must be finite");
  }
  if (!(phi2 > 0.0 && phi2 < 1.0)) {
    throw std::domain_error("StableSvParams: phi2 must lie in (0, 1)");
  }
  if (!(phi3 >= 0.0) || !std::isfinite(phi3)) {
    throw std::domain_error("StableSvParams: phi3 must be non-negative");
  }
  if (!(phi4 > 1.0 && phi4 <= 2.0)) {
    throw std::domain_error("StableSvParams: tail index phi4 must lie in (1, 2]");
  }
}

StableSvParams StableSvParams::from_span(std::span<const double> v) {
  if (v.size() != 4) {
    throw std::invalid_argument("StableSvParams: expected 4 components");
  }
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace ssmabc
