#include "ssmabc/kernels.hpp"

#include "ssmabc/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ssmabc {

void StableParams::validate() const {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::domain_error("StableParams: alpha must lie in (1, 2]");
  }
  if (!(std::abs(skew) <= 1.0)) {
    throw std::domain_error("StableParams: |skew| must not exceed 1");
  }
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(location)) {
    throw std::domain_error("StableParams: scale must be positive and finite");
  }
}

TruncNormalSpec TruncNormalSpec::from_lower(double lower) {
  if (std::isnan(lower) || (std::isinf(lower) && lower > 0.0)) {
    throw std::domain_error("TruncNormalSpec: lower bound must be finite or -infinity");
  }
  if (std::isinf(lower)) {
    return {lower, 0.0, 1.0};
  }
  const double lambda = inverse_mills_ratio(lower);
  return {lower, lambda, 1.0 - lambda * (lambda - lower)};
}

double sample_alpha_stable(const StableParams& params, RngStream& rng) {
  params.validate();
  const double alpha = params.alpha;
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double zeta = -params.skew * std::tan(std::numbers::pi * alpha / 2.0);
  const double xi = std::atan(-zeta) / alpha;
  const double prefactor = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));
  const double shifted = alpha * (v + xi);
  const double x = prefactor * std::sin(shifted) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v - shifted) / w, (1.0 - alpha) / alpha);
  return params.location + params.scale * x;
}

double sample_trunc_normal(const TruncNormalSpec& spec, RngStream& rng) {
  const double c = spec.lower;
  if (c <= 5.0) {
    // Phi(-x) is uniform on (0, Phi(-c)); working in the upper tail keeps precision.
    const double tail = normal_sf(c);
    return -normal_quantile(rng.uniform() * tail);
  }
  const double rate = 0.5 * (c + std::sqrt(c * c + 4.0));
  for (;;) {
    const double z = c + rng.exponential() / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) {
      return z;
    }
  }
}

double log_chisq_from_normal(double eta, const LogChiSqNoise& noise) {
  const double sq = std::max(eta * eta, 1e-300);
  return std::log(sq) - noise.omega;
}

double sample_log_chisq(const LogChiSqNoise& noise, RngStream& rng) {
  return log_chisq_from_normal(rng.normal(), noise);
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return gamma(rng) / rate;
}

double sample_poisson(double mean, RngStream& rng) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> poisson(mean);
  return static_cast<double>(poisson(rng));
}

CirTransitionConstants CirTransitionConstants::from(const SvSqParams& phi) {
  const double s2 = phi.phi3 * phi.phi3;
  const double decay = std::exp(-phi.phi2);
  return {2.0 * phi.phi2 / (s2 * -std::expm1(-phi.phi2)), decay, 2.0 * phi.phi1 / s2 - 1.0};
}

double sample_cir_transition(double x_prev, const CirTransitionConstants& k, RngStream& rng) {
  const double jumps = sample_poisson(k.c * x_prev * k.decay, rng);
  double x = sample_gamma(k.q + 1.0 + jumps, k.c, rng);
  // gamma draws can underflow to zero for tiny shapes; positivity is an invariant
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  return x;
}

double sample_cir_transition(double x_prev, const SvSqParams& phi, RngStream& rng) {
  if (!(x_prev > 0.0) || !std::isfinite(x_prev)) {
    throw std::domain_error("sample_cir_transition: x_prev must be positive");
  }
  phi.validate();
  return sample_cir_transition(x_prev, CirTransitionConstants::from(phi), rng);
}

double sample_cir_stationary(const SvSqParams& phi, RngStream& rng) {
  phi.validate();
  double x = sample_gamma(phi.stationary_shape(), phi.stationary_rate(), rng);
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  return x;
}

}  // namespace ssmabc
