#pragma once

#include "ssmabc/params.hpp"
#include "ssmabc/rng.hpp"

#include <numbers>

namespace ssmabc {

/// E[ln eta^2] for standard-normal eta: -(Euler-Mascheroni + ln 2).
inline constexpr double kLogChiSqMean = -1.2703628454614782;
/// var[ln eta^2] for standard-normal eta.
inline constexpr double kLogChiSqVariance = std::numbers::pi * std::numbers::pi / 2.0;

/**
 * @brief Parameters of an alpha-stable law S(alpha, skew, location, scale).
 *
 * Uses the Chambers-Mallows-Stuck "1-parameterization": the characteristic
 * function of the standardized variable is
 *   exp(-|t|^alpha (1 - i skew sign(t) tan(pi alpha / 2))),
 * and location/scale are applied after the standard draw. At alpha = 2 the
 * law is Normal(location, 2 scale^2) whatever the skew.
 */
struct StableParams {
  double alpha = 2.0;
  double skew = 0.0;
  double location = 0.0;
  double scale = 1.0;

  /// Throws std::domain_error unless 1 < alpha <= 2, |skew| <= 1 and scale > 0.
  void validate() const;
};

/// Centered log-chi-squared measurement noise w = ln(eta^2) - omega.
struct LogChiSqNoise {
  double omega = kLogChiSqMean;
  double variance = kLogChiSqVariance;
};

/// Standard normal conditioned on exceeding `lower` (which may be -infinity).
struct TruncNormalSpec {
  double lower;
  double mean_lambda;  ///< inverse Mills ratio phi(c) / (1 - Phi(c))
  double variance;     ///< 1 - lambda (lambda - c)

  static TruncNormalSpec from_lower(double lower);
};

double sample_alpha_stable(const StableParams& params, RngStream& rng);

/// Inverse-CDF for lower <= 5, exponential rejection above.
double sample_trunc_normal(const TruncNormalSpec& spec, RngStream& rng);

double sample_log_chisq(const LogChiSqNoise& noise, RngStream& rng);
/// The same transform applied to a given standard-normal draw; eta^2 is clamped at 1e-300.
double log_chisq_from_normal(double eta, const LogChiSqNoise& noise = {});

/// Gamma(shape, rate) draw.
double sample_gamma(double shape, double rate, RngStream& rng);
double sample_poisson(double mean, RngStream& rng);

/// Constants of the exact CIR transition over one unit of time.
struct CirTransitionConstants {
  double c;      ///< 2 phi2 / (phi3^2 (1 - e^{-phi2}))
  double decay;  ///< e^{-phi2}
  double q;      ///< 2 phi1 / phi3^2 - 1

  static CirTransitionConstants from(const SvSqParams& phi);
};

/**
 * @brief Exact draw of x_t | x_{t-1} for the square-root diffusion.
 *
 * Poisson-gamma composition of the non-central chi-squared law:
 * J ~ Poisson(c x_prev e^{-phi2}), x ~ Gamma(q + 1 + J, rate c).
 * Throws std::domain_error on non-positive x_prev or infeasible phi.
 */
double sample_cir_transition(double x_prev, const SvSqParams& phi, RngStream& rng);
/// Unchecked variant for inner loops; constants must come from a validated phi.
double sample_cir_transition(double x_prev, const CirTransitionConstants& k, RngStream& rng);

/// Draw from the stationary Gamma(2 phi1 / phi3^2, rate 2 phi2 / phi3^2) law.
double sample_cir_stationary(const SvSqParams& phi, RngStream& rng);

}  // namespace ssmabc
