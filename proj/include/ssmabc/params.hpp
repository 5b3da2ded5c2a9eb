#pragma once

#include <array>
#include <span>
#include <string>

namespace ssmabc {

/// Square-root (CIR) stochastic volatility parameters: drift level, mean reversion, vol-of-vol.
struct SvSqParams {
  double phi1 = 0.004;
  double phi2 = 0.1;
  double phi3 = 0.062;

  /// 2*phi1 >= phi3^2, 0 < phi2 < 1, phi1 > 0, phi3 > 0.
  bool feasible() const;
  /// Throws std::domain_error naming the violated restriction.
  void validate() const;

  double stationary_mean() const { return phi1 / phi2; }
  double stationary_variance() const { return phi3 * phi3 * phi1 / (2.0 * phi2 * phi2); }
  /// Shape and rate of the stationary gamma law.
  double stationary_shape() const { return 2.0 * phi1 / (phi3 * phi3); }
  double stationary_rate() const { return 2.0 * phi2 / (phi3 * phi3); }

  std::array<double, 3> as_array() const { return {phi1, phi2, phi3}; }
  static SvSqParams from_span(std::span<const double> v);
};

/// Log-volatility AR(1) parameters shared by the two alpha-stable models; phi4 is the tail index.
struct StableSvParams {
  double phi1 = 0.0;
  double phi2 = 0.9;
  double phi3 = 0.36;
  double phi4 = 1.8;

  /// 0 < phi2 < 1, phi3 >= 0 (zero switches volatility off), 1 < phi4 <= 2.
  bool feasible() const;
  void validate() const;

  std::array<double, 4> as_array() const { return {phi1, phi2, phi3, phi4}; }
  static StableSvParams from_span(std::span<const double> v);
};

}  // namespace ssmabc
