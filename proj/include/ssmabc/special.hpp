#pragma once

#include <cmath>
#include <numbers>

namespace ssmabc {

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse of Phi on (0, 1).
double normal_quantile(double p);

/// phi(c) / (1 - Phi(c)), stable for large c.
double inverse_mills_ratio(double c);

}  // namespace ssmabc
