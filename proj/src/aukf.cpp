#include "ssmabc/aukf.hpp"

#include "ssmabc/kernels.hpp"

#include <stdexcept>
#include <string>

namespace ssmabc {

NoiseCenter noise_center_from_string(std::string_view name) {
  if (name == "appendix_c") return NoiseCenter::AppendixC;
  if (name == "zero") return NoiseCenter::Zero;
  throw std::invalid_argument("aukf.noise_center must be 'appendix_c' or 'zero', got '" + std::string(name) + "'");
}

std::string_view to_string(NoiseCenter center) {
  return center == NoiseCenter::AppendixC ? "appendix_c" : "zero";
}

SigmaPointMatrix SigmaPointMatrix::build(const std::array<double, 3>& mean, const std::array<double, 3>& variance,
                                         const AukfOptions& options) {
  SigmaPointMatrix out;
  const double s = options.spread;
  const double w = 1.0 / (2.0 * s * s);
  out.weights.fill(w);
  out.weights[0] = 1.0 - 6.0 * w;
  for (std::size_t r = 0; r < 3; ++r) out.points[r].fill(mean[r]);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto k = static_cast<std::size_t>(options.outer_order[i]);
    const std::size_t row = k % 3;
    const double sign = k < 3 ? 1.0 : -1.0;
    out.points[row][i + 1] = mean[row] + sign * s * std::sqrt(variance[row]);
  }
  return out;
}

double SigmaPointMatrix::row_mean(std::size_t row) const {
  double m = 0.0;
  for (std::size_t i = 0; i < 7; ++i) m += weights[i] * points[row][i];
  return m;
}

SqAukfModel SqAukfModel::from(double b1, double b2, double b3, NoiseCenter center) {
  const auto noise = TruncNormalSpec::from_lower(-b1 / b3);
  SqAukfModel m{};
  m.b1 = b1;
  m.b2 = b2;
  m.b3 = b3;
  m.lower = noise.lower;
  m.state_noise_mean = noise.mean_lambda;
  m.state_noise_var = noise.variance;
  m.obs_noise_mean = center == NoiseCenter::AppendixC ? kAppendixCNoiseCenter : 0.0;
  m.obs_noise_var = kLogChiSqVariance;
  m.init_mean = b1 / (1.0 - b2);
  m.init_var = b3 * b3 * m.init_mean / (1.0 - b2 * b2);
  return m;
}

}  // namespace ssmabc
