#pragma once

#include "ssmabc/kernels.hpp"
#include "ssmabc/params.hpp"
#include "ssmabc/rng.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ssmabc {

enum class ModelTag { SvSq, StableReturnSv, SvStableVol };

std::string_view to_string(ModelTag tag);
/// Accepts "sv_sq", "stable_return_sv", "sv_stable_vol"; throws std::invalid_argument otherwise.
ModelTag model_tag_from_string(std::string_view name);

/**
 * @brief One simulated sample path.
 *
 * `returns` holds r_t and `states` the latent variance x_t. `observations` is
 * the series the auxiliary models and filters consume: y_t = ln(r_t^2) - omega
 * = ln x_t + w_t for the square-root model (w_t mean-zero log-chi-squared), and
 * y_t = r_t for the two alpha-stable models.
 */
struct SimPath {
  std::vector<double> returns;
  std::vector<double> states;
  std::vector<double> observations;
  ModelTag model_tag = ModelTag::SvSq;

  std::size_t size() const { return returns.size(); }
};

/// s1..s5 of the AR(1) sufficient statistics.
struct SummaryVector {
  std::array<double, 5> s{};

  double operator[](std::size_t i) const { return s[i]; }
  double& operator[](std::size_t i) { return s[i]; }
};

enum class SummaryTransform { LogSquared, Raw };

/// x_0 from the stationary gamma law, exact CIR transitions, y_t = ln x_t + w_t.
SimPath simulate_sv_sq(const SvSqParams& phi, std::size_t T, RngStream& rng);

/// ln x_t Gaussian AR(1); r_t = x_t^{1/phi4} w_t with w_t ~ S(phi4, -1, 0, 1).
SimPath simulate_stable_return_sv(const StableSvParams& phi, std::size_t T, RngStream& rng);

/// r_t = x_t^{1/2} w_t, w_t ~ N(0,1); ln x_t AR(1) driven by S(phi4, -1, 0, 1) innovations.
SimPath simulate_sv_stable_vol(const StableSvParams& phi, std::size_t T, RngStream& rng);

/// Dispatch on tag; `phi` must have 3 (SvSq) or 4 components.
SimPath simulate(ModelTag tag, std::span<const double> phi, std::size_t T, RngStream& rng);

/// Rebuild a path (without states) from observed returns, deriving the observation series.
SimPath path_from_returns(ModelTag tag, std::vector<double> returns);

/// Number of discarded start-up steps for the log-volatility models.
inline constexpr std::size_t kLogVolBurnIn = 100;
/// Floor applied to r^2 before taking logarithms.
inline constexpr double kSquaredReturnFloor = 1e-300;

/**
 * @brief AR(1) summary statistics of a return series.
 *
 * With y_t = ln(r_t^2) (LogSquared) or y_t = r_t (Raw):
 * s1 = sum_{t=2}^{T-1} y_t, s2 = sum_{t=2}^{T-1} y_t^2, s3 = sum_{t=2}^{T} y_t y_{t-1},
 * s4 = y_1 + y_T, s5 = y_1^2 + y_T^2. Requires at least 3 values.
 */
SummaryVector ar1_summary_stats(std::span<const double> returns, SummaryTransform transform);

}  // namespace ssmabc
