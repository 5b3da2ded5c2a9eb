#pragma once

#include "ssmabc/aux_models.hpp"
#include "ssmabc/optimize.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ssmabc {

/// Gauss-Legendre rule on [-1, 1]; n must be one of 7, 10, 15, 20, 25, 30.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static GaussLegendreRule make(std::size_t n);
};

/// Box prior over the auxiliary parameters and the quadrature resolution.
struct IntegrationSpec {
  std::vector<Interval> box;
  std::size_t nodes = 15;
};

/**
 * @brief log of the likelihood integrated over the other coordinates.
 *
 * The nuisance coordinates carry a uniform prior on the feasible slice of the
 * box at beta_j (bounds from AuxModel::conditional_range, outer coordinates
 * first). Tensor-product Gauss-Legendre quadrature in log space; the slice area
 * is computed with the same rule. Degenerate (zero-width) coordinates act as
 * point masses. Returns -inf if the slice is empty or every node fails.
 */
double integrated_loglik(const AuxModel& model, std::span<const double> data, double beta_j, std::size_t j,
                         const IntegrationSpec& spec);

/// Maximiser of integrated_loglik over box[j].
OptimizeResult fit_integrated(const AuxModel& model, std::span<const double> data, std::size_t j,
                              const IntegrationSpec& spec);

/// Central difference of T^{-1} integrated_loglik at beta_j_hat with step max(1e-5, 1e-5 |beta_j_hat|).
double integrated_score(const AuxModel& model, std::span<const double> data, double beta_j_hat, std::size_t j,
                        const IntegrationSpec& spec, bool* one_sided = nullptr);

}  // namespace ssmabc
