#pragma once

#include "ssmabc/aux_models.hpp"
#include "ssmabc/optimize.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ssmabc {

/// Result of maximising an auxiliary likelihood.
struct AuxFit {
  std::vector<double> beta_hat;
  double loglik = 0.0;
  /// Sigma: inverse of the negative Hessian of the total log-likelihood at beta_hat.
  Eigen::MatrixXd weight;
  bool converged = false;
  std::size_t evaluations = 0;
  /// True when a ridge had to be added before inverting the Hessian.
  bool ridge_repaired = false;
};

struct FitOptions {
  NelderMeadOptions simplex{};
  /// Newton refinement on the numeric score after the simplex search.
  bool polish = true;
  int polish_iterations = 25;
  double polish_tolerance = 1e-7;
  bool compute_weight = true;
  /// Also start from AuxModel::extra_starts and keep the best optimum.
  bool multi_start = true;
};

struct ScoreResult {
  std::vector<double> score;
  /// Set when some coordinate had to use a one-sided difference.
  bool one_sided = false;
};

/// Finite-difference step for coordinate value b: max(1e-5, 1e-5 |b|).
inline double score_step(double b) { return std::max(1e-5, 1e-5 * std::abs(b)); }

/**
 * @brief Gradient of T^{-1} loglik at beta by central differences.
 *
 * A coordinate whose symmetric stencil leaves the feasible set falls back to a
 * one-sided difference and sets ScoreResult::one_sided.
 */
ScoreResult numeric_score(const AuxModel& model, std::span<const double> data, std::span<const double> beta);

/// Single coordinate of numeric_score; cheaper when only one component is needed.
double numeric_score_component(const AuxModel& model, std::span<const double> data, std::span<const double> beta,
                               std::size_t j, bool* one_sided = nullptr);

/// Hessian of the total log-likelihood: Jacobian of the numeric gradient with 1e-4 relative steps, symmetrised.
Eigen::MatrixXd numeric_hessian(const AuxModel& model, std::span<const double> data, std::span<const double> beta);

/**
 * @brief (-H)^{-1}, adding a ridge 1e-8 trace/d (growing tenfold) to -H until
 * the Cholesky factorisation succeeds.
 */
Eigen::MatrixXd covariance_from_hessian(const Eigen::MatrixXd& hessian, bool* repaired = nullptr);

/**
 * @brief Maximum-likelihood fit: bounded simplex search in the model's search
 * coordinates, Newton polish on the coordinates not held at a bound, Hessian weight.
 */
AuxFit fit_mle(const AuxModel& model, std::span<const double> data, std::span<const double> start,
               const FitOptions& options = {});

/// Maximise over coordinate j alone, the others held at `beta`. Returns the full vector.
OptimizeResult fit_conditional(const AuxModel& model, std::span<const double> data, std::span<const double> beta,
                               std::size_t j);

}  // namespace ssmabc
