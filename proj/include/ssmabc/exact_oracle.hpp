#pragma once

#include "ssmabc/aux_models.hpp"
#include "ssmabc/params.hpp"
#include "ssmabc/rng.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ssmabc {

/// Raised when a filter loses all probability mass; carries the 1-based time index.
class FilterFailure : public std::runtime_error {
 public:
  FilterFailure(const std::string& what, std::size_t t) : std::runtime_error(what), t_(t) {}
  std::size_t time_index() const { return t_; }

 private:
  std::size_t t_;
};

/**
 * @brief ln(I_q(x)) - x for real order q >= 0 and x >= 0.
 *
 * Ascending series below x = 30. Above it the Hankel expansion is used when it
 * reaches full precision, otherwise the series summed outward from its largest
 * term, and for very large x the Debye uniform expansion.
 */
double log_bessel_i_scaled(double q, double x);

/// Log of the exact one-step CIR transition density p(x | x_prev).
double log_cir_transition_density(double x, double x_prev, const SvSqParams& phi);
/// exp of the above; 0 when the log underflows.
double cir_transition_density(double x, double x_prev, const SvSqParams& phi);

/// Density of the centred log-chi-squared noise w = ln(eta^2) - omega.
double log_chisq_log_density(double w);

/// Quadrature grid over the latent variance.
struct StateGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Nodes at equally spaced probabilities in [tail, 1 - tail] of the stationary gamma law.
  static StateGrid stationary(const SvSqParams& phi, std::size_t n = 100, double tail = 1e-6);
  /// Trapezoid weights for arbitrary strictly increasing positive nodes.
  static StateGrid from_nodes(std::vector<double> nodes);

  std::size_t size() const { return nodes.size(); }
  void validate() const;
};

/// Per-step output of the grid filter (filtered ordinates on the grid nodes).
struct GridFilterTrace {
  std::vector<std::vector<double>> filtered;
};

/**
 * @brief Exact-likelihood grid filter for the square-root model.
 *
 * Starts from the stationary gamma density, then alternates prediction
 * (transition kernel against the trapezoid-weighted filtered density) and
 * update by the log-chi-squared measurement density of y_t - ln x. Sums the
 * log normalising constants over t = 1..T. Throws FilterFailure on underflow.
 */
double grid_filter_loglik(std::span<const double> y, const SvSqParams& phi, const StateGrid& grid,
                          GridFilterTrace* trace = nullptr);

/// Bootstrap particle filter with multinomial resampling; throws FilterFailure if ESS < 2.
double particle_filter_loglik(std::span<const double> y, const SvSqParams& phi, std::size_t n_particles,
                              RngStream& rng);

/// Box prior for the square-root model: phi1 in (0, 0.025], phi2 in (0, 1), phi3 in (0, 0.089], 2 phi1 >= phi3^2.
struct SvSqPrior {
  Interval phi1{0.0, 0.025};
  Interval phi2{0.0, 1.0};
  Interval phi3{0.0, 0.089};

  bool contains(const SvSqParams& phi) const;
  Interval range(std::size_t coordinate) const;
};

struct PosteriorGrid {
  std::vector<double> param_nodes;
  std::vector<double> log_posterior;
  std::vector<double> density;
};

struct ExactPosteriorOptions {
  std::size_t param_nodes = 200;
  std::size_t state_nodes = 100;
  /// Second pass on the sub-interval carrying non-negligible mass.
  bool refine = true;
  std::size_t threads = 1;
};

/**
 * @brief Exact marginal posterior of one coordinate (0, 1 or 2 for phi1..phi3)
 * with the others fixed, flat prior on the open prior interval.
 *
 * Infeasible nodes get zero density. Normalised by the trapezoid rule.
 * Throws std::invalid_argument when no node is feasible.
 */
PosteriorGrid exact_posterior(std::span<const double> y, std::size_t coordinate, const SvSqParams& fixed,
                              const SvSqPrior& prior, const ExactPosteriorOptions& options = {});

/// Trapezoid integral of ordinates over ascending nodes.
double trapezoid(std::span<const double> x, std::span<const double> f);

}  // namespace ssmabc
