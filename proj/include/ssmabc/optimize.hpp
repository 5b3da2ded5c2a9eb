#pragma once

#include "ssmabc/aux_models.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ssmabc {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  int restarts = 1;
  /// Relative size of the initial simplex edges.
  double initial_step = 0.05;
  double f_tol = 1e-12;
  double x_tol = 1e-9;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

/**
 * @brief Maximise f over a box with a Nelder-Mead simplex.
 *
 * Trial points are projected onto the box; f may return -inf (or NaN) to mark
 * infeasibility. After convergence the search restarts from the best point
 * `restarts` times within the same evaluation budget.
 */
OptimizeResult nelder_mead_maximize(const Objective& f, std::span<const double> start, std::span<const Interval> box,
                                    const NelderMeadOptions& options = {});

/// Maximise a scalar function on [lo, hi] with Brent's method.
OptimizeResult brent_maximize(const std::function<double(double)>& f, double lo, double hi, int bits = 40,
                              std::size_t max_evaluations = 200);

}  // namespace ssmabc
