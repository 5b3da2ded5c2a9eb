#pragma once

#include "ssmabc/aukf.hpp"
#include "ssmabc/dgp.hpp"

#include <array>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ssmabc {

/// Lower floor used for strictly positive auxiliary parameters.
inline constexpr double kAuxFloor = 1e-8;

/// beta of the discretised square-root model.
struct AuxParamsSq {
  double beta1 = 0.004;
  double beta2 = 0.9;
  double beta3 = 0.06;

  /// beta1, beta3 >= floor; floor <= beta2 <= 1 - floor; 2 beta1 >= beta3^2.
  bool feasible() const;
  std::array<double, 3> as_array() const { return {beta1, beta2, beta3}; }
  static AuxParamsSq from_span(std::span<const double> v);
};

/// GARCH(1,1) in absolute-value form with standardised Student-t errors.
struct AuxParamsGarchT {
  double beta1 = 0.05;
  double beta2 = 0.1;
  double beta3 = 0.8;
  double beta4 = 8.0;  ///< degrees of freedom

  bool feasible() const;
  std::array<double, 4> as_array() const { return {beta1, beta2, beta3, beta4}; }
  static AuxParamsGarchT from_span(std::span<const double> v);
};

/// AUKF log-likelihood of the square-root auxiliary model; -inf on failure or infeasible beta.
double aukf_loglik(std::span<const double> y, const AuxParamsSq& beta, const AukfOptions& options = {});

/**
 * @brief Student-t GARCH log-likelihood on conditional standard deviations.
 *
 * x_1 is the sample mean absolute value of r; x_t = b1 + b2 |r_{t-1}| + b3 x_{t-1};
 * each term is log f_t(r_t / x_t; b4) - log x_t with f_t the unit-variance t density.
 */
double garch_t_loglik(std::span<const double> r, const AuxParamsGarchT& beta);

/**
 * @brief Gaussian GARCH(1,1) log-likelihood.
 *
 * x_1 is the mean of r^2 (returns are treated as mean zero);
 * x_t = b1 + b2 r_{t-1}^2 + b3 x_{t-1}.
 */
double garch_loglik(std::span<const double> r, std::span<const double> beta);

struct Interval {
  double lo;
  double hi;

  double width() const { return hi - lo; }
};

/// A likelihood family usable by the fitting and scoring routines.
class AuxModel {
 public:
  virtual ~AuxModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool feasible(std::span<const double> beta) const = 0;
  /// Log-likelihood; -inf for infeasible beta or evaluation failure.
  virtual double loglik(std::span<const double> data, std::span<const double> beta) const = 0;
  /// Box containing the feasible set (may be narrower than the true constraints).
  virtual std::vector<Interval> bounds() const = 0;
  /// Data-driven starting point for the optimiser.
  virtual std::vector<double> default_start(std::span<const double> data) const = 0;

  /**
   * Range of coordinate k given the coordinates flagged in `known`, intersected
   * with `box`. Used to integrate over feasible slices.
   */
  virtual Interval conditional_range(std::span<const double> beta, std::span<const bool> known, std::size_t k,
                                     Interval box) const;

  /// Coordinates used by the optimiser, chosen so that the feasible set is close to a box.
  virtual std::vector<double> to_search(std::span<const double> beta) const { return {beta.begin(), beta.end()}; }
  virtual std::vector<double> from_search(std::span<const double> u) const { return {u.begin(), u.end()}; }
  virtual std::vector<Interval> search_bounds() const { return bounds(); }
  /// Further starting points tried by a multi-start fit.
  virtual std::vector<std::vector<double>> extra_starts(std::span<const double> data) const {
    (void)data;
    return {};
  }
};

/**
 * AUKF adapter for SimPath observations, which are centred (ln r^2 - omega).
 * With the AppendixC noise centre the filter is fed ln r^2, matching the
 * -1.27 measurement-noise mean; with the zero centre it is fed the centred series.
 */
class SqAukfAuxModel final : public AuxModel {
 public:
  explicit SqAukfAuxModel(AukfOptions options = {}) : options_(options) {}

  std::string name() const override { return "aukf_sq"; }
  std::size_t dim() const override { return 3; }
  bool feasible(std::span<const double> beta) const override;
  double loglik(std::span<const double> data, std::span<const double> beta) const override;
  std::vector<Interval> bounds() const override;
  std::vector<double> default_start(std::span<const double> data) const override;
  Interval conditional_range(std::span<const double> beta, std::span<const bool> known, std::size_t k,
                             Interval box) const override;
  /// (beta1 - beta3^2 / 2, beta2, beta3): the constraint 2 beta1 >= beta3^2 becomes a lower bound.
  std::vector<double> to_search(std::span<const double> beta) const override;
  std::vector<double> from_search(std::span<const double> u) const override;
  std::vector<Interval> search_bounds() const override;
  std::vector<std::vector<double>> extra_starts(std::span<const double> data) const override;

  const AukfOptions& options() const { return options_; }

 private:
  AukfOptions options_;
};

class GarchTAuxModel final : public AuxModel {
 public:
  std::string name() const override { return "garch_t"; }
  std::size_t dim() const override { return 4; }
  bool feasible(std::span<const double> beta) const override;
  double loglik(std::span<const double> data, std::span<const double> beta) const override;
  std::vector<Interval> bounds() const override;
  std::vector<double> default_start(std::span<const double> data) const override;
};

class GarchAuxModel final : public AuxModel {
 public:
  std::string name() const override { return "garch"; }
  std::size_t dim() const override { return 3; }
  bool feasible(std::span<const double> beta) const override;
  double loglik(std::span<const double> data, std::span<const double> beta) const override;
  std::vector<Interval> bounds() const override;
  std::vector<double> default_start(std::span<const double> data) const override;
};

/// AUKF for SvSq, GARCH-t for StableReturnSv, Gaussian GARCH for SvStableVol.
std::unique_ptr<AuxModel> make_aux_model(ModelTag tag, const AukfOptions& options = {});

/// The series an auxiliary model consumes: SimPath::observations.
inline std::span<const double> aux_data(const SimPath& path) { return path.observations; }

}  // namespace ssmabc
