#pragma once

#include "ssmabc/abc.hpp"
#include "ssmabc/aukf.hpp"
#include "ssmabc/dgp.hpp"
#include "ssmabc/exact_oracle.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmabc {

/// Bad or inconsistent configuration (CLI exit status 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run of an experiment failed entirely (CLI exit status 2).
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(const std::string& what, std::size_t run) : std::runtime_error(what), run_(run) {}
  std::size_t run_index() const { return run_; }

 private:
  std::size_t run_;
};

/**
 * @brief Settings of a multi-run ABC experiment.
 *
 * Read from flat `key = value` text with dotted keys; `#` starts a comment.
 * Lists are comma-separated. Recognised keys:
 *
 *     experiment.name, experiment.n_runs, experiment.master_seed, experiment.metrics (rmse, mass)
 *     model.tag, model.true_phi, model.unknown (phi1..phi4)
 *     data.T                      one or more sample sizes
 *     abc.n_draws                 one value, or one per sample size
 *     abc.quantile, abc.n_retained (optional; overrides the quantile)
 *     abc.criteria                score, mle, ss, ss_raw, fp, fp_raw, int_score
 *     aukf.noise_center           appendix_c | zero
 *     oracle.state_nodes, oracle.param_nodes, kde.nodes
 *     interval.phiK = lo, hi      in reported units (1 - phi2 for the square-root model)
 *     profile                     desk | paper (paper: five times the draws and n_retained, 50 runs)
 */
struct ExperimentConfig {
  std::string name = "experiment";
  ModelTag model = ModelTag::SvSq;
  std::vector<double> true_phi;
  std::vector<std::size_t> unknown;
  std::vector<std::size_t> sample_sizes{500};
  std::vector<std::size_t> n_draws{10000};
  double quantile = 0.01;
  std::optional<std::size_t> n_retained;
  std::vector<CriterionKind> criteria{CriterionKind::Score};
  std::size_t n_runs = 10;
  std::uint64_t master_seed = 1;
  AukfOptions aukf{};
  std::size_t state_nodes = 100;
  std::size_t param_nodes = 200;
  std::size_t kde_nodes = 200;
  bool metric_rmse = false;
  bool metric_mass = true;
  /// Keyed by coordinate index.
  std::map<std::size_t, Interval> intervals;
  std::string profile = "desk";

  std::size_t draws_for(std::size_t T) const;
  std::size_t retained_for(std::size_t T) const;
  /// Throws ConfigError; requires at least 50 retained draws per run.
  void validate() const;

  static ExperimentConfig parse(const std::string& text, const std::string& source = "<config>");
  static ExperimentConfig load(const std::string& path);
};

/// Default true parameters used when the config does not give them.
std::vector<double> default_true_phi(ModelTag model);

/// "1-phi2" for the square-root mean reversion, "phiK" otherwise.
std::string reported_label(ModelTag model, std::size_t coordinate);
/// Value in reported units.
double to_reported(ModelTag model, std::size_t coordinate, double value);

/// A density on an ascending grid.
struct GridDensity {
  std::vector<double> grid;
  std::vector<double> ordinates;
};

GridDensity as_density(const KdeEstimate& est);
/// Exact posterior in reported units.
GridDensity as_density(const PosteriorGrid& post, ModelTag model, std::size_t coordinate);

/// Linear interpolation of `d` at x, zero outside its grid.
double interpolate(const GridDensity& d, double x);

/// sqrt(G^{-1} sum_g (p_hat_g - p_g)^2) with the exact density interpolated onto the estimate's grid.
double rmse(const KdeEstimate& est, const GridDensity& exact);

/**
 * @brief Rectangular-rule mass of [lo, hi].
 *
 * Each node carries its ordinate over the cell bounded by the midpoints to its
 * neighbours (the end cells stop at the end nodes). The result is clipped to
 * [0, 1]. `outside` is set when [lo, hi] extends past the grid.
 */
double interval_mass(const GridDensity& d, double lo, double hi, bool* outside = nullptr);

/// Quantile of a grid density by its trapezoid CDF.
double density_quantile(const GridDensity& d, double p);

/// n equally spaced nodes on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct ReportRow {
  std::string criterion;
  std::string param;
  std::size_t T = 0;
  std::string metric;
  double value = 0.0;
  std::size_t n_runs = 0;
  std::vector<double> per_run;
};

struct AccuracyReport {
  std::vector<ReportRow> rows;
  std::size_t n_runs = 0;
  double wall_seconds = 0.0;
  /// Extremes of the trapezoid integral over every emitted KDE.
  double kde_mass_min = 1.0;
  double kde_mass_max = 1.0;

  const ReportRow* find(std::string_view criterion, std::string_view param, std::size_t T,
                        std::string_view metric) const;
};

/// Average that does not depend on the order of the values.
double order_free_mean(std::vector<double> values);

/**
 * @brief Run the experiment. Run r uses master_seed + r for its observed data
 * and its draw pool; all criteria of a run share one pool per sample size.
 */
AccuracyReport run_experiment(const ExperimentConfig& config, std::size_t threads, std::ostream* log = nullptr);

/// `criterion,param,T,metric,value,n_runs`
void write_report_csv(std::ostream& os, const AccuracyReport& report);

/// Stream id of the observed series for sample size T.
inline std::uint64_t observed_stream(std::size_t T) { return (std::uint64_t{1} << 63) + T; }

}  // namespace ssmabc
