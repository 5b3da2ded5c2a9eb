#pragma once

#include "ssmabc/aux_models.hpp"
#include "ssmabc/dgp.hpp"
#include "ssmabc/fit.hpp"
#include "ssmabc/integrated.hpp"
#include "ssmabc/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmabc {

/// Uniform prior over a box in the unknown coordinates; the others stay at `truth`.
struct BoxPrior {
  ModelTag model = ModelTag::SvSq;
  std::vector<double> truth;
  std::vector<std::size_t> unknown;
  /// One range per unknown coordinate; draws lie strictly inside or on a closed upper end.
  std::vector<Interval> ranges;

  /// Model feasibility plus the prior restrictions.
  bool contains(std::span<const double> phi) const;
  /// Rejection draw from the feasible part of the box.
  std::vector<double> draw(RngStream& rng) const;

  /// Experiment priors: SvSq uses phi1 <= 0.025, phi3 <= 0.089, phi2 in (0,1);
  /// the stable models use phi2 in (0,1), phi4 in (1,2) and phi3 in (0, phi3_max].
  static BoxPrior standard(ModelTag model, std::vector<double> truth, std::vector<std::size_t> unknown);
};

struct AbcDraw {
  std::vector<double> phi;
  std::vector<double> summary;
  double distance = 0.0;
  std::uint64_t stream_id = 0;
};

struct RetainedSet {
  std::vector<AbcDraw> draws;
  double epsilon = 0.0;
  std::size_t n_total = 0;
  double quantile = 0.0;
  std::uint64_t master_seed = 0;
};

class AbcRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric positive-definite weight; construction fails otherwise.
class WeightMatrix {
 public:
  explicit WeightMatrix(Eigen::MatrixXd m);
  static WeightMatrix identity(std::size_t d);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  /// sqrt(v' W v)
  double norm(std::span<const double> v) const;

 private:
  Eigen::MatrixXd m_;
};

/// sqrt((b_y - b_z)' Omega (b_y - b_z))
double dist_mle(std::span<const double> beta_y, std::span<const double> beta_z, const WeightMatrix& omega);
/// sqrt(S' Sigma S); |S| sqrt(Sigma) for a scalar score.
double dist_score(std::span<const double> score_z, const WeightMatrix& sigma);
/**
 * Variance-weighted Euclidean distance between summary vectors. Coordinates
 * with zero variance are skipped and counted in `dropped`.
 */
double dist_euclid_weighted(const SummaryVector& s_z, const SummaryVector& s_obs, const std::array<double, 5>& var,
                            std::size_t* dropped = nullptr);

struct FpResult {
  Eigen::VectorXd gamma;  ///< intercept then one slope per summary
  std::vector<double> distances;
  bool ridge_used = false;
};

/// Regress phi_j on (1, s) over the pool and return |s_i' gamma - s_obs' gamma| per draw.
FpResult fp_pipeline(std::span<const double> phi_j, const std::vector<std::vector<double>>& summaries,
                     std::span<const double> s_obs);

struct KdeEstimate {
  std::vector<double> grid;
  std::vector<double> ordinates;
  double bandwidth = 0.0;
  bool degenerate = false;
};

/// Silverman bandwidth 0.9 min(sd, IQR/1.34) n^{-1/5}, floored at 1e-8.
double silverman_bandwidth(std::span<const double> values);
/// Gaussian kernel density on `grid`; needs at least 50 values.
KdeEstimate kde(std::span<const double> values, std::span<const double> grid);

/// Jaccard overlap of retained stream ids; throws on mismatched seed, pool size or quantile.
double score_mle_agreement(const RetainedSet& run_a, const RetainedSet& run_b);

/// Keep the k smallest distances (ties by stream id); k = ceil(quantile N) unless n_retained is given.
RetainedSet retain(const std::vector<std::vector<double>>& phis, const std::vector<std::vector<double>>& summaries,
                   std::span<const double> distances, double quantile, std::uint64_t master_seed,
                   std::optional<std::size_t> n_retained = std::nullopt);

/// Number kept for a quantile: ceil(quantile N) with a small tolerance for rounding.
std::size_t retained_count(double quantile, std::size_t n_total);

/**
 * @brief An ABC matching criterion.
 *
 * summarize() runs per draw and must be thread-safe. distances() turns the pooled
 * summaries into one distance vector per channel: a single channel for joint
 * criteria, one per unknown coordinate for the per-parameter ones.
 */
class Criterion {
 public:
  virtual ~Criterion() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> summarize(const SimPath& path) const = 0;
  virtual std::size_t channels() const { return 1; }
  /// Channel used for the k-th unknown coordinate.
  virtual std::size_t channel_for(std::size_t k) const {
    (void)k;
    return 0;
  }
  virtual std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& summaries,
                                                     const std::vector<std::vector<double>>& phis) const = 0;
};

/// What the criteria learn from the observed data.
struct ObservedContext {
  ModelTag model = ModelTag::SvSq;
  SimPath data;
  std::vector<std::size_t> unknown;
  AukfOptions aukf{};
  std::shared_ptr<const AuxModel> aux;
  AuxFit fit;  ///< beta_hat(y) and Sigma
  /// Box prior over beta for the integrated-likelihood criterion.
  IntegrationSpec integration{};

  /// Fit the auxiliary model to the observed data.
  static std::shared_ptr<const ObservedContext> build(ModelTag model, SimPath data, std::vector<std::size_t> unknown,
                                                      const AukfOptions& aukf = {});
};

enum class CriterionKind { Score, Mle, Ss, SsRaw, Fp, FpRaw, IntScore };
CriterionKind criterion_kind_from_string(std::string_view name);
std::string_view to_string(CriterionKind kind);

std::unique_ptr<Criterion> make_criterion(CriterionKind kind, std::shared_ptr<const ObservedContext> observed);

/// Summaries of every criterion for every draw, and the drawn parameters.
struct AbcPool {
  std::vector<std::vector<double>> phis;
  /// summaries[c][i] for criterion c and draw i
  std::vector<std::vector<std::vector<double>>> summaries;
  std::uint64_t master_seed = 0;
};

/**
 * @brief Simulate N draws once and summarise each with every criterion.
 *
 * Draw i uses RngStream(master_seed, i) for both the prior draw and the
 * simulation, so results do not depend on the thread count. Paths are
 * discarded after summarising. A summary that throws becomes NaN.
 */
AbcPool simulate_pool(const BoxPrior& prior, std::size_t T, std::size_t N, std::uint64_t master_seed,
                      const std::vector<const Criterion*>& criteria, std::size_t threads);

/// Retained set of criterion c (channel `channel`) from a pool.
RetainedSet select(const AbcPool& pool, std::size_t c, const Criterion& criterion, std::size_t channel,
                   double quantile, std::optional<std::size_t> n_retained = std::nullopt);

/// Single-criterion convenience: pool plus selection of channel 0. Requires N >= 100 and 0 < quantile <= 0.1.
RetainedSet run_abc(const BoxPrior& prior, std::size_t T, const Criterion& criterion, std::size_t N, double quantile,
                    std::uint64_t master_seed, std::size_t threads = 1);

/// `stream_id,phi1,...,distance`, one row per retained draw.
void write_retained_csv(std::ostream& os, const RetainedSet& set);
/// `grid,density`
void write_kde_csv(std::ostream& os, const KdeEstimate& est);

}  // namespace ssmabc
