#include "ssmabc/abc.hpp"

#include "ssmabc/exact_oracle.hpp"
#include "ssmabc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>

namespace ssmabc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool usable(const std::vector<double>& v) {
  return !v.empty() && std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

SummaryVector to_summary(const std::vector<double>& v) {
  SummaryVector s;
  std::copy_n(v.begin(), 5, s.s.begin());
  return s;
}

// Sample quantile with linear interpolation between order statistics.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

}  // namespace

bool BoxPrior::contains(std::span<const double> phi) const {
  if (phi.size() != truth.size()) return false;
  for (std::size_t k = 0; k < unknown.size(); ++k) {
    const double v = phi[unknown[k]];
    if (!(v > ranges[k].lo && v <= ranges[k].hi)) return false;
  }
  switch (model) {
    case ModelTag::SvSq:
      return SvSqPrior{}.contains(SvSqParams::from_span(phi)) && SvSqParams::from_span(phi).feasible();
    case ModelTag::StableReturnSv:
    case ModelTag::SvStableVol:
      return StableSvParams::from_span(phi).feasible();
  }
  return false;
}

std::vector<double> BoxPrior::draw(RngStream& rng) const {
  if (unknown.size() != ranges.size()) throw std::invalid_argument("BoxPrior: one range per unknown coordinate");
  std::vector<double> phi = truth;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (std::size_t k = 0; k < unknown.size(); ++k) {
      phi[unknown[k]] = ranges[k].lo + ranges[k].width() * rng.uniform();
    }
    if (contains(phi)) return phi;
  }
  throw AbcRunError("BoxPrior: no feasible draw after 100000 attempts");
}

BoxPrior BoxPrior::standard(ModelTag model, std::vector<double> truth, std::vector<std::size_t> unknown) {
  const std::size_t dim = model == ModelTag::SvSq ? 3 : 4;
  if (truth.size() != dim) throw std::invalid_argument("BoxPrior: wrong number of true parameter values");
  if (unknown.empty()) throw std::invalid_argument("BoxPrior: at least one unknown coordinate is required");
  BoxPrior p;
  p.model = model;
  p.truth = std::move(truth);
  p.unknown = std::move(unknown);
  for (std::size_t j : p.unknown) {
    if (j >= dim) throw std::invalid_argument("BoxPrior: unknown coordinate out of range");
    if (model == ModelTag::SvSq) {
      p.ranges.push_back(SvSqPrior{}.range(j));
    } else {
      static const Interval stable[4] = {{-1.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {1.0, 2.0}};
      p.ranges.push_back(stable[j]);
    }
  }
  if (!p.contains(p.truth)) throw std::invalid_argument("BoxPrior: true parameter lies outside the prior");
  return p;
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) throw std::invalid_argument("WeightMatrix: must be square");
  if (!m_.allFinite()) throw std::invalid_argument("WeightMatrix: entries must be finite");
  const double scale = m_.cwiseAbs().maxCoeff();
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("WeightMatrix: must be symmetric");
  }
  m_ = 0.5 * (m_ + m_.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("WeightMatrix: must be positive definite");
}

WeightMatrix WeightMatrix::identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return WeightMatrix(Eigen::MatrixXd::Identity(n, n));
}

double WeightMatrix::norm(std::span<const double> v) const {
  if (v.size() != dim()) throw std::invalid_argument("WeightMatrix: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  return std::sqrt(std::max(0.0, x.dot(m_ * x)));
}

double dist_mle(std::span<const double> beta_y, std::span<const double> beta_z, const WeightMatrix& omega) {
  if (beta_y.size() != beta_z.size()) throw std::invalid_argument("dist_mle: dimension mismatch");
  std::vector<double> d(beta_y.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = beta_y[i] - beta_z[i];
  return omega.norm(d);
}

double dist_score(std::span<const double> score_z, const WeightMatrix& sigma) { return sigma.norm(score_z); }

double dist_euclid_weighted(const SummaryVector& s_z, const SummaryVector& s_obs, const std::array<double, 5>& var,
                            std::size_t* dropped) {
  double sum = 0.0;
  std::size_t skipped = 0;
  for (std::size_t j = 0; j < 5; ++j) {
    if (!(var[j] > 0.0)) {
      ++skipped;
      continue;
    }
    const double d = s_z[j] - s_obs[j];
    sum += d * d / var[j];
  }
  if (dropped) *dropped = skipped;
  return std::sqrt(sum);
}

FpResult fp_pipeline(std::span<const double> phi_j, const std::vector<std::vector<double>>& summaries,
                     std::span<const double> s_obs) {
  const std::size_t n = summaries.size();
  if (phi_j.size() != n) throw std::invalid_argument("fp_pipeline: one parameter value per draw");
  if (n <= 6) throw std::invalid_argument("fp_pipeline: more than 6 draws are required");
  const std::size_t k = s_obs.size();
  // Columns are centred and divided by their largest magnitude so that raw summaries
  // of heavy-tailed returns neither overflow nor swamp the rank test.
  std::vector<double> scale(k, 0.0), centre(k, 0.0);
  for (const auto& row : summaries) {
    if (row.size() != k) throw std::invalid_argument("fp_pipeline: summary dimension mismatch");
    for (std::size_t j = 0; j < k; ++j) scale[j] = std::max(scale[j], std::abs(row[j]));
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!(scale[j] > 0.0) || !std::isfinite(scale[j])) scale[j] = 1.0;
    for (const auto& row : summaries) centre[j] += row[j] / scale[j];
    centre[j] /= static_cast<double>(n);
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k + 1));
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) X(r, static_cast<Eigen::Index>(j + 1)) = summaries[i][j] / scale[j] - centre[j];
    target(r) = phi_j[i];
  }
  FpResult out;
  Eigen::VectorXd g;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() == X.cols()) {
    g = qr.solve(target);
  } else {
    out.ridge_used = true;
    Eigen::MatrixXd normal = X.transpose() * X;
    normal.diagonal().array() += 1e-8 * static_cast<double>(n);
    g = normal.ldlt().solve(X.transpose() * target);
  }
  out.gamma.resize(static_cast<Eigen::Index>(k + 1));
  out.gamma(0) = g(0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j + 1);
    out.gamma(jj) = g(jj) / scale[j];
    out.gamma(0) -= g(jj) * centre[j];
  }
  out.distances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      d += (summaries[i][j] / scale[j] - s_obs[j] / scale[j]) * g(static_cast<Eigen::Index>(j + 1));
    }
    out.distances[i] = std::abs(d);
  }
  return out;
}

double silverman_bandwidth(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: at least 2 values are required");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  return h > 1e-8 ? h : 1e-8;
}

KdeEstimate kde(std::span<const double> values, std::span<const double> grid) {
  if (values.size() < 50) throw std::invalid_argument("kde: at least 50 values are required");
  if (grid.size() < 2) throw std::invalid_argument("kde: grid needs at least 2 nodes");
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (!(grid[g] > grid[g - 1])) throw std::invalid_argument("kde: grid must be strictly increasing");
  }
  KdeEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.bandwidth = silverman_bandwidth(values);
  est.ordinates.assign(grid.size(), 0.0);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    // All mass at one value: a spike on the nearest node carrying unit trapezoid mass.
    est.degenerate = true;
    const auto it = std::lower_bound(grid.begin(), grid.end(), *lo);
    std::size_t g = static_cast<std::size_t>(it - grid.begin());
    if (g == grid.size() || (g > 0 && *lo - grid[g - 1] < grid[g] - *lo)) g = g == 0 ? 0 : g - 1;
    const double left = g > 0 ? grid[g] - grid[g - 1] : 0.0;
    const double right = g + 1 < grid.size() ? grid[g + 1] - grid[g] : 0.0;
    est.ordinates[g] = 2.0 / (left + right);
    return est;
  }
  const double h = est.bandwidth;
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double v : values) {
      const double u = (grid[g] - v) / h;
      s += std::exp(-0.5 * u * u);
    }
    est.ordinates[g] = s * norm;
  }
  return est;
}

double score_mle_agreement(const RetainedSet& run_a, const RetainedSet& run_b) {
  if (run_a.master_seed != run_b.master_seed || run_a.n_total != run_b.n_total ||
      std::abs(run_a.quantile - run_b.quantile) > 1e-15) {
    throw std::invalid_argument("score_mle_agreement: runs differ in seed, pool size or quantile");
  }
  std::vector<std::uint64_t> a, b;
  for (const auto& d : run_a.draws) a.push_back(d.stream_id);
  for (const auto& d : run_b.draws) b.push_back(d.stream_id);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::uint64_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const std::size_t uni = a.size() + b.size() - both.size();
  return uni == 0 ? 1.0 : static_cast<double>(both.size()) / static_cast<double>(uni);
}

std::size_t retained_count(double quantile, std::size_t n_total) {
  return static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n_total) - 1e-9));
}

RetainedSet retain(const std::vector<std::vector<double>>& phis, const std::vector<std::vector<double>>& summaries,
                   std::span<const double> distances, double quantile, std::uint64_t master_seed,
                   std::optional<std::size_t> n_retained) {
  const std::size_t n = distances.size();
  if (phis.size() != n || summaries.size() != n) throw std::invalid_argument("retain: size mismatch");
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(distances[i])) order.push_back(i);
  }
  if (order.empty()) {
    throw AbcRunError("ABC run failed: all " + std::to_string(n) +
                      " distances are infinite (every simulation or auxiliary evaluation failed)");
  }
  std::size_t k = n_retained ? *n_retained : retained_count(quantile, n);
  k = std::max<std::size_t>(1, std::min(k, order.size()));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return distances[a] < distances[b] || (distances[a] == distances[b] && a < b);
                    });
  RetainedSet out;
  out.n_total = n;
  out.quantile = n_retained ? static_cast<double>(*n_retained) / static_cast<double>(n) : quantile;
  out.master_seed = master_seed;
  out.draws.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    out.draws.push_back({phis[i], summaries[i], distances[i], static_cast<std::uint64_t>(i)});
  }
  out.epsilon = out.draws.back().distance;
  return out;
}

std::shared_ptr<const ObservedContext> ObservedContext::build(ModelTag model, SimPath data,
                                                              std::vector<std::size_t> unknown,
                                                              const AukfOptions& aukf) {
  auto ctx = std::make_shared<ObservedContext>();
  ctx->model = model;
  ctx->data = std::move(data);
  ctx->unknown = std::move(unknown);
  ctx->aukf = aukf;
  ctx->aux = make_aux_model(model, aukf);
  const auto y = aux_data(ctx->data);
  ctx->fit = fit_mle(*ctx->aux, y, ctx->aux->default_start(y));
  if (!std::isfinite(ctx->fit.loglik)) throw AbcRunError("auxiliary fit to the observed data failed");
  // Conditional prior box for the integrated likelihood: four standard errors around beta_hat(y).
  const auto bounds = ctx->aux->bounds();
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double se = std::sqrt(ctx->fit.weight(jj, jj));
    const double b = ctx->fit.beta_hat[j];
    Interval box = bounds[j];
    if (std::isfinite(se) && se > 0.0) box = {std::max(bounds[j].lo, b - 4.0 * se), std::min(bounds[j].hi, b + 4.0 * se)};
    ctx->integration.box.push_back(box);
  }
  return ctx;
}

namespace {

class ScoreCriterion final : public Criterion {
 public:
  explicit ScoreCriterion(std::shared_ptr<const ObservedContext> ctx)
      : ctx_(std::move(ctx)),
        scalar_(ctx_->model == ModelTag::SvSq && ctx_->unknown.size() == 1),
        sigma_(ctx_->fit.weight) {}

  std::string name() const override { return "score"; }

  std::vector<double> summarize(const SimPath& path) const override {
    const auto z = aux_data(path);
    if (scalar_) return {numeric_score_component(*ctx_->aux, z, ctx_->fit.beta_hat, ctx_->unknown.front())};
    return numeric_score(*ctx_->aux, z, ctx_->fit.beta_hat).score;
  }

  std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& summaries,
                                             const std::vector<std::vector<double>>&) const override {
    std::vector<double> d(summaries.size(), kInf);
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      if (!usable(summaries[i])) continue;
      d[i] = scalar_ ? std::abs(summaries[i][0]) : dist_score(summaries[i], sigma_);
    }
    return {d};
  }

 private:
  std::shared_ptr<const ObservedContext> ctx_;
  bool scalar_;
  WeightMatrix sigma_;
};

class MleCriterion final : public Criterion {
 public:
  explicit MleCriterion(std::shared_ptr<const ObservedContext> ctx)
      : ctx_(std::move(ctx)),
        scalar_(ctx_->model == ModelTag::SvSq && ctx_->unknown.size() == 1),
        omega_(Eigen::MatrixXd(ctx_->fit.weight.inverse())) {
    if (scalar_) {
      const std::size_t j = ctx_->unknown.front();
      const auto y = aux_data(ctx_->data);
      beta_y_ = {fit_conditional(*ctx_->aux, y, ctx_->fit.beta_hat, j).x[j]};
      const auto jj = static_cast<Eigen::Index>(j);
      scale_ = std::sqrt(omega_.matrix()(jj, jj));
    } else {
      beta_y_ = ctx_->fit.beta_hat;
    }
  }

  std::string name() const override { return "mle"; }

  std::vector<double> summarize(const SimPath& path) const override {
    const auto z = aux_data(path);
    if (scalar_) {
      const std::size_t j = ctx_->unknown.front();
      const auto r = fit_conditional(*ctx_->aux, z, ctx_->fit.beta_hat, j);
      if (!std::isfinite(r.value)) return {kNaN};
      return {r.x[j]};
    }
    FitOptions options;
    options.compute_weight = false;
    const AuxFit f = fit_mle(*ctx_->aux, z, ctx_->fit.beta_hat, options);
    if (!f.converged || !std::isfinite(f.loglik)) return {kNaN};
    return f.beta_hat;
  }

  std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& summaries,
                                             const std::vector<std::vector<double>>&) const override {
    std::vector<double> d(summaries.size(), kInf);
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      if (!usable(summaries[i])) continue;
      d[i] = scalar_ ? std::abs(summaries[i][0] - beta_y_[0]) * scale_ : dist_mle(beta_y_, summaries[i], omega_);
    }
    return {d};
  }

 private:
  std::shared_ptr<const ObservedContext> ctx_;
  bool scalar_;
  WeightMatrix omega_;
  std::vector<double> beta_y_;
  double scale_ = 1.0;
};

std::vector<double> ar1_summary_vector(const SimPath& path, SummaryTransform transform) {
  const SummaryVector s = ar1_summary_stats(path.returns, transform);
  return {s.s.begin(), s.s.end()};
}

class SsCriterion final : public Criterion {
 public:
  SsCriterion(std::shared_ptr<const ObservedContext> ctx, SummaryTransform transform)
      : transform_(transform), s_obs_(ar1_summary_stats(ctx->data.returns, transform)) {}

  std::string name() const override { return transform_ == SummaryTransform::Raw ? "ss_raw" : "ss"; }

  std::vector<double> summarize(const SimPath& path) const override { return ar1_summary_vector(path, transform_); }

  std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& summaries,
                                             const std::vector<std::vector<double>>&) const override {
    std::array<double, 5> mean{}, var{};
    std::size_t n = 0;
    for (const auto& s : summaries) {
      if (!usable(s)) continue;
      ++n;
      for (std::size_t j = 0; j < 5; ++j) mean[j] += s[j];
    }
    std::vector<double> d(summaries.size(), kInf);
    if (n < 2) return {d};
    for (auto& m : mean) m /= static_cast<double>(n);
    for (const auto& s : summaries) {
      if (!usable(s)) continue;
      for (std::size_t j = 0; j < 5; ++j) var[j] += (s[j] - mean[j]) * (s[j] - mean[j]);
    }
    for (auto& v : var) v /= static_cast<double>(n - 1);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      if (usable(summaries[i])) d[i] = dist_euclid_weighted(to_summary(summaries[i]), s_obs_, var, &dropped);
    }
    if (dropped > 0) {
      std::cerr << "warning: " << name() << ": " << dropped << " summary coordinate(s) with zero variance dropped\n";
    }
    return {d};
  }

 private:
  SummaryTransform transform_;
  SummaryVector s_obs_;
};

class FpCriterion final : public Criterion {
 public:
  FpCriterion(std::shared_ptr<const ObservedContext> ctx, SummaryTransform transform)
      : unknown_(ctx->unknown), transform_(transform), s_obs_(ar1_summary_vector(ctx->data, transform)) {}

  std::string name() const override { return transform_ == SummaryTransform::Raw ? "fp_raw" : "fp"; }
  std::size_t channels() const override { return unknown_.size(); }
  std::size_t channel_for(std::size_t k) const override { return k; }

  std::vector<double> summarize(const SimPath& path) const override { return ar1_summary_vector(path, transform_); }

  std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& summaries,
                                             const std::vector<std::vector<double>>& phis) const override {
    std::vector<std::size_t> rows;
    std::vector<std::vector<double>> kept;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      if (usable(summaries[i])) {
        rows.push_back(i);
        kept.push_back(summaries[i]);
      }
    }
    std::vector<std::vector<double>> out(unknown_.size(), std::vector<double>(summaries.size(), kInf));
    if (rows.size() <= 6) return out;
    for (std::size_t k = 0; k < unknown_.size(); ++k) {
      std::vector<double> target(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) target[r] = phis[rows[r]][unknown_[k]];
      const FpResult fp = fp_pipeline(target, kept, s_obs_);
      if (fp.ridge_used) std::cerr << "warning: " << name() << ": rank-deficient regression, ridge applied\n";
      for (std::size_t r = 0; r < rows.size(); ++r) out[k][rows[r]] = fp.distances[r];
    }
    return out;
  }

 private:
  std::vector<std::size_t> unknown_;
  SummaryTransform transform_;
  std::vector<double> s_obs_;
};

class IntScoreCriterion final : public Criterion {
 public:
  explicit IntScoreCriterion(std::shared_ptr<const ObservedContext> ctx) : ctx_(std::move(ctx)) {
    if (ctx_->model != ModelTag::SvSq) {
      throw std::invalid_argument("int_score: only defined for the square-root model");
    }
    const auto y = aux_data(ctx_->data);
    for (std::size_t j : ctx_->unknown) {
      beta_hat_.push_back(fit_integrated(*ctx_->aux, y, j, ctx_->integration).x.front());
    }
  }

  std::string name() const override { return "int_score"; }
  std::size_t channels() const override { return ctx_->unknown.size(); }
  std::size_t channel_for(std::size_t k) const override { return k; }

  std::vector<double> summarize(const SimPath& path) const override {
    const auto z = aux_data(path);
    std::vector<double> s;
    for (std::size_t k = 0; k < ctx_->unknown.size(); ++k) {
      s.push_back(integrated_score(*ctx_->aux, z, beta_hat_[k], ctx_->unknown[k], ctx_->integration));
    }
    return s;
  }

  std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& summaries,
                                             const std::vector<std::vector<double>>&) const override {
    std::vector<std::vector<double>> out(channels(), std::vector<double>(summaries.size(), kInf));
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      if (summaries[i].size() != channels()) continue;
      for (std::size_t k = 0; k < channels(); ++k) {
        if (std::isfinite(summaries[i][k])) out[k][i] = std::abs(summaries[i][k]);
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const ObservedContext> ctx_;
  std::vector<double> beta_hat_;
};

}  // namespace

CriterionKind criterion_kind_from_string(std::string_view name) {
  if (name == "score") return CriterionKind::Score;
  if (name == "mle") return CriterionKind::Mle;
  if (name == "ss") return CriterionKind::Ss;
  if (name == "ss_raw") return CriterionKind::SsRaw;
  if (name == "fp") return CriterionKind::Fp;
  if (name == "fp_raw") return CriterionKind::FpRaw;
  if (name == "int_score") return CriterionKind::IntScore;
  throw std::invalid_argument("unknown criterion '" + std::string(name) + "'");
}

std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::Score:
      return "score";
    case CriterionKind::Mle:
      return "mle";
    case CriterionKind::Ss:
      return "ss";
    case CriterionKind::SsRaw:
      return "ss_raw";
    case CriterionKind::Fp:
      return "fp";
    case CriterionKind::FpRaw:
      return "fp_raw";
    case CriterionKind::IntScore:
      return "int_score";
  }
  return "unknown";
}

std::unique_ptr<Criterion> make_criterion(CriterionKind kind, std::shared_ptr<const ObservedContext> observed) {
  switch (kind) {
    case CriterionKind::Score:
      return std::make_unique<ScoreCriterion>(std::move(observed));
    case CriterionKind::Mle:
      return std::make_unique<MleCriterion>(std::move(observed));
    case CriterionKind::Ss:
      return std::make_unique<SsCriterion>(std::move(observed), SummaryTransform::LogSquared);
    case CriterionKind::SsRaw:
      return std::make_unique<SsCriterion>(std::move(observed), SummaryTransform::Raw);
    case CriterionKind::Fp:
      return std::make_unique<FpCriterion>(std::move(observed), SummaryTransform::LogSquared);
    case CriterionKind::FpRaw:
      return std::make_unique<FpCriterion>(std::move(observed), SummaryTransform::Raw);
    case CriterionKind::IntScore:
      return std::make_unique<IntScoreCriterion>(std::move(observed));
  }
  throw std::invalid_argument("make_criterion: unknown kind");
}

AbcPool simulate_pool(const BoxPrior& prior, std::size_t T, std::size_t N, std::uint64_t master_seed,
                      const std::vector<const Criterion*>& criteria, std::size_t threads) {
  AbcPool pool;
  pool.master_seed = master_seed;
  pool.phis.resize(N);
  pool.summaries.assign(criteria.size(), std::vector<std::vector<double>>(N));
  parallel_for(N, threads, [&](std::size_t i) {
    RngStream rng(master_seed, i);
    pool.phis[i] = prior.draw(rng);
    SimPath path;
    try {
      path = simulate(prior.model, pool.phis[i], T, rng);
    } catch (const std::exception&) {
      return;  // empty summaries mark a failed draw
    }
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      try {
        pool.summaries[c][i] = criteria[c]->summarize(path);
      } catch (const std::exception&) {
        pool.summaries[c][i].clear();
      }
    }
  });
  return pool;
}

RetainedSet select(const AbcPool& pool, std::size_t c, const Criterion& criterion, std::size_t channel,
                   double quantile, std::optional<std::size_t> n_retained) {
  const auto& summaries = pool.summaries.at(c);
  const auto d = criterion.distances(summaries, pool.phis);
  return retain(pool.phis, summaries, d.at(channel), quantile, pool.master_seed, n_retained);
}

RetainedSet run_abc(const BoxPrior& prior, std::size_t T, const Criterion& criterion, std::size_t N, double quantile,
                    std::uint64_t master_seed, std::size_t threads) {
  if (N < 100) throw std::invalid_argument("run_abc: N must be at least 100");
  if (!(quantile > 0.0 && quantile <= 0.1)) throw std::invalid_argument("run_abc: quantile must lie in (0, 0.1]");
  const AbcPool pool = simulate_pool(prior, T, N, master_seed, {&criterion}, threads);
  return select(pool, 0, criterion, 0, quantile);
}

void write_retained_csv(std::ostream& os, const RetainedSet& set) {
  const std::size_t dim = set.draws.empty() ? 0 : set.draws.front().phi.size();
  os << "stream_id";
  for (std::size_t j = 0; j < dim; ++j) os << ",phi" << j + 1;
  os << ",distance\n" << std::setprecision(12);
  for (const auto& d : set.draws) {
    os << d.stream_id;
    for (double v : d.phi) os << ',' << v;
    os << ',' << d.distance << '\n';
  }
}

void write_kde_csv(std::ostream& os, const KdeEstimate& est) {
  os << "grid,density\n" << std::setprecision(12);
  for (std::size_t g = 0; g < est.grid.size(); ++g) os << est.grid[g] << ',' << est.ordinates[g] << '\n';
}

}  // namespace ssmabc
