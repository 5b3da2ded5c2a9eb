#include "ssmabc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>

namespace ssmabc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double hessian_step(double b) { return 1e-4 * std::max(std::abs(b), 1e-4); }

}  // namespace

double numeric_score_component(const AuxModel& model, std::span<const double> data, std::span<const double> beta,
                               std::size_t j, bool* one_sided) {
  const double T = static_cast<double>(data.size());
  const double h = score_step(beta[j]);
  std::vector<double> b(beta.begin(), beta.end());
  b[j] = beta[j] + h;
  const double fp = model.feasible(b) ? model.loglik(data, b) : -std::numeric_limits<double>::infinity();
  b[j] = beta[j] - h;
  const double fm = model.feasible(b) ? model.loglik(data, b) : -std::numeric_limits<double>::infinity();
  if (std::isfinite(fp) && std::isfinite(fm)) return (fp - fm) / (2.0 * h * T);
  if (one_sided) *one_sided = true;
  const double f0 = model.loglik(data, beta);
  if (!std::isfinite(f0)) return kNan;
  if (std::isfinite(fp)) return (fp - f0) / (h * T);
  if (std::isfinite(fm)) return (f0 - fm) / (h * T);
  return kNan;
}

ScoreResult numeric_score(const AuxModel& model, std::span<const double> data, std::span<const double> beta) {
  if (beta.size() != model.dim()) throw std::invalid_argument("numeric_score: wrong parameter dimension");
  ScoreResult out;
  out.score.resize(beta.size());
  for (std::size_t j = 0; j < beta.size(); ++j) {
    out.score[j] = numeric_score_component(model, data, beta, j, &out.one_sided);
  }
  return out;
}

Eigen::MatrixXd numeric_hessian(const AuxModel& model, std::span<const double> data, std::span<const double> beta) {
  const std::size_t d = beta.size();
  const double T = static_cast<double>(data.size());
  const auto g0 = numeric_score(model, data, beta).score;
  Eigen::MatrixXd H(d, d);
  std::vector<double> b(beta.begin(), beta.end());
  for (std::size_t i = 0; i < d; ++i) {
    const double h = hessian_step(beta[i]);
    b[i] = beta[i] + h;
    const bool up_ok = model.feasible(b);
    const auto gp = up_ok ? numeric_score(model, data, b).score : g0;
    b[i] = beta[i] - h;
    const bool down_ok = model.feasible(b);
    const auto gm = down_ok ? numeric_score(model, data, b).score : g0;
    b[i] = beta[i];
    const double span = (up_ok ? h : 0.0) + (down_ok ? h : 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = span > 0.0 ? T * (gp[k] - gm[k]) / span : kNan;
    }
  }
  return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd covariance_from_hessian(const Eigen::MatrixXd& hessian, bool* repaired) {
  if (hessian.rows() != hessian.cols() || hessian.rows() == 0) {
    throw std::invalid_argument("covariance_from_hessian: Hessian must be square and non-empty");
  }
  if (!hessian.allFinite()) throw std::domain_error("covariance_from_hessian: non-finite Hessian");
  const Eigen::Index d = hessian.rows();
  const Eigen::MatrixXd A = -0.5 * (hessian + hessian.transpose());
  const double base = std::max(std::abs(A.trace()) / static_cast<double>(d), 1e-300);
  double ridge = 0.0;
  for (int attempt = 0; attempt < 400; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(A + ridge * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) {
      if (repaired) *repaired = ridge > 0.0;
      Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(d, d));
      return 0.5 * (sigma + sigma.transpose());
    }
    ridge = ridge == 0.0 ? 1e-8 * base : ridge * 10.0;
  }
  throw std::domain_error("covariance_from_hessian: ridge repair failed");
}

namespace {

// The model seen through its optimiser coordinates.
class SearchView final : public AuxModel {
 public:
  explicit SearchView(const AuxModel& model) : model_(model), box_(model.search_bounds()) {}

  std::string name() const override { return model_.name(); }
  std::size_t dim() const override { return model_.dim(); }
  bool feasible(std::span<const double> u) const override {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u[i] >= box_[i].lo && u[i] <= box_[i].hi)) return false;
    }
    return model_.feasible(model_.from_search(u));
  }
  double loglik(std::span<const double> data, std::span<const double> u) const override {
    return model_.loglik(data, model_.from_search(u));
  }
  std::vector<Interval> bounds() const override { return box_; }
  std::vector<double> default_start(std::span<const double> data) const override {
    return model_.to_search(model_.default_start(data));
  }

 private:
  const AuxModel& model_;
  std::vector<Interval> box_;
};

struct Candidate {
  std::vector<double> u;
  double loglik;
  bool converged;
  std::size_t evaluations;
};

// Newton steps on the coordinates not pinned at a bound, with a halving line search.
void polish(const SearchView& view, std::span<const double> data, const FitOptions& options, Candidate& c) {
  const auto box = view.bounds();
  const double T = static_cast<double>(data.size());
  const std::size_t d = view.dim();
  for (int it = 0; it < options.polish_iterations; ++it) {
    const auto g = numeric_score(view, data, c.u).score;
    c.evaluations += 2 * d;
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < d; ++i) {
      const bool pinned = (c.u[i] <= box[i].lo && g[i] < 0.0) || (c.u[i] >= box[i].hi && g[i] > 0.0);
      if (!pinned) free.push_back(i);
    }
    double gmax = 0.0;
    for (std::size_t i : free) gmax = std::max(gmax, std::abs(g[i]));
    if (!std::isfinite(gmax)) break;
    if (gmax < options.polish_tolerance) {
      c.converged = true;
      break;
    }
    Eigen::MatrixXd step_cov;
    try {
      const Eigen::MatrixXd H = numeric_hessian(view, data, c.u) / T;
      c.evaluations += 4 * d * d;
      const auto n = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Hf(n, n);
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) Hf(a, b) = H(static_cast<Eigen::Index>(free[a]), static_cast<Eigen::Index>(free[b]));
      }
      step_cov = covariance_from_hessian(Hf);
    } catch (const std::domain_error&) {
      break;
    }
    Eigen::VectorXd gf(static_cast<Eigen::Index>(free.size()));
    for (std::size_t a = 0; a < free.size(); ++a) gf(static_cast<Eigen::Index>(a)) = g[free[a]];
    const Eigen::VectorXd dir = step_cov * gf;
    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 30 && !accepted; ++ls, alpha *= 0.5) {
      std::vector<double> trial(c.u);
      for (std::size_t a = 0; a < free.size(); ++a) {
        const std::size_t i = free[a];
        trial[i] = std::clamp(trial[i] + alpha * dir(static_cast<Eigen::Index>(a)), box[i].lo, box[i].hi);
      }
      const double v = view.feasible(trial) ? view.loglik(data, trial) : -std::numeric_limits<double>::infinity();
      ++c.evaluations;
      if (std::isfinite(v) && v >= c.loglik) {
        c.u = std::move(trial);
        c.loglik = v;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
}

}  // namespace

AuxFit fit_mle(const AuxModel& model, std::span<const double> data, std::span<const double> start,
               const FitOptions& options) {
  if (start.size() != model.dim()) throw std::invalid_argument("fit_mle: wrong start dimension");
  const SearchView view(model);
  const auto box = view.bounds();
  auto objective = [&](std::span<const double> u) {
    return view.feasible(u) ? view.loglik(data, u) : -std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> starts{std::vector<double>(start.begin(), start.end())};
  if (options.multi_start) {
    for (auto& s : model.extra_starts(data)) starts.push_back(std::move(s));
  }
  std::optional<Candidate> best;
  std::size_t evaluations = 0;
  for (const auto& s : starts) {
    std::vector<double> u0 = model.to_search(s);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = std::clamp(u0[i], box[i].lo, box[i].hi);
    const auto nm = nelder_mead_maximize(objective, u0, box, options.simplex);
    Candidate c{nm.x, nm.value, nm.converged, nm.evaluations};
    if (std::isfinite(c.loglik) && options.polish) polish(view, data, options, c);
    evaluations += c.evaluations;
    if (!best || c.loglik > best->loglik) best = std::move(c);
  }

  AuxFit fit;
  fit.beta_hat = model.from_search(best->u);
  fit.loglik = best->loglik;
  fit.converged = best->converged;
  fit.evaluations = evaluations;
  if (!std::isfinite(fit.loglik)) {
    fit.converged = false;
    return fit;
  }
  if (options.compute_weight) {
    try {
      fit.weight = covariance_from_hessian(numeric_hessian(model, data, fit.beta_hat), &fit.ridge_repaired);
    } catch (const std::domain_error&) {
      fit.converged = false;
    }
  }
  return fit;
}

OptimizeResult fit_conditional(const AuxModel& model, std::span<const double> data, std::span<const double> beta,
                               std::size_t j) {
  if (beta.size() != model.dim() || j >= beta.size()) throw std::invalid_argument("fit_conditional: bad coordinate");
  auto known = std::make_unique<bool[]>(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) known[i] = i != j;
  const Interval range =
      model.conditional_range(beta, std::span<const bool>(known.get(), beta.size()), j, model.bounds()[j]);
  std::vector<double> b(beta.begin(), beta.end());
  auto f = [&](double v) {
    b[j] = v;
    return model.feasible(b) ? model.loglik(data, b) : -std::numeric_limits<double>::infinity();
  };
  OptimizeResult r = brent_maximize(f, range.lo, range.hi);
  b[j] = r.x.front();
  r.x = b;
  return r;
}

}  // namespace ssmabc
