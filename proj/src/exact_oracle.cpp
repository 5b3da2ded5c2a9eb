#include "ssmabc/exact_oracle.hpp"

#include "ssmabc/kernels.hpp"
#include "ssmabc/parallel.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ssmabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_series_centered(double q, double x) {
  const double x2 = 0.25 * x * x;
  const double lhalf = std::log(0.5 * x);
  const double peak = std::max(0.0, std::floor(0.5 * (std::sqrt(q * q + x * x) - q)));
  const double log_peak = (2.0 * peak + q) * lhalf - std::lgamma(peak + 1.0) - std::lgamma(peak + q + 1.0);
  double sum = 1.0;
  double term = 1.0;
  for (double k = peak;; k += 1.0) {
    term *= x2 / ((k + 1.0) * (k + q + 1.0));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  term = 1.0;
  for (double k = peak; k > 0.0; k -= 1.0) {
    term *= k * (k + q) / x2;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return log_peak + std::log(sum);
}

// Returns false when the asymptotic series cannot reach full precision.
bool log_hankel(double q, double x, double& out) {
  const double mu = 4.0 * q * q;
  double sum = 1.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int k = 1; k < 200 && !converged; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::abs(term);
    if (mag > prev) return false;
    sum += term;
    prev = mag;
    converged = mag < 1e-17 * std::abs(sum);
  }
  if (!converged || !(sum > 0.0)) return false;
  out = -0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
  return true;
}

double log_debye(double nu, double x) {
  const double z = x / nu;
  const double root = std::sqrt(1.0 + z * z);
  const double t = 1.0 / root;
  const double t2 = t * t;
  const double u1 = t * (3.0 - 5.0 * t2) / 24.0;
  const double u2 = t2 * (81.0 - 462.0 * t2 + 385.0 * t2 * t2) / 1152.0;
  const double u3 = t * t2 * (30375.0 + t2 * (-369603.0 + t2 * (765765.0 - 425425.0 * t2))) / 414720.0;
  const double u4 =
      t2 * t2 * (4465125.0 + t2 * (-94121676.0 + t2 * (349922430.0 + t2 * (-446185740.0 + 185910725.0 * t2)))) /
      39813120.0;
  const double series = 1.0 + u1 / nu + u2 / (nu * nu) + u3 / (nu * nu * nu) + u4 / (nu * nu * nu * nu);
  // nu * (eta - z) with eta - z = (root - z) + ln(z / (1 + root))
  const double eta_minus_z = 1.0 / (root + z) + std::log(z / (1.0 + root));
  return nu * eta_minus_z - 0.5 * std::log(2.0 * std::numbers::pi * nu) - 0.5 * std::log(root) + std::log(series);
}

void require_phi(const SvSqParams& phi) { phi.validate(); }

}  // namespace

double log_bessel_i_scaled(double q, double x) {
  if (!(q >= 0.0) || !(x >= 0.0) || !std::isfinite(q) || !std::isfinite(x)) {
    throw std::domain_error("log_bessel_i_scaled: requires q >= 0 and x >= 0");
  }
  if (x == 0.0) return q == 0.0 ? 0.0 : kNegInf;
  if (x < 30.0) return log_series_centered(q, x) - x;
  double h = 0.0;
  if (log_hankel(q, x, h)) return h;
  if (x <= 1e5 || q < 50.0) return log_series_centered(q, x) - x;
  return log_debye(q, x);
}

double log_cir_transition_density(double x, double x_prev, const SvSqParams& phi) {
  if (!(x > 0.0) || !(x_prev > 0.0)) throw std::domain_error("cir_transition_density: states must be positive");
  const auto k = CirTransitionConstants::from(phi);
  const double u = k.c * x_prev * k.decay;
  const double v = k.c * x;
  const double z = 2.0 * std::sqrt(u * v);
  const double gap = std::sqrt(u) - std::sqrt(v);
  return std::log(k.c) - gap * gap + 0.5 * k.q * std::log(v / u) + log_bessel_i_scaled(k.q, z);
}

double cir_transition_density(double x, double x_prev, const SvSqParams& phi) {
  require_phi(phi);
  return std::exp(log_cir_transition_density(x, x_prev, phi));
}

double log_chisq_log_density(double w) {
  const double s = w + kLogChiSqMean;
  return 0.5 * s - 0.5 * std::exp(s) - 0.5 * std::log(2.0 * std::numbers::pi);
}

StateGrid StateGrid::stationary(const SvSqParams& phi, std::size_t n, double tail) {
  require_phi(phi);
  if (n < 2) throw std::invalid_argument("StateGrid: at least 2 nodes are required");
  if (!(tail > 0.0 && tail < 0.5)) throw std::invalid_argument("StateGrid: tail must lie in (0, 0.5)");
  const boost::math::gamma_distribution<double> law(phi.stationary_shape(), 1.0 / phi.stationary_rate());
  // The transition kernel has roughly constant width in sqrt(x), so nodes are evenly spaced there.
  const double lo = std::sqrt(boost::math::quantile(law, tail));
  const double hi = std::sqrt(boost::math::quantile(boost::math::complement(law, tail)));
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    nodes[i] = r * r;
  }
  return from_nodes(std::move(nodes));
}

StateGrid StateGrid::from_nodes(std::vector<double> nodes) {
  StateGrid g;
  g.nodes = std::move(nodes);
  const std::size_t n = g.nodes.size();
  g.weights.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (g.nodes[i + 1] - g.nodes[i]);
    g.weights[i] += h;
    g.weights[i + 1] += h;
  }
  g.validate();
  return g;
}

void StateGrid::validate() const {
  if (nodes.size() < 2 || weights.size() != nodes.size()) {
    throw std::invalid_argument("StateGrid: need at least 2 nodes with matching weights");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] > 0.0) || (i > 0 && !(nodes[i] > nodes[i - 1])) || !(weights[i] > 0.0)) {
      throw std::invalid_argument("StateGrid: nodes must be positive and strictly increasing");
    }
  }
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
  return s;
}

double grid_filter_loglik(std::span<const double> y, const SvSqParams& phi, const StateGrid& grid,
                          GridFilterTrace* trace) {
  require_phi(phi);
  grid.validate();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xj = grid.nodes[static_cast<std::size_t>(j)];
    const double wj = grid.weights[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i) {
      kernel(i, j) = std::exp(log_cir_transition_density(grid.nodes[static_cast<std::size_t>(i)], xj, phi)) * wj;
    }
  }
  Eigen::VectorXd log_x(n), w(n), f(n);
  const boost::math::gamma_distribution<double> law(phi.stationary_shape(), 1.0 / phi.stationary_rate());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    log_x(i) = std::log(grid.nodes[k]);
    w(i) = grid.weights[k];
    f(i) = boost::math::pdf(law, grid.nodes[k]);
  }
  const double mass0 = w.dot(f);
  if (!(mass0 > 0.0)) throw FilterFailure("grid_filter_loglik: stationary density vanishes on the grid", 0);
  f /= mass0;
  if (trace) trace->filtered.clear();

  double loglik = 0.0;
  Eigen::VectorXd pred(n);
  for (std::size_t t = 0; t < y.size(); ++t) {
    pred.noalias() = kernel * f;
    for (Eigen::Index i = 0; i < n; ++i) f(i) = pred(i) * std::exp(log_chisq_log_density(y[t] - log_x(i)));
    const double norm = w.dot(f);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw FilterFailure("grid_filter_loglik: probability mass underflow at t=" + std::to_string(t + 1), t + 1);
    }
    loglik += std::log(norm);
    f /= norm;
    if (trace) trace->filtered.emplace_back(f.data(), f.data() + n);
  }
  return loglik;
}

double particle_filter_loglik(std::span<const double> y, const SvSqParams& phi, std::size_t n_particles,
                              RngStream& rng) {
  require_phi(phi);
  if (n_particles < 1000) throw std::invalid_argument("particle_filter_loglik: at least 1000 particles are required");
  const auto k = CirTransitionConstants::from(phi);
  const std::size_t N = n_particles;
  std::vector<double> x(N), next(N), lw(N), cdf(N);
  for (auto& xi : x) xi = sample_cir_stationary(phi, rng);
  double loglik = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    double m = kNegInf;
    for (std::size_t i = 0; i < N; ++i) {
      x[i] = sample_cir_transition(x[i], k, rng);
      lw[i] = log_chisq_log_density(y[t] - std::log(x[i]));
      m = std::max(m, lw[i]);
    }
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double wi = std::exp(lw[i] - m);
      s += wi;
      s2 += wi * wi;
      cdf[i] = s;
    }
    if (!(s > 0.0) || s * s / s2 < 2.0) {
      throw FilterFailure("particle_filter_loglik: weight collapse at t=" + std::to_string(t + 1), t + 1);
    }
    loglik += m + std::log(s / static_cast<double>(N));
    if (t + 1 == y.size()) break;
    // Multinomial resampling with sorted uniforms from normalised exponential spacings.
    double total = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      total += rng.exponential();
      if (i < N) lw[i] = total;
    }
    std::size_t j = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double u = lw[i] / total * s;
      while (j + 1 < N && cdf[j] < u) ++j;
      next[i] = x[j];
    }
    x.swap(next);
  }
  return loglik;
}

bool SvSqPrior::contains(const SvSqParams& phi) const {
  return phi.phi1 > phi1.lo && phi.phi1 <= phi1.hi && phi.phi2 > phi2.lo && phi.phi2 < phi2.hi && phi.phi3 > phi3.lo &&
         phi.phi3 <= phi3.hi && 2.0 * phi.phi1 >= phi.phi3 * phi.phi3;
}

Interval SvSqPrior::range(std::size_t coordinate) const {
  switch (coordinate) {
    case 0:
      return phi1;
    case 1:
      return phi2;
    case 2:
      return phi3;
    default:
      throw std::invalid_argument("SvSqPrior: coordinate must be 0, 1 or 2");
  }
}

namespace {

std::vector<double> posterior_log_ordinates(std::span<const double> y, std::size_t coordinate,
                                            const SvSqParams& fixed, const SvSqPrior& prior,
                                            const std::vector<double>& nodes, const ExactPosteriorOptions& options) {
  std::vector<double> lp(nodes.size(), kNegInf);
  parallel_for(nodes.size(), options.threads, [&](std::size_t i) {
    auto values = fixed.as_array();
    values[coordinate] = nodes[i];
    const auto phi = SvSqParams::from_span(values);
    if (!prior.contains(phi) || !phi.feasible()) return;
    try {
      lp[i] = grid_filter_loglik(y, phi, StateGrid::stationary(phi, options.state_nodes));
    } catch (const FilterFailure&) {
      lp[i] = kNegInf;
    }
  });
  return lp;
}

}  // namespace

PosteriorGrid exact_posterior(std::span<const double> y, std::size_t coordinate, const SvSqParams& fixed,
                              const SvSqPrior& prior, const ExactPosteriorOptions& options) {
  if (options.param_nodes < 2) throw std::invalid_argument("exact_posterior: at least 2 parameter nodes are required");
  const Interval range = prior.range(coordinate);
  const std::size_t n = options.param_nodes;
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = range.lo + range.width() * static_cast<double>(i + 1) / static_cast<double>(n + 1);
  }
  auto lp = posterior_log_ordinates(y, coordinate, fixed, prior, nodes, options);
  auto best = std::max_element(lp.begin(), lp.end());
  if (*best == kNegInf) throw std::invalid_argument("exact_posterior: no feasible parameter node");

  if (options.refine) {
    const double spacing = range.width() / static_cast<double>(n + 1);
    const double cut = *best - 30.0;
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (lp[i] > cut) {
        first = std::min(first, i);
        last = std::max(last, i);
      }
    }
    const double a = std::max(nodes[first] - spacing, range.lo + 0.5 * spacing);
    const double b = std::min(nodes[last] + spacing, range.hi - 0.5 * spacing);
    if (b > a) {
      for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
      }
      lp = posterior_log_ordinates(y, coordinate, fixed, prior, nodes, options);
      best = std::max_element(lp.begin(), lp.end());
      if (*best == kNegInf) throw std::invalid_argument("exact_posterior: no feasible parameter node");
    }
  }

  PosteriorGrid out;
  out.param_nodes = nodes;
  out.density.resize(n);
  const double m = *best;
  for (std::size_t i = 0; i < n; ++i) out.density[i] = lp[i] == kNegInf ? 0.0 : std::exp(lp[i] - m);
  const double z = trapezoid(out.param_nodes, out.density);
  if (!(z > 0.0)) throw std::invalid_argument("exact_posterior: posterior mass is zero on the grid");
  out.log_posterior.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.density[i] /= z;
    out.log_posterior[i] = lp[i] == kNegInf ? kNegInf : lp[i] - m - std::log(z);
  }
  return out;
}

}  // namespace ssmabc
