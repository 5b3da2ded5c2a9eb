#include "ssmabc/aux_models.hpp"

#include "ssmabc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ssmabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093453;

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " components");
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double mean_abs(std::span<const double> r) {
  double s = 0.0;
  for (double x : r) s += std::abs(x);
  return s / static_cast<double>(r.size());
}

double mean_square(std::span<const double> r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s / static_cast<double>(r.size());
}

}  // namespace

bool AuxParamsSq::feasible() const {
  if (!std::isfinite(beta1) || !std::isfinite(beta2) || !std::isfinite(beta3)) return false;
  return beta1 >= kAuxFloor && beta3 >= kAuxFloor && beta2 >= kAuxFloor && beta2 <= 1.0 - kAuxFloor &&
         2.0 * beta1 >= beta3 * beta3;
}

AuxParamsSq AuxParamsSq::from_span(std::span<const double> v) {
  require_size(v, 3, "AuxParamsSq");
  return {v[0], v[1], v[2]};
}

bool AuxParamsGarchT::feasible() const {
  if (!std::isfinite(beta1) || !std::isfinite(beta2) || !std::isfinite(beta3) || !std::isfinite(beta4)) return false;
  return beta1 > 0.0 && beta2 >= 0.0 && beta3 >= 0.0 && beta2 + beta3 < 1.0 && beta4 > 2.0;
}

AuxParamsGarchT AuxParamsGarchT::from_span(std::span<const double> v) {
  require_size(v, 4, "AuxParamsGarchT");
  return {v[0], v[1], v[2], v[3]};
}

double aukf_loglik(std::span<const double> y, const AuxParamsSq& beta, const AukfOptions& options) {
  if (y.size() < 2) throw std::invalid_argument("aukf_loglik: at least 2 observations are required");
  if (!beta.feasible()) return kNegInf;
  const auto model = SqAukfModel::from(beta.beta1, beta.beta2, beta.beta3, options.noise_center);
  return aukf_run(y, model, options);
}

double garch_t_loglik(std::span<const double> r, const AuxParamsGarchT& beta) {
  if (r.size() < 2) throw std::invalid_argument("garch_t_loglik: at least 2 observations are required");
  if (!beta.feasible()) return kNegInf;
  const double nu = beta.beta4;
  const double scale2 = nu - 2.0;
  const double log_const =
      std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(std::numbers::pi * scale2);
  const double power = 0.5 * (nu + 1.0);
  double x = mean_abs(r);
  double total = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (t > 0) x = beta.beta1 + beta.beta2 * std::abs(r[t - 1]) + beta.beta3 * x;
    if (!(x > 0.0)) return kNegInf;
    const double eps = r[t] / x;
    total += log_const - power * std::log1p(eps * eps / scale2) - std::log(x);
  }
  return std::isfinite(total) ? total : kNegInf;
}

double garch_loglik(std::span<const double> r, std::span<const double> beta) {
  require_size(beta, 3, "garch_loglik");
  if (r.size() < 2) throw std::invalid_argument("garch_loglik: at least 2 observations are required");
  const double b1 = beta[0], b2 = beta[1], b3 = beta[2];
  if (!all_finite(beta) || !(b1 > 0.0) || b2 < 0.0 || b3 < 0.0 || !(b2 + b3 < 1.0)) return kNegInf;
  double x = mean_square(r);
  double total = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (t > 0) x = b1 + b2 * r[t - 1] * r[t - 1] + b3 * x;
    if (!(x > 0.0)) return kNegInf;
    total += -0.5 * (kLog2Pi + std::log(x) + r[t] * r[t] / x);
  }
  return std::isfinite(total) ? total : kNegInf;
}

Interval AuxModel::conditional_range(std::span<const double>, std::span<const bool>, std::size_t,
                                     Interval box) const {
  return box;
}

bool SqAukfAuxModel::feasible(std::span<const double> beta) const {
  return beta.size() == 3 && AuxParamsSq::from_span(beta).feasible();
}

double SqAukfAuxModel::loglik(std::span<const double> data, std::span<const double> beta) const {
  if (options_.noise_center == NoiseCenter::Zero) return aukf_loglik(data, AuxParamsSq::from_span(beta), options_);
  thread_local std::vector<double> squared;
  squared.resize(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) squared[t] = data[t] + kLogChiSqMean;
  return aukf_loglik(squared, AuxParamsSq::from_span(beta), options_);
}

std::vector<Interval> SqAukfAuxModel::bounds() const {
  return {{kAuxFloor, 1.0}, {kAuxFloor, 1.0 - kAuxFloor}, {kAuxFloor, 1.0}};
}

std::vector<double> SqAukfAuxModel::default_start(std::span<const double> data) const {
  const double mean_y = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
  const double level = std::clamp(std::exp(mean_y), 1e-6, 0.5);
  const double b2 = 0.9;
  const double b1 = level * (1.0 - b2);
  return {b1, b2, 0.7 * std::sqrt(2.0 * b1)};
}

Interval SqAukfAuxModel::conditional_range(std::span<const double> beta, std::span<const bool> known, std::size_t k,
                                           Interval box) const {
  // 2 beta1 >= beta3^2 couples the first and third coordinates.
  if (k == 2 && known[0]) box.hi = std::min(box.hi, std::sqrt(2.0 * beta[0]));
  if (k == 0 && known[2]) box.lo = std::max(box.lo, 0.5 * beta[2] * beta[2]);
  return box;
}

std::vector<double> SqAukfAuxModel::to_search(std::span<const double> beta) const {
  require_size(beta, 3, "SqAukfAuxModel");
  return {beta[0] - 0.5 * beta[2] * beta[2], beta[1], beta[2]};
}

std::vector<double> SqAukfAuxModel::from_search(std::span<const double> u) const {
  require_size(u, 3, "SqAukfAuxModel");
  return {u[0] + 0.5 * u[2] * u[2], u[1], u[2]};
}

std::vector<Interval> SqAukfAuxModel::search_bounds() const {
  return {{0.0, 1.0}, {kAuxFloor, 1.0 - kAuxFloor}, {kAuxFloor, 1.0}};
}

std::vector<std::vector<double>> SqAukfAuxModel::extra_starts(std::span<const double> data) const {
  const double level = default_start(data)[0] / 0.1;
  std::vector<std::vector<double>> out;
  for (double b2 : {0.3, 0.6, 0.97}) {
    const double b1 = level * (1.0 - b2);
    out.push_back({b1, b2, 0.9 * std::sqrt(2.0 * b1)});
  }
  return out;
}

bool GarchTAuxModel::feasible(std::span<const double> beta) const {
  return beta.size() == 4 && AuxParamsGarchT::from_span(beta).feasible();
}

double GarchTAuxModel::loglik(std::span<const double> data, std::span<const double> beta) const {
  return garch_t_loglik(data, AuxParamsGarchT::from_span(beta));
}

std::vector<Interval> GarchTAuxModel::bounds() const {
  return {{kAuxFloor, 1e3}, {0.0, 1.0}, {0.0, 1.0}, {2.0 + 1e-6, 500.0}};
}

std::vector<double> GarchTAuxModel::default_start(std::span<const double> data) const {
  const double level = std::max(mean_abs(data), 1e-6);
  return {0.15 * level, 0.1, 0.8, 8.0};
}

bool GarchAuxModel::feasible(std::span<const double> beta) const {
  return beta.size() == 3 && std::isfinite(garch_loglik(std::array<double, 2>{1.0, 1.0}, beta));
}

double GarchAuxModel::loglik(std::span<const double> data, std::span<const double> beta) const {
  return garch_loglik(data, beta);
}

std::vector<Interval> GarchAuxModel::bounds() const { return {{kAuxFloor, 1e3}, {0.0, 1.0}, {0.0, 1.0}}; }

std::vector<double> GarchAuxModel::default_start(std::span<const double> data) const {
  const double level = std::max(mean_square(data), 1e-12);
  return {0.1 * level, 0.1, 0.8};
}

std::unique_ptr<AuxModel> make_aux_model(ModelTag tag, const AukfOptions& options) {
  switch (tag) {
    case ModelTag::SvSq:
      return std::make_unique<SqAukfAuxModel>(options);
    case ModelTag::StableReturnSv:
      return std::make_unique<GarchTAuxModel>();
    case ModelTag::SvStableVol:
      return std::make_unique<GarchAuxModel>();
  }
  throw std::invalid_argument("make_aux_model: unknown model tag");
}

}  // namespace ssmabc
