#include "ssmabc/integrated.hpp"

#include "ssmabc/fit.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace ssmabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <unsigned N>
GaussLegendreRule expand_rule() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  GaussLegendreRule rule;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w[i]);
    } else {
      rule.nodes.push_back(-x[i]);
      rule.weights.push_back(w[i]);
      rule.nodes.push_back(x[i]);
      rule.weights.push_back(w[i]);
    }
  }
  return rule;
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct Accumulated {
  double log_integral = kNegInf;
  double area = 0.0;
};

class SliceIntegrator {
 public:
  SliceIntegrator(const AuxModel& model, std::span<const double> data, const IntegrationSpec& spec,
                  std::vector<std::size_t> order, const GaussLegendreRule& rule)
      : model_(model), data_(data), spec_(spec), order_(std::move(order)), rule_(rule) {}

  Accumulated run(std::vector<double>& beta, bool* known) const { return level(0, beta, known); }

 private:
  Accumulated level(std::size_t depth, std::vector<double>& beta, bool* known) const {
    if (depth == order_.size()) {
      const double v = model_.feasible(beta) ? model_.loglik(data_, beta) : kNegInf;
      return {std::isnan(v) ? kNegInf : v, 1.0};
    }
    const std::size_t k = order_[depth];
    const Interval range =
        model_.conditional_range(beta, std::span<const bool>(known, beta.size()), k, spec_.box[k]);
    Accumulated out;
    if (!(range.hi >= range.lo)) return out;
    known[k] = true;
    if (range.hi == range.lo) {
      beta[k] = range.lo;
      out = level(depth + 1, beta, known);
    } else {
      const double half = 0.5 * range.width();
      const double mid = 0.5 * (range.lo + range.hi);
      for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
        beta[k] = mid + half * rule_.nodes[i];
        const auto sub = level(depth + 1, beta, known);
        const double w = half * rule_.weights[i];
        out.area += w * sub.area;
        if (sub.log_integral != kNegInf) out.log_integral = log_add(out.log_integral, std::log(w) + sub.log_integral);
      }
    }
    known[k] = false;
    return out;
  }

  const AuxModel& model_;
  std::span<const double> data_;
  const IntegrationSpec& spec_;
  std::vector<std::size_t> order_;
  const GaussLegendreRule& rule_;
};

}  // namespace

GaussLegendreRule GaussLegendreRule::make(std::size_t n) {
  switch (n) {
    case 7:
      return expand_rule<7>();
    case 10:
      return expand_rule<10>();
    case 15:
      return expand_rule<15>();
    case 20:
      return expand_rule<20>();
    case 25:
      return expand_rule<25>();
    case 30:
      return expand_rule<30>();
    default:
      throw std::invalid_argument("GaussLegendreRule: unsupported node count " + std::to_string(n));
  }
}

double integrated_loglik(const AuxModel& model, std::span<const double> data, double beta_j, std::size_t j,
                         const IntegrationSpec& spec) {
  const std::size_t d = model.dim();
  if (j >= d) throw std::invalid_argument("integrated_loglik: coordinate index out of range");
  if (spec.box.size() != d) throw std::invalid_argument("integrated_loglik: box dimension mismatch");
  const auto rule = GaussLegendreRule::make(spec.nodes);
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < d; ++k)
    if (k != j) order.push_back(k);
  std::vector<double> beta(d);
  for (std::size_t k = 0; k < d; ++k) beta[k] = spec.box[k].lo;
  beta[j] = beta_j;
  auto known = std::make_unique<bool[]>(d);
  known[j] = true;
  const SliceIntegrator integrator(model, data, spec, order, rule);
  const auto acc = integrator.run(beta, known.get());
  if (!(acc.area > 0.0) || acc.log_integral == kNegInf) return kNegInf;
  return acc.log_integral - std::log(acc.area);
}

OptimizeResult fit_integrated(const AuxModel& model, std::span<const double> data, std::size_t j,
                              const IntegrationSpec& spec) {
  if (j >= spec.box.size()) throw std::invalid_argument("fit_integrated: coordinate index out of range");
  return brent_maximize([&](double b) { return integrated_loglik(model, data, b, j, spec); }, spec.box[j].lo,
                        spec.box[j].hi, 30);
}

double integrated_score(const AuxModel& model, std::span<const double> data, double beta_j_hat, std::size_t j,
                        const IntegrationSpec& spec, bool* one_sided) {
  const double T = static_cast<double>(data.size());
  const double h = score_step(beta_j_hat);
  const double lo = spec.box.at(j).lo, hi = spec.box.at(j).hi;
  const bool up = beta_j_hat + h <= hi;
  const bool down = beta_j_hat - h >= lo;
  if (up && down) {
    return (integrated_loglik(model, data, beta_j_hat + h, j, spec) -
            integrated_loglik(model, data, beta_j_hat - h, j, spec)) /
           (2.0 * h * T);
  }
  if (one_sided) *one_sided = true;
  const double f0 = integrated_loglik(model, data, beta_j_hat, j, spec);
  if (up) return (integrated_loglik(model, data, beta_j_hat + h, j, spec) - f0) / (h * T);
  return (f0 - integrated_loglik(model, data, beta_j_hat - h, j, spec)) / (h * T);
}

}  // namespace ssmabc
