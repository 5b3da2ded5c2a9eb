#include "ssmabc/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ssmabc {

std::string_view to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::SvSq:
      return "sv_sq";
    case ModelTag::StableReturnSv:
      return "stable_return_sv";
    case ModelTag::SvStableVol:
      return "sv_stable_vol";
  }
  return "unknown";
}

ModelTag model_tag_from_string(std::string_view name) {
  if (name == "sv_sq") return ModelTag::SvSq;
  if (name == "stable_return_sv") return ModelTag::StableReturnSv;
  if (name == "sv_stable_vol") return ModelTag::SvStableVol;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

namespace {

void require_length(std::size_t T, std::size_t minimum) {
  if (T < minimum) {
    throw std::invalid_argument("simulation length must be at least " + std::to_string(minimum));
  }
}

}  // namespace

SimPath simulate_sv_sq(const SvSqParams& phi, std::size_t T, RngStream& rng) {
  phi.validate();
  require_length(T, 2);
  const auto k = CirTransitionConstants::from(phi);
  SimPath path;
  path.model_tag = ModelTag::SvSq;
  path.returns.resize(T);
  path.states.resize(T);
  path.observations.resize(T);
  double x = sample_cir_stationary(phi, rng);
  const LogChiSqNoise noise;
  for (std::size_t t = 0; t < T; ++t) {
    x = sample_cir_transition(x, k, rng);
    const double eta = rng.normal();
    path.states[t] = x;
    path.returns[t] = std::sqrt(x) * eta;
    path.observations[t] = std::log(x) + log_chisq_from_normal(eta, noise);
  }
  return path;
}

SimPath simulate_stable_return_sv(const StableSvParams& phi, std::size_t T, RngStream& rng) {
  phi.validate();
  require_length(T, 2);
  const StableParams innovation{phi.phi4, -1.0, 0.0, 1.0};
  SimPath path;
  path.model_tag = ModelTag::StableReturnSv;
  path.returns.resize(T);
  path.states.resize(T);
  double log_x = phi.phi1 / (1.0 - phi.phi2);
  for (std::size_t t = 0; t < kLogVolBurnIn + T; ++t) {
    log_x = phi.phi1 + phi.phi2 * log_x + phi.phi3 * rng.normal();
    const double w = sample_alpha_stable(innovation, rng);
    if (t < kLogVolBurnIn) continue;
    const std::size_t i = t - kLogVolBurnIn;
    path.states[i] = std::exp(log_x);
    path.returns[i] = std::exp(log_x / phi.phi4) * w;
  }
  path.observations = path.returns;
  return path;
}

SimPath simulate_sv_stable_vol(const StableSvParams& phi, std::size_t T, RngStream& rng) {
  phi.validate();
  require_length(T, 2);
  const StableParams innovation{phi.phi4, -1.0, 0.0, 1.0};
  SimPath path;
  path.model_tag = ModelTag::SvStableVol;
  path.returns.resize(T);
  path.states.resize(T);
  double log_x = phi.phi1 / (1.0 - phi.phi2);
  for (std::size_t t = 0; t < kLogVolBurnIn + T; ++t) {
    log_x = phi.phi1 + phi.phi2 * log_x + phi.phi3 * sample_alpha_stable(innovation, rng);
    const double w = rng.normal();
    if (t < kLogVolBurnIn) continue;
    const std::size_t i = t - kLogVolBurnIn;
    path.states[i] = std::exp(log_x);
    path.returns[i] = std::exp(0.5 * log_x) * w;
  }
  path.observations = path.returns;
  return path;
}

SimPath simulate(ModelTag tag, std::span<const double> phi, std::size_t T, RngStream& rng) {
  switch (tag) {
    case ModelTag::SvSq:
      return simulate_sv_sq(SvSqParams::from_span(phi), T, rng);
    case ModelTag::StableReturnSv:
      return simulate_stable_return_sv(StableSvParams::from_span(phi), T, rng);
    case ModelTag::SvStableVol:
      return simulate_sv_stable_vol(StableSvParams::from_span(phi), T, rng);
  }
  throw std::invalid_argument("simulate: unknown model tag");
}

SimPath path_from_returns(ModelTag tag, std::vector<double> returns) {
  SimPath path;
  path.model_tag = tag;
  path.returns = std::move(returns);
  if (tag == ModelTag::SvSq) {
    path.observations.reserve(path.returns.size());
    for (double r : path.returns) {
      path.observations.push_back(std::log(std::max(r * r, kSquaredReturnFloor)) - kLogChiSqMean);
    }
  } else {
    path.observations = path.returns;
  }
  return path;
}

SummaryVector ar1_summary_stats(std::span<const double> returns, SummaryTransform transform) {
  const std::size_t T = returns.size();
  if (T < 3) {
    throw std::invalid_argument("ar1_summary_stats: at least 3 observations are required");
  }
  auto value = [&](std::size_t t) {
    const double r = returns[t];
    if (transform == SummaryTransform::Raw) return r;
    return std::log(std::max(r * r, kSquaredReturnFloor));
  };
  SummaryVector out;
  double prev = value(0);
  const double first = prev;
  for (std::size_t t = 1; t < T; ++t) {
    const double y = value(t);
    if (t + 1 < T) {
      out.s[0] += y;
      out.s[1] += y * y;
    }
    out.s[2] += y * prev;
    prev = y;
  }
  out.s[3] = first + prev;
  out.s[4] = first * first + prev * prev;
  return out;
}

}  // namespace ssmabc
