#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace ssmabc {

/// Where the measurement-noise sigma row is centred.
enum class NoiseCenter { AppendixC, Zero };

inline constexpr double kAppendixCNoiseCenter = -1.27;
inline constexpr double kSigmaPointSpread = 1.7320508075688772;  // sqrt(3)
inline constexpr double kStateFloor = 1e-10;
/// Scale of the smooth truncation applied to sigma points of the positive state.
inline constexpr double kStateSoftScale = 1e-4;

/// eps ln(1 + e^{x/eps}), floored at kStateFloor: a smooth positive version of x.
inline double soft_positive(double x, double eps = kStateSoftScale) {
  const double z = x / eps;
  const double v = z > 30.0 ? x : eps * std::log1p(std::exp(z));
  return v > kStateFloor ? v : kStateFloor;
}

NoiseCenter noise_center_from_string(std::string_view name);
std::string_view to_string(NoiseCenter center);

struct AukfOptions {
  NoiseCenter noise_center = NoiseCenter::AppendixC;
  /// Outer weights are 1/(2 spread^2); the centre takes the remainder.
  double spread = kSigmaPointSpread;
  /// Permutation of the six outer columns (+x, +v, +e, -x, -v, -e).
  std::array<int, 6> outer_order{0, 1, 2, 3, 4, 5};
};

/**
 * @brief Augmented sigma points: row 0 state, row 1 state noise, row 2
 * measurement noise. Column 0 is the centre.
 */
struct SigmaPointMatrix {
  std::array<std::array<double, 7>, 3> points{};
  std::array<double, 7> weights{};

  static SigmaPointMatrix build(const std::array<double, 3>& mean, const std::array<double, 3>& variance,
                                const AukfOptions& options);

  double row_mean(std::size_t row) const;
};

/// Moments recorded at each filter step.
struct AukfStep {
  double state_pred_mean = 0.0;
  double state_pred_var = 0.0;
  double obs_pred_mean = 0.0;
  double obs_pred_var = 0.0;
  double state_filt_mean = 0.0;
  double state_filt_var = 0.0;
};

/**
 * @brief Augmented unscented Kalman filter log-likelihood.
 *
 * `Model` supplies transition(x, v), measurement(x, e), the noise moments
 * (state_noise_mean/var, obs_noise_mean/var) and the initial state moments
 * (init_mean/init_var). Returns the sum over t >= 2 of the Gaussian log
 * density of y_t given y_1..y_{t-1}, or -inf when the recursion breaks down.
 */
template <class Model>
double aukf_run(std::span<const double> y, const Model& model, const AukfOptions& options,
                std::vector<AukfStep>* trace = nullptr) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  constexpr double kLog2Pi = 1.8378770664093453;
  const double s = options.spread;
  const double w = 1.0 / (2.0 * s * s);
  const double w0 = 1.0 - 6.0 * w;
  const bool use_center = w0 != 0.0;
  const double sv = s * std::sqrt(model.state_noise_var);
  const double se = s * std::sqrt(model.obs_noise_var);
  const double vc = model.state_noise_mean;
  const double ec = model.obs_noise_mean;

  // Outer columns in canonical order: +x, +v, +e, -x, -v, -e.
  std::array<double, 6> dx{}, dv{}, de{};
  auto fill = [&](double sx) {
    const std::array<double, 6> cx{sx, 0.0, 0.0, -sx, 0.0, 0.0};
    const std::array<double, 6> cv{0.0, sv, 0.0, 0.0, -sv, 0.0};
    const std::array<double, 6> ce{0.0, 0.0, se, 0.0, 0.0, -se};
    for (int i = 0; i < 6; ++i) {
      const int k = options.outer_order[static_cast<std::size_t>(i)];
      dx[static_cast<std::size_t>(i)] = cx[static_cast<std::size_t>(k)];
      dv[static_cast<std::size_t>(i)] = cv[static_cast<std::size_t>(k)];
      de[static_cast<std::size_t>(i)] = ce[static_cast<std::size_t>(k)];
    }
  };

  double m = model.init_mean;
  double P = model.init_var;
  double loglik = 0.0;
  if (trace) trace->clear();

  for (std::size_t t = 0; t < y.size(); ++t) {
    // Prediction: sigma points from the filtered moments through k.
    fill(s * std::sqrt(P));
    std::array<double, 6> kx{};
    const double k0 = use_center ? model.transition(m, vc) : 0.0;
    double xp = w0 * k0;
    for (std::size_t i = 0; i < 6; ++i) {
      kx[i] = model.transition(m + dx[i], vc + dv[i]);
      xp += w * kx[i];
    }
    double Pp = use_center ? w0 * (k0 - xp) * (k0 - xp) : 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const double d = kx[i] - xp;
      Pp += w * d * d;
    }

    // Measurement: fresh sigma points from the predicted moments through h.
    fill(s * std::sqrt(Pp));
    std::array<double, 6> hy{};
    const double h0 = use_center ? model.measurement(xp, ec) : 0.0;
    double yp = w0 * h0;
    for (std::size_t i = 0; i < 6; ++i) {
      hy[i] = model.measurement(xp + dx[i], ec + de[i]);
      yp += w * hy[i];
    }
    double Py = use_center ? w0 * (h0 - yp) * (h0 - yp) : 0.0;
    double Cxy = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const double d = hy[i] - yp;
      Py += w * d * d;
      Cxy += w * dx[i] * d;
    }
    if (!(Py > 0.0) || !std::isfinite(Py) || !std::isfinite(yp)) return kNegInf;

    const double zeta = y[t] - yp;
    if (t >= 1) loglik += -0.5 * (kLog2Pi + std::log(Py) + zeta * zeta / Py);

    const double gain = Cxy / Py;
    m = xp + gain * zeta;
    P = std::max(Pp - gain * gain * Py, 0.0);
    if (trace) trace->push_back({xp, Pp, yp, Py, m, P});
  }
  return std::isfinite(loglik) ? loglik : kNegInf;
}

/**
 * @brief The discretised square-root auxiliary model
 * x_t = b1 + b2 x_{t-1} + b3 sqrt(x_{t-1}) e_t (e_t truncated normal),
 * y_t = ln x_t + eps_t.
 */
struct SqAukfModel {
  double b1, b2, b3;
  double lower;  // truncation point -b1/b3 of the state noise
  double state_noise_mean, state_noise_var;
  double obs_noise_mean, obs_noise_var;
  double init_mean, init_var;

  static SqAukfModel from(double b1, double b2, double b3, NoiseCenter center);

  double transition(double x, double v) const {
    const double xs = soft_positive(x);
    const double vs = v > lower ? v : lower;
    return b1 + b2 * xs + b3 * std::sqrt(xs) * vs;
  }
  double measurement(double x, double e) const { return std::log(soft_positive(x)) + e; }
};

/// Linear-Gaussian model x_t = a + b x_{t-1} + q v_t, y_t = c + d x_t + e_t; exact under the AUKF.
struct AffineAukfModel {
  double a, b, q, c, d;
  double state_noise_mean = 0.0, state_noise_var = 1.0;
  double obs_noise_mean = 0.0, obs_noise_var = 1.0;
  double init_mean = 0.0, init_var = 1.0;

  double transition(double x, double v) const { return a + b * x + q * v; }
  double measurement(double x, double e) const { return c + d * x + e; }
};

}  // namespace ssmabc
