#include "ssmabc/kernels.hpp"
#include "ssmabc/rng.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace ssmabc;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Gil-Pelaez inversion of exp(-|t|^a (1 - i b sign(t) tan(pi a / 2))).
double stable_cdf(double x, double alpha, double skew) {
  const double k = skew * std::tan(std::numbers::pi * alpha / 2.0);
  auto integrand = [&](double t) {
    if (t == 0.0) return -x;
    const double ta = std::pow(t, alpha);
    return std::exp(-ta) * std::sin(k * ta - t * x) / t;
  };
  const double upper = std::pow(60.0, 1.0 / alpha);
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 12, 1e-12);
  return 0.5 - integral / std::numbers::pi;
}

double stable_quantile(double p, double alpha, double skew) {
  auto f = [&](double x) { return stable_cdf(x, alpha, skew) - p; };
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, -40.0, 40.0, tol, iters);
  return 0.5 * (r.first + r.second);
}

// Non-central chi-squared transition written out with Boost's Bessel function.
double cir_density_oracle(double x, double x_prev, double p1, double p2, double p3) {
  const double c = 2.0 * p2 / (p3 * p3 * (1.0 - std::exp(-p2)));
  const double u = c * x_prev * std::exp(-p2);
  const double v = c * x;
  const double q = 2.0 * p1 / (p3 * p3) - 1.0;
  return c * std::exp(-u - v) * std::pow(v / u, q / 2.0) * boost::math::cyl_bessel_i(q, 2.0 * std::sqrt(u * v));
}

}  // namespace

TEST_CASE("rng streams replay and decorrelate") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  std::vector<double> xa, xc;
  for (int i = 0; i < 100000; ++i) {
    REQUIRE(a() == b());
    xa.push_back(a.uniform() - 0.5);
    b.uniform();
    xc.push_back(c.uniform() - 0.5);
  }
  double cross = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) cross += xa[i] * xc[i];
  const double corr = cross / (static_cast<double>(xa.size()) / 12.0);
  CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(xa.size())));
}

TEST_CASE("uniform stays inside the open unit interval") {
  RngStream r(1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK_UNARY(u > 0.0);
    CHECK_UNARY(u < 1.0);
  }
}

TEST_CASE("stable parameters are validated") {
  RngStream r(3, 0);
  CHECK_THROWS_AS(sample_alpha_stable(StableParams{1.8, -1.0, 5.0, 0.0}, r), std::domain_error);
  CHECK_THROWS_AS(sample_alpha_stable(StableParams{1.0, 0.0, 0.0, 1.0}, r), std::domain_error);
  CHECK_THROWS_AS(sample_alpha_stable(StableParams{2.1, 0.0, 0.0, 1.0}, r), std::domain_error);
  CHECK_THROWS_AS(sample_alpha_stable(StableParams{1.5, 1.5, 0.0, 1.0}, r), std::domain_error);
  CHECK_NOTHROW(sample_alpha_stable(StableParams{2.0, -1.0, 0.0, 1.0}, r));
}

TEST_CASE("stable law at alpha 2 is normal with variance 2") {
  RngStream r(11, 0);
  std::vector<double> v(100000);
  for (double& x : v) x = sample_alpha_stable(StableParams{2.0, -1.0, 0.0, 1.0}, r);
  CHECK(std::abs(mean_of(v)) < 4.0 * std::sqrt(2.0 / 1e5));
  CHECK(var_of(v) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("stable 0.01 quantile matches characteristic-function inversion") {
  const double oracle = stable_quantile(0.01, 1.8, -1.0);
  RngStream r(5, 0);
  std::vector<double> v(1000000);
  for (double& x : v) x = sample_alpha_stable(StableParams{1.8, -1.0, 0.0, 1.0}, r);
  const std::size_t k = 10000;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  CHECK(v[k] == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("stable location and scale act affinely") {
  RngStream a(9, 1), b(9, 1);
  for (int i = 0; i < 100; ++i) {
    const double z = sample_alpha_stable(StableParams{1.6, 0.3, 0.0, 1.0}, a);
    const double y = sample_alpha_stable(StableParams{1.6, 0.3, 2.0, 3.0}, b);
    CHECK(y == doctest::Approx(2.0 + 3.0 * z).epsilon(1e-12));
  }
}

TEST_CASE("symmetric stable draws pass a sign test") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RngStream r(seed, 0);
    const int n = 100000;
    int positive = 0;
    for (int i = 0; i < n; ++i) positive += sample_alpha_stable(StableParams{1.5, 0.0, 0.0, 1.0}, r) > 0.0;
    const double z = (positive - 0.5 * n) / std::sqrt(0.25 * n);
    CHECK(std::abs(z) < 2.5758);
  }
}

TEST_CASE("truncated normal spec") {
  const auto s0 = TruncNormalSpec::from_lower(0.0);
  CHECK(s0.mean_lambda == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-12));
  CHECK(s0.variance == doctest::Approx(1.0 - 2.0 / std::numbers::pi).epsilon(1e-12));
  for (double c : {-3.0, -0.5, 0.0, 1.0, 4.0, 8.0, 30.0}) {
    const auto s = TruncNormalSpec::from_lower(c);
    CHECK(s.mean_lambda > c);
    CHECK(s.variance > 0.0);
    CHECK(s.variance <= 1.0);
  }
  CHECK_THROWS_AS(TruncNormalSpec::from_lower(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
}

TEST_CASE("untruncated normal has unit moments") {
  RngStream r(2, 0);
  const auto spec = TruncNormalSpec::from_lower(-std::numeric_limits<double>::infinity());
  std::vector<double> v(100000);
  for (double& x : v) x = sample_trunc_normal(spec, r);
  const double n = static_cast<double>(v.size());
  CHECK(std::abs(mean_of(v)) < 3.0 / std::sqrt(n));
  CHECK(std::abs(var_of(v) - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("half normal mean") {
  RngStream r(3, 0);
  const auto spec = TruncNormalSpec::from_lower(0.0);
  std::vector<double> v(100000);
  for (double& x : v) {
    x = sample_trunc_normal(spec, r);
    REQUIRE(x > 0.0);
  }
  CHECK(mean_of(v) == doctest::Approx(0.7978845608).epsilon(0.01));
}

TEST_CASE("tail truncation uses the inverse Mills ratio") {
  for (double c : {3.0, 7.0}) {
    RngStream r(4, static_cast<std::uint64_t>(c));
    const auto spec = TruncNormalSpec::from_lower(c);
    const double phi = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
    const double lambda = phi / (0.5 * std::erfc(c / std::numbers::sqrt2));
    std::vector<double> v(100000);
    for (double& x : v) {
      x = sample_trunc_normal(spec, r);
      REQUIRE(x > c);
    }
    CHECK(mean_of(v) == doctest::Approx(lambda).epsilon(0.02));
  }
}

TEST_CASE("log chi-squared noise moments") {
  RngStream r(6, 0);
  const LogChiSqNoise noise;
  CHECK(noise.variance == std::numbers::pi * std::numbers::pi / 2.0);
  std::vector<double> v(1000000);
  for (double& x : v) x = sample_log_chisq(noise, r);
  CHECK(std::abs(mean_of(v)) < 0.01);
  CHECK(var_of(v) == doctest::Approx(4.9348022).epsilon(0.02));

  RngStream r2(6, 1);
  double raw = 0.0;
  for (int i = 0; i < 1000000; ++i) raw += sample_log_chisq(LogChiSqNoise{0.0, noise.variance}, r2);
  CHECK(std::abs(raw / 1e6 - (-1.2704)) < 0.01);
}

TEST_CASE("zero normal draw is clamped") {
  CHECK(std::isfinite(log_chisq_from_normal(0.0)));
  CHECK(log_chisq_from_normal(0.0) == doctest::Approx(std::log(1e-300) - kLogChiSqMean));
}

TEST_CASE("CIR transition constants") {
  const auto k = CirTransitionConstants::from(SvSqParams{0.004, 0.1, 0.062});
  CHECK(k.c == doctest::Approx(546.75).epsilon(1e-4));
  CHECK(k.q == doctest::Approx(1.0811).epsilon(1e-4));
  CHECK(k.decay == doctest::Approx(std::exp(-0.1)));
}

TEST_CASE("CIR conditional mean matches quadrature of the transition density") {
  const double x0 = 0.04;
  auto f = [&](double x) { return x * cir_density_oracle(x, x0, 0.004, 0.1, 0.062); };
  const double quad_mean = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 0.3, 15, 1e-12);
  RngStream r(7, 0);
  const SvSqParams phi{0.004, 0.1, 0.062};
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) s += sample_cir_transition(x0, phi, r);
  CHECK(s / 1e5 == doctest::Approx(quad_mean).epsilon(0.01));
  CHECK(quad_mean == doctest::Approx(x0 * std::exp(-0.1) + 0.04 * (1.0 - std::exp(-0.1))).epsilon(1e-6));
}

TEST_CASE("CIR long-run moments and positivity") {
  const SvSqParams phi{0.004, 0.1, 0.062};
  RngStream r(8, 0);
  double x = sample_cir_stationary(phi, r);
  double s = 0.0, s2 = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    x = sample_cir_transition(x, phi, r);
    REQUIRE(x > 0.0);
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  CHECK(m == doctest::Approx(0.04).epsilon(0.02));
  CHECK(s2 / n - m * m == doctest::Approx(7.688e-4).epsilon(0.05));
}

TEST_CASE("CIR transition rejects bad input") {
  RngStream r(1, 0);
  CHECK_THROWS_AS(sample_cir_transition(0.0, SvSqParams{}, r), std::domain_error);
  CHECK_THROWS_AS(sample_cir_transition(-1.0, SvSqParams{}, r), std::domain_error);
  CHECK_THROWS_AS(sample_cir_transition(0.04, SvSqParams{0.001, 0.1, 0.062}, r), std::domain_error);
}

TEST_CASE("CIR stays positive near the Feller boundary") {
  const SvSqParams phi{0.5 * 0.089 * 0.089, 0.5, 0.089};
  RngStream r(12, 0);
  double x = 1e-6;
  for (int i = 0; i < 100000; ++i) {
    x = sample_cir_transition(x, phi, r);
    REQUIRE(x > 0.0);
  }
}
