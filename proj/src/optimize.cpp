#include "ssmabc/optimize.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ssmabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void project(std::vector<double>& x, std::span<const Interval> box) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box[i].lo, box[i].hi);
}

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

class Counter {
 public:
  Counter(const Objective& f, std::size_t budget) : f_(f), budget_(budget) {}

  double operator()(const std::vector<double>& x) {
    ++used_;
    const double v = f_(x);
    return std::isnan(v) ? kNegInf : v;
  }
  bool exhausted() const { return used_ >= budget_; }
  std::size_t used() const { return used_; }

 private:
  const Objective& f_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

Simplex initial_simplex(const std::vector<double>& start, std::span<const Interval> box, double step, Counter& eval) {
  const std::size_t n = start.size();
  Simplex s;
  s.points.push_back(start);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p = start;
    const double width = box[i].width();
    double h = start[i] != 0.0 ? step * std::abs(start[i]) : 0.00025;
    if (std::isfinite(width) && width > 0.0) h = std::min(h, 0.25 * width);
    p[i] = start[i] + h;
    if (p[i] > box[i].hi) p[i] = start[i] - h;
    project(p, box);
    s.points.push_back(std::move(p));
  }
  for (const auto& p : s.points) s.values.push_back(eval(p));
  return s;
}

bool converged(const Simplex& s, const NelderMeadOptions& options) {
  const double best = s.values.front();
  const double worst = s.values.back();
  if (!std::isfinite(best) || !std::isfinite(worst)) return false;
  if (best - worst > options.f_tol * (1.0 + std::abs(best))) return false;
  const auto& xb = s.points.front();
  for (std::size_t k = 1; k < s.points.size(); ++k) {
    for (std::size_t i = 0; i < xb.size(); ++i) {
      if (std::abs(s.points[k][i] - xb[i]) > options.x_tol * std::max(std::abs(xb[i]), 1e-4)) return false;
    }
  }
  return true;
}

void sort_simplex(Simplex& s) {
  std::vector<std::size_t> idx(s.values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.values[a] > s.values[b]; });
  Simplex out;
  for (auto i : idx) {
    out.points.push_back(std::move(s.points[i]));
    out.values.push_back(s.values[i]);
  }
  s = std::move(out);
}

bool run_simplex(Simplex& s, std::span<const Interval> box, const NelderMeadOptions& options, Counter& eval) {
  const std::size_t n = s.points.front().size();
  auto combine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = c[i] + t * (w[i] - c[i]);
    project(p, box);
    return p;
  };
  for (;;) {
    sort_simplex(s);
    if (converged(s, options)) return true;
    if (eval.exhausted()) return false;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s.points[k][i] / static_cast<double>(n);

    const auto& worst = s.points.back();
    const double f_worst = s.values.back();
    const double f_second = s.values[n - 1];
    const double f_best = s.values.front();

    auto xr = combine(centroid, worst, -1.0);
    const double fr = eval(xr);
    if (fr > f_best) {
      auto xe = combine(centroid, worst, -2.0);
      const double fe = eval(xe);
      if (fe > fr) {
        s.points.back() = std::move(xe);
        s.values.back() = fe;
      } else {
        s.points.back() = std::move(xr);
        s.values.back() = fr;
      }
      continue;
    }
    if (fr > f_second) {
      s.points.back() = std::move(xr);
      s.values.back() = fr;
      continue;
    }
    const bool outside = fr > f_worst;
    auto xc = outside ? combine(centroid, worst, -0.5) : combine(centroid, worst, 0.5);
    const double fc = eval(xc);
    if (fc > (outside ? fr : f_worst)) {
      s.points.back() = std::move(xc);
      s.values.back() = fc;
      continue;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      s.points[k] = combine(s.points.front(), s.points[k], 0.5);
      s.values[k] = eval(s.points[k]);
    }
  }
}

}  // namespace

OptimizeResult nelder_mead_maximize(const Objective& f, std::span<const double> start, std::span<const Interval> box,
                                    const NelderMeadOptions& options) {
  if (start.empty() || start.size() != box.size()) {
    throw std::invalid_argument("nelder_mead_maximize: start and box dimensions differ");
  }
  Counter eval(f, options.max_evaluations);
  std::vector<double> x0(start.begin(), start.end());
  project(x0, box);
  OptimizeResult result;
  bool ok = false;
  for (int round = 0; round <= options.restarts; ++round) {
    Simplex s = initial_simplex(x0, box, options.initial_step, eval);
    ok = run_simplex(s, box, options, eval);
    sort_simplex(s);
    if (round == 0 || s.values.front() >= result.value) {
      result.x = s.points.front();
      result.value = s.values.front();
    }
    x0 = result.x;
    if (eval.exhausted()) break;
  }
  result.converged = ok && std::isfinite(result.value);
  result.evaluations = eval.used();
  return result;
}

OptimizeResult brent_maximize(const std::function<double(double)>& f, double lo, double hi, int bits,
                              std::size_t max_evaluations) {
  if (!(lo < hi)) throw std::invalid_argument("brent_maximize: empty interval");
  std::uintmax_t iters = max_evaluations;
  std::size_t used = 0;
  auto neg = [&](double x) {
    ++used;
    const double v = f(x);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
  };
  const auto [x, fx] = boost::math::tools::brent_find_minima(neg, lo, hi, bits, iters);
  OptimizeResult result;
  result.x = {x};
  result.value = fx == std::numeric_limits<double>::max() ? kNegInf : -fx;
  result.converged = iters < max_evaluations && std::isfinite(result.value);
  result.evaluations = used;
  return result;
}

}  // namespace ssmabc
