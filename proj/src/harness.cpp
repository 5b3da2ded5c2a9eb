#include "ssmabc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>

namespace ssmabc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + text + "'");
}

std::size_t parse_coordinate(const std::string& key, const std::string& text) {
  if (text.size() == 4 && text.rfind("phi", 0) == 0 && text[3] >= '1' && text[3] <= '4') {
    return static_cast<std::size_t>(text[3] - '1');
  }
  throw ConfigError("config: '" + key + "' expects phi1..phi4, got '" + text + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& value, F parse_one) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_one(key, item));
  if (out.empty()) throw ConfigError("config: '" + key + "' must not be empty");
  return out;
}

}  // namespace

std::vector<double> default_true_phi(ModelTag model) {
  switch (model) {
    case ModelTag::SvSq:
      return {0.004, 0.1, 0.062};
    case ModelTag::StableReturnSv:
      return {0.0, 0.9, 0.36, 1.8};
    case ModelTag::SvStableVol:
      return {0.0, 0.9, 0.06, 1.8};
  }
  return {};
}

std::size_t ExperimentConfig::draws_for(std::size_t T) const {
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] == T) return n_draws.size() == 1 ? n_draws[0] : n_draws.at(i);
  }
  throw ConfigError("config: sample size " + std::to_string(T) + " is not configured");
}

std::size_t ExperimentConfig::retained_for(std::size_t T) const {
  return n_retained ? *n_retained : retained_count(quantile, draws_for(T));
}

void ExperimentConfig::validate() const {
  const std::size_t dim = model == ModelTag::SvSq ? 3 : 4;
  if (true_phi.size() != dim) throw ConfigError("config: model.true_phi needs " + std::to_string(dim) + " values");
  if (unknown.empty()) throw ConfigError("config: model.unknown must name at least one coordinate");
  for (std::size_t j : unknown) {
    if (j >= dim) throw ConfigError("config: model.unknown names a coordinate the model does not have");
  }
  if (sample_sizes.empty()) throw ConfigError("config: data.T must list at least one sample size");
  for (std::size_t T : sample_sizes) {
    if (T < 3) throw ConfigError("config: data.T values must be at least 3");
  }
  if (n_draws.size() != 1 && n_draws.size() != sample_sizes.size()) {
    throw ConfigError("config: abc.n_draws needs one value or one per sample size");
  }
  if (!(quantile > 0.0 && quantile <= 0.1)) throw ConfigError("config: abc.quantile must lie in (0, 0.1]");
  for (std::size_t T : sample_sizes) {
    const std::size_t N = draws_for(T);
    if (N < 100) throw ConfigError("config: abc.n_draws must be at least 100");
    const std::size_t k = retained_for(T);
    if (k < 50) throw ConfigError("config: fewer than 50 retained draws (quantile * n_draws < 50)");
    if (k > N) throw ConfigError("config: abc.n_retained exceeds abc.n_draws");
  }
  if (criteria.empty()) throw ConfigError("config: abc.criteria must not be empty");
  if (n_runs == 0) throw ConfigError("config: experiment.n_runs must be positive");
  if (!metric_rmse && !metric_mass) throw ConfigError("config: experiment.metrics must include rmse or mass");
  if (metric_rmse && model != ModelTag::SvSq) {
    throw ConfigError("config: rmse needs the exact posterior, available for sv_sq only");
  }
  if (metric_mass) {
    for (std::size_t j : unknown) {
      if (!intervals.count(j)) {
        throw ConfigError("config: interval." + std::string("phi") + std::to_string(j + 1) + " is required for mass");
      }
    }
  }
  for (const auto& [j, iv] : intervals) {
    if (!(iv.lo < iv.hi)) throw ConfigError("config: interval bounds must satisfy lo < hi");
  }
  if (state_nodes < 2 || param_nodes < 2 || kde_nodes < 2) throw ConfigError("config: grid sizes must be at least 2");
  const BoxPrior prior = BoxPrior::standard(model, true_phi, unknown);
  (void)prior;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  bool have_phi = false;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "experiment.name") {
        cfg.name = value;
      } else if (key == "experiment.n_runs") {
        cfg.n_runs = parse_unsigned(key, value);
      } else if (key == "experiment.master_seed") {
        cfg.master_seed = parse_unsigned(key, value);
      } else if (key == "experiment.metrics") {
        cfg.metric_rmse = cfg.metric_mass = false;
        for (const auto& m : split_list(value)) {
          if (m == "rmse") {
            cfg.metric_rmse = true;
          } else if (m == "mass") {
            cfg.metric_mass = true;
          } else {
            throw ConfigError("config: unknown metric '" + m + "'");
          }
        }
      } else if (key == "model.tag") {
        cfg.model = model_tag_from_string(value);
      } else if (key == "model.true_phi") {
        cfg.true_phi = parse_list<double>(key, value, parse_double);
        have_phi = true;
      } else if (key == "model.unknown") {
        cfg.unknown = parse_list<std::size_t>(key, value, parse_coordinate);
      } else if (key == "data.T") {
        cfg.sample_sizes = parse_list<std::size_t>(key, value, parse_unsigned);
      } else if (key == "abc.n_draws") {
        cfg.n_draws = parse_list<std::size_t>(key, value, parse_unsigned);
      } else if (key == "abc.quantile") {
        cfg.quantile = parse_double(key, value);
      } else if (key == "abc.n_retained") {
        cfg.n_retained = parse_unsigned(key, value);
      } else if (key == "abc.criteria") {
        cfg.criteria.clear();
        for (const auto& c : split_list(value)) cfg.criteria.push_back(criterion_kind_from_string(c));
      } else if (key == "aukf.noise_center") {
        cfg.aukf.noise_center = noise_center_from_string(value);
      } else if (key == "oracle.state_nodes") {
        cfg.state_nodes = parse_unsigned(key, value);
      } else if (key == "oracle.param_nodes") {
        cfg.param_nodes = parse_unsigned(key, value);
      } else if (key == "kde.nodes") {
        cfg.kde_nodes = parse_unsigned(key, value);
      } else if (key.rfind("interval.", 0) == 0) {
        const std::size_t j = parse_coordinate(key, key.substr(9));
        const auto v = parse_list<double>(key, value, parse_double);
        if (v.size() != 2) throw ConfigError("config: '" + key + "' expects 'lo, hi'");
        cfg.intervals[j] = {v[0], v[1]};
      } else if (key == "profile") {
        if (value != "desk" && value != "paper") throw ConfigError("config: profile must be desk or paper");
        cfg.profile = value;
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_phi) cfg.true_phi = default_true_phi(cfg.model);
  if (cfg.profile == "paper") {
    for (auto& n : cfg.n_draws) n *= 5;
    if (cfg.n_retained) *cfg.n_retained *= 5;
    cfg.n_runs = 50;
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string reported_label(ModelTag model, std::size_t coordinate) {
  if (model == ModelTag::SvSq && coordinate == 1) return "1-phi2";
  return "phi" + std::to_string(coordinate + 1);
}

double to_reported(ModelTag model, std::size_t coordinate, double value) {
  return model == ModelTag::SvSq && coordinate == 1 ? 1.0 - value : value;
}

GridDensity as_density(const KdeEstimate& est) { return {est.grid, est.ordinates}; }

GridDensity as_density(const PosteriorGrid& post, ModelTag model, std::size_t coordinate) {
  GridDensity d;
  const std::size_t n = post.param_nodes.size();
  const bool flip = model == ModelTag::SvSq && coordinate == 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = flip ? n - 1 - i : i;
    d.grid.push_back(to_reported(model, coordinate, post.param_nodes[k]));
    d.ordinates.push_back(post.density[k]);
  }
  return d;
}

double interpolate(const GridDensity& d, double x) {
  const auto& g = d.grid;
  if (g.empty() || x < g.front() || x > g.back()) return 0.0;
  auto it = std::upper_bound(g.begin(), g.end(), x);
  if (it == g.end()) return d.ordinates.back();
  const std::size_t i = static_cast<std::size_t>(it - g.begin());
  if (i == 0) return d.ordinates.front();
  const double w = (x - g[i - 1]) / (g[i] - g[i - 1]);
  return (1.0 - w) * d.ordinates[i - 1] + w * d.ordinates[i];
}

double rmse(const KdeEstimate& est, const GridDensity& exact) {
  if (est.grid.empty() || exact.grid.empty()) throw std::invalid_argument("rmse: empty density");
  if (est.grid.back() < exact.grid.front() || est.grid.front() > exact.grid.back()) {
    throw ConfigError("rmse: estimate and exact posterior have disjoint supports");
  }
  double s = 0.0;
  for (std::size_t g = 0; g < est.grid.size(); ++g) {
    const double d = est.ordinates[g] - interpolate(exact, est.grid[g]);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(est.grid.size()));
}

double interval_mass(const GridDensity& d, double lo, double hi, bool* outside) {
  if (!(lo < hi)) throw std::invalid_argument("interval_mass: requires lo < hi");
  const auto& g = d.grid;
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("interval_mass: empty density");
  if (outside) *outside = lo < g.front() || hi > g.back();
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i == 0 ? g[0] : 0.5 * (g[i - 1] + g[i]);
    const double b = i + 1 == n ? g[n - 1] : 0.5 * (g[i] + g[i + 1]);
    const double overlap = std::min(b, hi) - std::max(a, lo);
    if (overlap > 0.0) mass += d.ordinates[i] * overlap;
  }
  return std::clamp(mass, 0.0, 1.0);
}

double density_quantile(const GridDensity& d, double p) {
  const std::size_t n = d.grid.size();
  std::vector<double> cdf(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (d.grid[i] - d.grid[i - 1]) * (d.ordinates[i] + d.ordinates[i - 1]);
  }
  const double target = p * cdf.back();
  auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.begin()) return d.grid.front();
  if (it == cdf.end()) return d.grid.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
  const double span = cdf[i] - cdf[i - 1];
  const double w = span > 0.0 ? (target - cdf[i - 1]) / span : 0.0;
  return d.grid[i - 1] + w * (d.grid[i] - d.grid[i - 1]);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return x;
}

double order_free_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

const ReportRow* AccuracyReport::find(std::string_view criterion, std::string_view param, std::size_t T,
                                      std::string_view metric) const {
  for (const auto& r : rows) {
    if (r.criterion == criterion && r.param == param && r.T == T && r.metric == metric) return &r;
  }
  return nullptr;
}

namespace {

struct RunKey {
  std::size_t criterion;
  std::size_t coordinate;
  std::size_t T;
  bool operator<(const RunKey& o) const {
    return std::tie(T, criterion, coordinate) < std::tie(o.T, o.criterion, o.coordinate);
  }
};

struct KdeSpan {
  double lo;
  double hi;
};

KdeSpan padded_range(const std::vector<double>& values, double h) {
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  return {*mn - 4.0 * h, *mx + 4.0 * h};
}

double trapezoid_mass(const KdeEstimate& est) { return trapezoid(est.grid, est.ordinates); }

double density_mean(const GridDensity& d) {
  std::vector<double> xp(d.grid.size());
  for (std::size_t i = 0; i < xp.size(); ++i) xp[i] = d.grid[i] * d.ordinates[i];
  return trapezoid(d.grid, xp) / trapezoid(d.grid, d.ordinates);
}

void log_moments(std::ostream& log, const std::string& what, std::span<const double> values) {
  double mean = 0.0, ss = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  for (double v : values) ss += (v - mean) * (v - mean);
  log << what << " mean " << mean << " sd " << std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

AccuracyReport run_experiment(const ExperimentConfig& config, std::size_t threads, std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const BoxPrior prior = BoxPrior::standard(config.model, config.true_phi, config.unknown);
  std::map<RunKey, std::vector<double>> rmse_runs, mass_runs;
  AccuracyReport report;
  report.n_runs = config.n_runs;
  report.kde_mass_min = std::numeric_limits<double>::infinity();
  report.kde_mass_max = -std::numeric_limits<double>::infinity();

  for (std::size_t r = 0; r < config.n_runs; ++r) {
    const std::uint64_t seed = config.master_seed + r;
    for (std::size_t T : config.sample_sizes) {
      try {
        RngStream obs_rng(seed, observed_stream(T));
        SimPath observed = simulate(config.model, config.true_phi, T, obs_rng);
        const auto ctx = ObservedContext::build(config.model, observed, config.unknown, config.aukf);
        std::vector<std::unique_ptr<Criterion>> owned;
        std::vector<const Criterion*> criteria;
        for (CriterionKind kind : config.criteria) {
          owned.push_back(make_criterion(kind, ctx));
          criteria.push_back(owned.back().get());
        }
        const std::size_t N = config.draws_for(T);
        const AbcPool pool = simulate_pool(prior, T, N, seed, criteria, threads);

        std::map<std::size_t, GridDensity> exact;
        if (config.metric_rmse) {
          ExactPosteriorOptions opt;
          opt.param_nodes = config.param_nodes;
          opt.state_nodes = config.state_nodes;
          opt.threads = threads;
          const SvSqParams fixed = SvSqParams::from_span(config.true_phi);
          for (std::size_t j : config.unknown) {
            const PosteriorGrid post = exact_posterior(observed.observations, j, fixed, SvSqPrior{}, opt);
            exact[j] = as_density(post, config.model, j);
          }
        }

        for (std::size_t c = 0; c < criteria.size(); ++c) {
          const auto dist = criteria[c]->distances(pool.summaries[c], pool.phis);
          for (std::size_t k = 0; k < config.unknown.size(); ++k) {
            const std::size_t j = config.unknown[k];
            const RetainedSet kept = retain(pool.phis, pool.summaries[c], dist.at(criteria[c]->channel_for(k)),
                                            config.quantile, seed, config.n_retained);
            std::vector<double> values;
            for (const auto& d : kept.draws) values.push_back(to_reported(config.model, j, d.phi[j]));
            const double h = silverman_bandwidth(values);
            const KdeSpan span = padded_range(values, h);
            if (config.metric_rmse) {
              const GridDensity& ex = exact.at(j);
              const double lo = std::min(span.lo, density_quantile(ex, 0.001));
              const double hi = std::max(span.hi, density_quantile(ex, 0.999));
              const KdeEstimate est = kde(values, linspace(lo, hi, config.kde_nodes));
              const double m = trapezoid_mass(est);
              report.kde_mass_min = std::min(report.kde_mass_min, m);
              report.kde_mass_max = std::max(report.kde_mass_max, m);
              rmse_runs[{c, j, T}].push_back(rmse(est, ex));
              if (log) {
                log_moments(*log, "  " + criteria[c]->name() + " " + reported_label(config.model, j), values);
                *log << " exact mean " << density_mean(ex) << " rmse " << rmse_runs[{c, j, T}].back() << '\n';
              }
            }
            if (config.metric_mass) {
              const Interval iv = config.intervals.at(j);
              const KdeEstimate est =
                  kde(values, linspace(std::min(span.lo, iv.lo), std::max(span.hi, iv.hi), config.kde_nodes));
              const double m = trapezoid_mass(est);
              report.kde_mass_min = std::min(report.kde_mass_min, m);
              report.kde_mass_max = std::max(report.kde_mass_max, m);
              mass_runs[{c, j, T}].push_back(interval_mass(as_density(est), iv.lo, iv.hi));
            }
          }
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ExperimentError("run " + std::to_string(r) + " (T=" + std::to_string(T) + ") failed: " + e.what(), r);
      }
      if (log) *log << config.name << ": run " << r + 1 << "/" << config.n_runs << " T=" << T << " done\n";
    }
  }

  auto label = [&](const RunKey& k) { return reported_label(config.model, k.coordinate); };
  auto crit = [&](const RunKey& k) { return std::string(to_string(config.criteria[k.criterion])); };
  for (const auto& [key, values] : rmse_runs) {
    report.rows.push_back({crit(key), label(key), key.T, "rmse", order_free_mean(values), config.n_runs, values});
  }
  // Ratios to the integrated score when present, otherwise to the score criterion.
  std::optional<std::size_t> baseline;
  for (std::size_t c = 0; c < config.criteria.size(); ++c) {
    if (config.criteria[c] == CriterionKind::IntScore) baseline = c;
  }
  for (std::size_t c = 0; c < config.criteria.size() && !baseline; ++c) {
    if (config.criteria[c] == CriterionKind::Score) baseline = c;
  }
  if (baseline) {
    for (const auto& [key, values] : rmse_runs) {
      const double base = order_free_mean(rmse_runs.at({*baseline, key.coordinate, key.T}));
      const double ratio = base > 0.0 ? order_free_mean(values) / base : std::numeric_limits<double>::quiet_NaN();
      report.rows.push_back({crit(key), label(key), key.T, "rmse_ratio", ratio, config.n_runs, {}});
    }
  }
  for (const auto& [key, values] : mass_runs) {
    report.rows.push_back({crit(key), label(key), key.T, "interval_mass", order_free_mean(values), config.n_runs,
                           values});
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_report_csv(std::ostream& os, const AccuracyReport& report) {
  os << "criterion,param,T,metric,value,n_runs\n";
  for (const auto& r : report.rows) {
    os << r.criterion << ',' << r.param << ',' << r.T << ',' << r.metric << ',' << std::setprecision(10) << r.value
       << ',' << r.n_runs << '\n';
  }
}

}  // namespace ssmabc
