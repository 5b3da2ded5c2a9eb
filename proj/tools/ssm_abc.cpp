// Command-line front end: simulate, fit-aux, abc-run, oracle-posterior, experiment, report.

#include "ssmabc/abc.hpp"
#include "ssmabc/aux_models.hpp"
#include "ssmabc/dgp.hpp"
#include "ssmabc/exact_oracle.hpp"
#include "ssmabc/fit.hpp"
#include "ssmabc/harness.hpp"
#include "ssmabc/parallel.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace ssmabc;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = ".";
  std::size_t threads = 0;
};

// Parameters of the data-generating side shared by several subcommands.
struct DataArgs {
  std::string model;
  std::vector<double> phi;
  std::size_t T = 0;
};

std::size_t resolve_threads(const Common& c) {
  if (c.threads > 0) return c.threads;
  if (const char* env = std::getenv("SSM_ABC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("SSM_ABC_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

std::ofstream open_output(const std::string& dir, const std::string& file) {
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / file;
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  return os;
}

// Config file first, then explicit flags on top.
ExperimentConfig base_config(const Common& c, const DataArgs& d) {
  ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    cfg = ExperimentConfig::load(c.config_path);
  } else if (!d.model.empty()) {
    cfg.model = model_tag_from_string(d.model);
    cfg.true_phi = default_true_phi(cfg.model);
  } else {
    cfg.true_phi = default_true_phi(cfg.model);
  }
  if (!d.model.empty()) {
    const ModelTag tag = model_tag_from_string(d.model);
    if (tag != cfg.model) cfg.true_phi = default_true_phi(tag);
    cfg.model = tag;
  }
  if (!d.phi.empty()) cfg.true_phi = d.phi;
  if (d.T > 0) cfg.sample_sizes = {d.T};
  if (c.seed_given) cfg.master_seed = c.seed;
  return cfg;
}

SimPath read_returns_csv(const std::string& path, ModelTag tag) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<double> r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string t, value;
    std::getline(ss, t, ',');
    std::getline(ss, value, ',');
    try {
      r.push_back(std::stod(value));
    } catch (const std::exception&) {
      throw ConfigError("bad return value in '" + path + "': " + line);
    }
  }
  return path_from_returns(tag, std::move(r));
}

SimPath observed_data(const ExperimentConfig& cfg, const std::string& data_file) {
  if (!data_file.empty()) return read_returns_csv(data_file, cfg.model);
  RngStream rng(cfg.master_seed, observed_stream(cfg.sample_sizes.front()));
  return simulate(cfg.model, cfg.true_phi, cfg.sample_sizes.front(), rng);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Configuration file (key = value)");
  sub->add_option_function<std::uint64_t>(
      "--seed",
      [&c](const std::uint64_t& s) {
        c.seed = s;
        c.seed_given = true;
      },
      "Master seed");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (overrides SSM_ABC_THREADS)");
}

void add_data(CLI::App* sub, DataArgs& d) {
  sub->add_option("--model", d.model, "sv_sq | stable_return_sv | sv_stable_vol");
  sub->add_option("--phi", d.phi, "True parameters")->delimiter(',');
  sub->add_option("--T", d.T, "Sample size");
}

int cmd_simulate(const Common& c, const DataArgs& d) {
  const ExperimentConfig cfg = base_config(c, d);
  RngStream rng(cfg.master_seed, observed_stream(cfg.sample_sizes.front()));
  const SimPath path = simulate(cfg.model, cfg.true_phi, cfg.sample_sizes.front(), rng);
  auto os = open_output(c.out, "paths.csv");
  os << "t,return,state\n" << std::setprecision(17);
  for (std::size_t t = 0; t < path.size(); ++t) os << t + 1 << ',' << path.returns[t] << ',' << path.states[t] << '\n';
  std::cout << "wrote " << (fs::path(c.out) / "paths.csv").string() << '\n';
  return 0;
}

int cmd_fit(const Common& c, const DataArgs& d, const std::string& data_file, const std::string& center) {
  ExperimentConfig cfg = base_config(c, d);
  if (!center.empty()) cfg.aukf.noise_center = noise_center_from_string(center);
  const SimPath path = observed_data(cfg, data_file);
  const auto model = make_aux_model(cfg.model, cfg.aukf);
  const auto y = aux_data(path);
  const AuxFit fit = fit_mle(*model, y, model->default_start(y));
  auto os = open_output(c.out, "fit.csv");
  os << "model";
  for (std::size_t j = 0; j < fit.beta_hat.size(); ++j) os << ",beta" << j + 1;
  os << ",loglik,converged,evals\n" << std::setprecision(12) << model->name();
  for (double b : fit.beta_hat) os << ',' << b;
  os << ',' << fit.loglik << ',' << (fit.converged ? 1 : 0) << ',' << fit.evaluations << '\n';
  std::cout << "wrote " << (fs::path(c.out) / "fit.csv").string() << '\n';
  return std::isfinite(fit.loglik) ? 0 : 2;
}

int cmd_abc(const Common& c, const DataArgs& d, const std::string& criterion_name) {
  const ExperimentConfig cfg = base_config(c, d);
  cfg.validate();
  const std::size_t threads = resolve_threads(c);
  const std::size_t T = cfg.sample_sizes.front();
  const SimPath observed = observed_data(cfg, "");
  const auto ctx = ObservedContext::build(cfg.model, observed, cfg.unknown, cfg.aukf);
  const CriterionKind kind = criterion_name.empty() ? cfg.criteria.front() : criterion_kind_from_string(criterion_name);
  const auto criterion = make_criterion(kind, ctx);
  const BoxPrior prior = BoxPrior::standard(cfg.model, cfg.true_phi, cfg.unknown);
  const AbcPool pool = simulate_pool(prior, T, cfg.draws_for(T), cfg.master_seed, {criterion.get()}, threads);
  const auto dist = criterion->distances(pool.summaries[0], pool.phis);
  for (std::size_t k = 0; k < cfg.unknown.size(); ++k) {
    const std::size_t j = cfg.unknown[k];
    const RetainedSet kept =
        retain(pool.phis, pool.summaries[0], dist.at(criterion->channel_for(k)), cfg.quantile, cfg.master_seed,
               cfg.n_retained);
    const std::string label = reported_label(cfg.model, j);
    auto rs = open_output(c.out, "retained_" + label + ".csv");
    write_retained_csv(rs, kept);
    std::vector<double> values;
    for (const auto& dr : kept.draws) values.push_back(to_reported(cfg.model, j, dr.phi[j]));
    const double h = silverman_bandwidth(values);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    auto ks = open_output(c.out, "kde_" + label + ".csv");
    write_kde_csv(ks, kde(values, linspace(*mn - 4.0 * h, *mx + 4.0 * h, cfg.kde_nodes)));
    std::cout << label << ": retained " << kept.draws.size() << " of " << kept.n_total << ", epsilon "
              << kept.epsilon << '\n';
  }
  return 0;
}

int cmd_oracle(const Common& c, const DataArgs& d, const std::string& coordinate, std::size_t nodes,
               std::size_t state_nodes) {
  const ExperimentConfig cfg = base_config(c, d);
  if (cfg.model != ModelTag::SvSq) throw ConfigError("oracle-posterior: only the sv_sq model has an exact posterior");
  std::size_t j = 1;
  if (!coordinate.empty()) {
    if (coordinate.size() != 4 || coordinate.rfind("phi", 0) != 0 || coordinate[3] < '1' || coordinate[3] > '3') {
      throw ConfigError("oracle-posterior: --coordinate must be phi1, phi2 or phi3");
    }
    j = static_cast<std::size_t>(coordinate[3] - '1');
  } else if (!cfg.unknown.empty()) {
    j = cfg.unknown.front();
  }
  const SimPath observed = observed_data(cfg, "");
  ExactPosteriorOptions opt;
  opt.param_nodes = nodes;
  opt.state_nodes = state_nodes;
  opt.threads = resolve_threads(c);
  const PosteriorGrid post =
      exact_posterior(observed.observations, j, SvSqParams::from_span(cfg.true_phi), SvSqPrior{}, opt);
  auto os = open_output(c.out, "posterior.csv");
  os << "param_value,log_posterior,density\n" << std::setprecision(12);
  for (std::size_t i = 0; i < post.param_nodes.size(); ++i) {
    os << post.param_nodes[i] << ',' << post.log_posterior[i] << ',' << post.density[i] << '\n';
  }
  std::cout << "wrote " << (fs::path(c.out) / "posterior.csv").string() << '\n';
  return 0;
}

int cmd_experiment(const Common& c) {
  if (c.config_path.empty()) throw ConfigError("experiment: --config is required");
  ExperimentConfig cfg = ExperimentConfig::load(c.config_path);
  if (c.seed_given) cfg.master_seed = c.seed;
  const AccuracyReport report = run_experiment(cfg, resolve_threads(c), &std::cerr);
  auto os = open_output(c.out, "report.csv");
  write_report_csv(os, report);
  std::cerr << cfg.name << ": " << report.n_runs << " runs in " << std::fixed << std::setprecision(1)
            << report.wall_seconds << " s\n";
  std::cout << "wrote " << (fs::path(c.out) / "report.csv").string() << '\n';
  return 0;
}

int cmd_report(const std::string& input) {
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot open report '" + input + "'");
  std::string line;
  std::getline(in, line);
  if (line != "criterion,param,T,metric,value,n_runs") throw ConfigError("'" + input + "' is not a report CSV");
  // metric/T -> param -> criterion -> value
  std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> table;
  std::vector<std::string> criteria;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string crit, param, T, metric, value, runs;
    std::getline(ss, crit, ',');
    std::getline(ss, param, ',');
    std::getline(ss, T, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, value, ',');
    table[metric + " (T=" + T + ")"][param][crit] = value;
    if (std::find(criteria.begin(), criteria.end(), crit) == criteria.end()) criteria.push_back(crit);
  }
  for (const auto& [section, params] : table) {
    std::cout << section << '\n' << std::setw(10) << "param";
    for (const auto& crit : criteria) std::cout << std::setw(12) << crit;
    std::cout << '\n';
    for (const auto& [param, row] : params) {
      std::cout << std::setw(10) << param;
      for (const auto& crit : criteria) {
        const auto it = row.find(crit);
        std::string v = it == row.end() ? "-" : it->second;
        if (it != row.end()) {
          std::ostringstream f;
          f << std::fixed << std::setprecision(4) << std::stod(v);
          v = f.str();
        }
        std::cout << std::setw(12) << v;
      }
      std::cout << '\n';
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auxiliary-likelihood ABC for state space models"};
  app.require_subcommand(1);

  Common sim_c, fit_c, abc_c, orc_c, exp_c;
  DataArgs sim_d, fit_d, abc_d, orc_d;
  std::string fit_data, fit_center, abc_criterion, orc_coord, report_in;
  std::size_t orc_nodes = 200, orc_state = 100;

  auto* sim = app.add_subcommand("simulate", "Simulate one path; writes paths.csv (t,return,state)");
  add_common(sim, sim_c);
  add_data(sim, sim_d);

  auto* fit = app.add_subcommand("fit-aux", "Fit the auxiliary model; writes fit.csv");
  add_common(fit, fit_c);
  add_data(fit, fit_d);
  fit->add_option("--data", fit_data, "paths.csv to fit instead of simulating");
  fit->add_option("--noise-center", fit_center, "appendix_c | zero");

  auto* abc = app.add_subcommand("abc-run", "One ABC run; writes retained_<param>.csv and kde_<param>.csv");
  add_common(abc, abc_c);
  add_data(abc, abc_d);
  abc->add_option("--criterion", abc_criterion, "score | mle | ss | ss_raw | fp | fp_raw | int_score");

  auto* orc = app.add_subcommand("oracle-posterior", "Exact posterior on a grid; writes posterior.csv");
  add_common(orc, orc_c);
  add_data(orc, orc_d);
  orc->add_option("--coordinate", orc_coord, "phi1 | phi2 | phi3");
  orc->add_option("--nodes", orc_nodes, "Parameter grid nodes")->capture_default_str();
  orc->add_option("--state-nodes", orc_state, "State grid nodes")->capture_default_str();

  auto* exp = app.add_subcommand("experiment", "Multi-run experiment; writes report.csv");
  add_common(exp, exp_c);

  auto* rep = app.add_subcommand("report", "Print a report.csv as tables");
  rep->add_option("input", report_in, "report.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(sim_c, sim_d);
    if (*fit) return cmd_fit(fit_c, fit_d, fit_data, fit_center);
    if (*abc) return cmd_abc(abc_c, abc_d, abc_criterion);
    if (*orc) return cmd_oracle(orc_c, orc_d, orc_coord, orc_nodes, orc_state);
    if (*exp) return cmd_experiment(exp_c);
    if (*rep) return cmd_report(report_in);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
