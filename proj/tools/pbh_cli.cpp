// Command-line front end: run experiments, rank persisted results, and query
// the theory module. Exit codes: 0 success, 2 configuration error, 3 runtime
// failure.

#include "pbh.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using namespace pbh;
using namespace pbh::harness;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string config_path;
  std::optional<std::string> objective, algo, local_solver, out;
  std::optional<int> dim, samples, local_steps, lbfgs_memory;
  std::optional<double> gamma0, delta0, eta1, eta2, gd_step, budget_seconds;
  std::optional<std::string> seeds;
  std::optional<long> max_iterations;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    try {
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      seeds.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("malformed seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("--seeds needs at least one seed");
  return seeds;
}

/// Command-line flags win over the file; they are folded into the JSON
/// before expansion so the file's key checks still apply.
json merged_experiment(const RunOptions& o) {
  json j = json::object();
  if (!o.config_path.empty()) {
    try {
      j = json::parse(read_file(o.config_path));
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + o.config_path + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    if (!j.is_object()) throw ConfigError(o.config_path + " must hold a JSON object");
  }
  if (o.objective) {
    j.erase("objectives");
    j["objective"] = *o.objective;
  }
  if (o.dim) {
    j.erase("dims");
    j["dim"] = *o.dim;
    if (j.contains("objectives")) {
      for (auto& entry : j["objectives"]) {
        entry.erase("dims");
        entry["dim"] = *o.dim;
      }
    }
  }
  if (o.algo) {
    j.erase("algos");
    j["algo"] = *o.algo;
  }
  if (o.seeds) j["seeds"] = parse_seed_list(*o.seeds);
  if (o.budget_seconds) {
    j.erase("budget_seconds_per_dim");
    j["budget_seconds"] = *o.budget_seconds;
  }
  if (o.out) j["out"] = *o.out;

  json& config = j["config"];
  if (config.is_null()) config = json::object();
  if (o.samples) {
    j.erase("samples_per_dim");
    config["n_samples"] = *o.samples;
  }
  // Default sample size: ten per dimension.
  if (!config.contains("n_samples") && !j.contains("samples_per_dim")) j["samples_per_dim"] = 10;
  if (o.gamma0) config["gamma0"] = *o.gamma0;
  if (o.delta0) config["delta0"] = *o.delta0;
  if (o.eta1) config["eta1"] = *o.eta1;
  if (o.eta2) config["eta2"] = *o.eta2;
  if (o.max_iterations) config["max_iterations"] = *o.max_iterations;

  json& solver = j["solver"];
  if (solver.is_null()) solver = json::object();
  if (o.local_solver) solver["method"] = *o.local_solver;
  if (o.local_steps) solver["max_steps"] = *o.local_steps;
  if (o.gd_step) solver["step_size"] = *o.gd_step;
  if (o.lbfgs_memory) solver["memory"] = *o.lbfgs_memory;

  if (!j.contains("out")) j["out"] = "results";
  return j;
}

int command_run(const RunOptions& o) {
  const auto specs = expand_experiment_matrix(merged_experiment(o));
  if (specs.empty()) throw ConfigError("experiment expands to nothing");
  for (const auto& s : specs) s.validate();
  fs::create_directories(specs.front().output_path);

  std::printf("%-18s %5s %-4s %6s %14s %14s %14s\n", "objective", "dim", "algo", "seeds", "mean", "std",
              "median");
  for (const auto& s : specs) {
    const auto r = run_experiment(s);
    std::printf("%-18s %5d %-4s %6zu %14.6g %14.6g %14.6g\n", s.objective.c_str(), s.dim,
                to_string(s.algorithm).c_str(), r.runs.size(), r.aggregate.mean, r.aggregate.std,
                r.aggregate.median);
    std::fflush(stdout);
  }
  std::printf("results in %s\n", specs.front().output_path.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// rank

int command_rank(const std::string& in, const std::string& out) {
  if (!fs::is_directory(in)) throw ConfigError("no such results directory: " + in);
  auto records = load_records(in);
  if (records.empty()) throw ConfigError("no result records in " + in);
  const auto table = rank_algorithms(records);
  const std::string csv = ranking_csv(table);
  if (!out.empty()) write_atomic(out, csv);
  std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------
// theory

Objective one_dimensional(const std::string& name) {
  if (name == "rastrigin") return rastrigin(1);
  if (name == "griewank") return griewank(1);
  if (name == "quadratic") return quadratic(1);
  throw ConfigError("theory landscapes support rastrigin, griewank and quadratic, not '" + name + "'");
}

json landscape_json(const theory::LandscapeModel& m) {
  json mins = json::array();
  for (const auto& x : m.minimizers) mins.push_back({{"location", x.location}, {"value", x.value}});
  return {{"domain_radius", m.domain_radius},
          {"minimizers", mins},
          {"basin_boundaries", m.basin_boundaries},
          {"global_index", m.global_index()},
          {"max_improving_hop", theory::max_improving_hop(m)}};
}

std::vector<double> parse_number_list(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    try {
      out.push_back(parse_double(item));
    } catch (const std::exception&) {
      throw ConfigError("malformed number '" + item + "'");
    }
  }
  return out;
}

struct LandscapeOptions {
  std::string objective = "rastrigin";
  double radius = 5.0;
  int grid = 20000;

  void attach(CLI::App* app) {
    app->add_option("--objective", objective, "1D objective")->capture_default_str();
    app->add_option("--radius", radius, "Domain half-width")->capture_default_str();
    app->add_option("--grid", grid, "Grid cells")->capture_default_str();
  }
  theory::LandscapeModel model() const {
    return theory::enumerate_1d_landscape(one_dimensional(objective), radius, grid);
  }
};

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal basin hopping: experiments, ranking and theory checks"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment matrix");
  run_cmd->add_option("--config", run.config_path, "Experiment JSON file");
  run_cmd->add_option("--objective", run.objective, "Objective name");
  run_cmd->add_option("--dim", run.dim, "Dimension (atoms for lj, domains for scaling)");
  run_cmd->add_option("--algo", run.algo, "pbh | bh | zop");
  run_cmd->add_option("--samples", run.samples, "Samples per iteration (default 10 * dim)");
  run_cmd->add_option("--gamma0", run.gamma0, "Initial proximal scale");
  run_cmd->add_option("--delta0", run.delta0, "Initial temperature");
  run_cmd->add_option("--eta1", run.eta1, "Gamma growth factor");
  run_cmd->add_option("--eta2", run.eta2, "Temperature decay factor");
  run_cmd->add_option("--max-iterations", run.max_iterations, "Iteration cap per run");
  run_cmd->add_option("--local-solver", run.local_solver, "gd | lbfgs");
  run_cmd->add_option("--local-steps", run.local_steps, "Local solver steps");
  run_cmd->add_option("--gd-step", run.gd_step, "Gradient descent step size");
  run_cmd->add_option("--lbfgs-memory", run.lbfgs_memory, "L-BFGS history length");
  run_cmd->add_option("--budget-seconds", run.budget_seconds, "Wall-clock budget per seed");
  run_cmd->add_option("--seeds", run.seeds, "Comma-separated seeds");
  run_cmd->add_option("--out", run.out, "Output directory (default results)");

  std::string rank_in, rank_out;
  auto* rank_cmd = app.add_subcommand("rank", "Rank algorithms from persisted results");
  rank_cmd->add_option("--in", rank_in, "Results directory")->required();
  rank_cmd->add_option("--out", rank_out, "Ranking CSV to write");

  auto* theory_cmd = app.add_subcommand("theory", "Checkable theory quantities, printed as JSON");
  theory_cmd->require_subcommand(1);

  LandscapeOptions enum_opts;
  auto* enum_cmd = theory_cmd->add_subcommand("enumerate", "Minimizers and basins of a 1D objective");
  enum_opts.attach(enum_cmd);

  LandscapeOptions pot_opts;
  double pot_x = 0.0, pot_gamma = 1.0;
  auto* pot_cmd = theory_cmd->add_subcommand("potential-argmin", "Components minimizing V_x");
  pot_opts.attach(pot_cmd);
  pot_cmd->add_option("--x", pot_x, "Current point")->required();
  pot_cmd->add_option("--gamma", pot_gamma, "Proximal scale")->required();

  LandscapeOptions ideal_opts;
  double ideal_x0 = 0.0, ideal_gamma0 = 1.0, ideal_eta = 1.5;
  int ideal_max = 200;
  auto* ideal_cmd = theory_cmd->add_subcommand("ideal-pbh", "Exact operator iteration on a 1D landscape");
  ideal_opts.attach(ideal_cmd);
  ideal_cmd->add_option("--x0", ideal_x0, "Start point")->required();
  ideal_cmd->add_option("--gamma0", ideal_gamma0, "Initial proximal scale")->capture_default_str();
  ideal_cmd->add_option("--eta", ideal_eta, "Gamma growth on stagnation")->capture_default_str();
  ideal_cmd->add_option("--max-iter", ideal_max, "Hop limit")->capture_default_str();

  int ncx_dof = 1;
  double ncx_lambda = 0.0, ncx_t = 0.0;
  auto* ncx_cmd = theory_cmd->add_subcommand("ncx2-cdf", "Noncentral chi-square CDF");
  ncx_cmd->add_option("--dof", ncx_dof, "Degrees of freedom")->required();
  ncx_cmd->add_option("--lambda", ncx_lambda, "Noncentrality")->required();
  ncx_cmd->add_option("--t", ncx_t, "Evaluation point")->required();

  double rs_p = 0.0, rs_conf = 0.95;
  auto* rs_cmd = theory_cmd->add_subcommand("required-samples", "Samples for a hit with given confidence");
  rs_cmd->add_option("--p", rs_p, "Per-sample hit probability")->required();
  rs_cmd->add_option("--confidence", rs_conf, "Target confidence")->capture_default_str();

  double bh_dist = 0.0, bh_sigma = 1.0, bh_r = 1.0;
  int bh_dim = 1;
  auto* ball_cmd = theory_cmd->add_subcommand("ball-hit", "Probability a Gaussian sample hits a ball");
  ball_cmd->add_option("--distance", bh_dist, "Center-to-mean distance")->required();
  ball_cmd->add_option("--sigma", bh_sigma, "Sample standard deviation")->required();
  ball_cmd->add_option("--r", bh_r, "Ball radius")->required();
  ball_cmd->add_option("--dim", bh_dim, "Dimension")->required();

  std::string ct_values, ct_points;
  double ct_radius = 1.0;
  auto* ct_cmd = theory_cmd->add_subcommand("concentration-threshold",
                                            "Largest temperature that keeps the barycenter in a basin");
  ct_cmd->add_option("--values", ct_values, "Comma-separated values")->required();
  ct_cmd->add_option("--points", ct_points, "Points separated by ';', coordinates by ','")->required();
  ct_cmd->add_option("--radius", ct_radius, "Basin radius")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*run_cmd) return command_run(run);
    if (*rank_cmd) return command_rank(rank_in, rank_out);

    if (*enum_cmd) {
      print_json(landscape_json(enum_opts.model()));
    } else if (*pot_cmd) {
      const auto m = pot_opts.model();
      const auto idx = theory::potential_argmin(m, pot_x, pot_gamma);
      json locations = json::array();
      for (auto i : idx) locations.push_back(m.minimizers[i].location);
      print_json({{"x", pot_x},
                  {"gamma", pot_gamma},
                  {"argmin", idx},
                  {"locations", locations},
                  {"potential", theory::potential(m, pot_x, pot_gamma)}});
    } else if (*ideal_cmd) {
      const auto r = theory::ideal_pbh(ideal_opts.model(), ideal_x0, ideal_gamma0, ideal_eta, ideal_max);
      json traj = json::array();
      for (const auto& s : r.trajectory) {
        traj.push_back({{"location", s.location}, {"value", s.value}, {"gamma", s.gamma}});
      }
      print_json({{"converged", r.converged}, {"iterations", r.iterations_used}, {"trajectory", traj}});
    } else if (*ncx_cmd) {
      print_json({{"dof", ncx_dof},
                  {"lambda", ncx_lambda},
                  {"t", ncx_t},
                  {"cdf", theory::noncentral_chisq_cdf(ncx_dof, ncx_lambda, ncx_t)}});
    } else if (*rs_cmd) {
      print_json({{"p", rs_p}, {"confidence", rs_conf}, {"samples", theory::required_samples(rs_p, rs_conf)}});
    } else if (*ball_cmd) {
      print_json({{"distance", bh_dist},
                  {"sigma", bh_sigma},
                  {"r", bh_r},
                  {"dim", bh_dim},
                  {"probability", theory::ball_hit_probability(bh_dist, bh_sigma, bh_r, bh_dim)}});
    } else if (*ct_cmd) {
      const auto values = parse_number_list(ct_values, ',');
      std::vector<Vector> points;
      std::stringstream in(ct_points);
      std::string item;
      while (std::getline(in, item, ';')) {
        const auto coords = parse_number_list(item, ',');
        points.push_back(Eigen::Map<const Vector>(coords.data(), static_cast<Index>(coords.size())));
      }
      const double t = concentration_threshold(values, points, ct_radius);
      print_json({{"threshold", t == kInfinitySentinel ? json("inf") : json(t)}});
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
}
