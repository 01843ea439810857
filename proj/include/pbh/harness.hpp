#ifndef PBH_HARNESS_HPP
#define PBH_HARNESS_HPP

// Experiment runner: resolves (objective, algorithm, solver) triples, runs one
// independent trajectory per seed under a wall-clock budget, and persists the
// final (not best-seen) values as JSON records plus a flat CSV for plotting.

#include "pbh/baselines.hpp"
#include "pbh/local_solver.hpp"
#include "pbh/objectives.hpp"
#include "pbh/proximal_basin_hopping.hpp"
#include "pbh/scaling_law.hpp"
#include "pbh/types.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace pbh::harness {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Algorithm { pbh, bh, zop };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::pbh: return "pbh";
    case Algorithm::bh: return "bh";
    case Algorithm::zop: return "zop";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "pbh") return Algorithm::pbh;
  if (s == "bh") return Algorithm::bh;
  if (s == "zop") return Algorithm::zop;
  throw ConfigError("unknown algorithm '" + s + "' (expected pbh, bh or zop)");
}

inline SolverMethod parse_solver_method(const std::string& s) {
  if (s == "gd") return SolverMethod::gradient_descent;
  if (s == "lbfgs") return SolverMethod::lbfgs;
  throw ConfigError("unknown local solver '" + s + "' (expected gd or lbfgs)");
}

inline Termination parse_termination(const std::string& s) {
  if (s == "max_iter") return Termination::max_iter;
  if (s == "budget") return Termination::budget;
  if (s == "converged_tol") return Termination::converged_tol;
  throw ConfigError("unknown termination '" + s + "'");
}

inline StepOutcome parse_outcome(const std::string& s) {
  if (s == "strict") return StepOutcome::strict;
  if (s == "equal") return StepOutcome::equal;
  if (s == "worse") return StepOutcome::worse;
  throw ConfigError("unknown step outcome '" + s + "'");
}

inline const std::vector<std::string>& objective_names() {
  static const std::vector<std::string> names{"rastrigin",        "griewank",    "lj",
                                              "scaling-additive", "scaling-full", "quadratic"};
  return names;
}

/// Synthetic data settings for the scaling-law objectives.
struct ScalingDataSpec {
  std::uint64_t data_seed = 0;
  int observations = 64;
  double noise_level = 1e-4;
};

/**
 * Builds an objective by name. `size` is the problem size in the objective's
 * natural unit: the dimension for rastrigin, griewank and quadratic, the atom
 * count for lj, and the number of mixture domains for the scaling laws.
 */
inline Objective make_objective(const std::string& name, int size,
                                const ScalingDataSpec& scaling = {}) {
  if (name == "rastrigin") return rastrigin(size);
  if (name == "griewank") return griewank(size);
  if (name == "quadratic") return quadratic(size);
  if (name == "lj") return lennard_jones(size);
  if (name == "scaling-additive" || name == "scaling-full") {
    const ScalingLaw law = name == "scaling-additive" ? ScalingLaw::additive : ScalingLaw::full;
    if (size < 1) throw InvalidDimension("scaling law needs at least one domain");
    SyntheticScalingOptions opt;
    opt.domains = size;
    opt.noise_level = scaling.noise_level;
    return scaling_law_objective(
        generate_synthetic_scaling_data(scaling.data_seed, scaling.observations, law, opt), law);
  }
  throw ConfigError("unknown objective '" + name + "'");
}

/// Half-width of the uniform box the start point is drawn from.
inline double default_init_radius(const std::string& name, int size) {
  if (name == "lj") return 0.6 * std::cbrt(static_cast<double>(size)) + 0.5;
  if (name.rfind("scaling-", 0) == 0) return 1.0;
  return 5.0;
}

struct ExperimentSpec {
  std::string objective;
  int dim = 2;
  Algorithm algorithm = Algorithm::pbh;
  PbhConfig config;
  LocalSolver solver;
  std::vector<std::uint64_t> seeds{0};
  std::optional<double> budget_seconds;
  std::optional<double> init_radius;
  ScalingDataSpec scaling;
  fs::path output_path;  // directory; empty = do not persist

  void validate() const {
    if (std::find(objective_names().begin(), objective_names().end(), objective) ==
        objective_names().end()) {
      throw ConfigError("unknown objective '" + objective + "'");
    }
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (budget_seconds && !(*budget_seconds > 0.0)) throw ConfigError("budget must be positive");
    if (init_radius && !(*init_radius > 0.0)) throw ConfigError("init_radius must be positive");
    try {
      config.validate();
      solver.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }

  std::string stem() const {
    return objective + "_d" + std::to_string(dim) + "_" + to_string(algorithm);
  }
};

struct SeedResult {
  std::uint64_t seed = 0;
  double final_value = 0.0;
  Vector final_point;
  long iterations = 0;
  double wall_seconds = 0.0;
  Termination termination = Termination::max_iter;
  RunTrace trace;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single seed
  double median = 0.0;
};

struct ResultRecord {
  ExperimentSpec spec;
  std::vector<SeedResult> runs;
  Aggregate aggregate;
  std::optional<int> rank;
};

inline Aggregate aggregate_of(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / (n - 1.0));
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  a.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  return a;
}

inline Aggregate aggregate_of(const std::vector<SeedResult>& runs) {
  std::vector<double> v;
  v.reserve(runs.size());
  for (const auto& r : runs) v.push_back(r.final_value);
  return aggregate_of(v);
}

inline Vector initial_point(const ExperimentSpec& spec, Index dimension, std::uint64_t seed) {
  const double radius = spec.init_radius.value_or(default_init_radius(spec.objective, spec.dim));
  Rng rng = make_rng(seed, 1);
  std::uniform_real_distribution<double> u(-radius, radius);
  Vector x(dimension);
  for (Index i = 0; i < dimension; ++i) x[i] = u(rng);
  return x;
}

inline RunTrace run_algorithm(Algorithm algo, const Objective& f, const LocalSolver& solver,
                              const PbhConfig& config, const Vector& x0) {
  switch (algo) {
    case Algorithm::pbh: return run_pbh(f, solver, config, x0);
    case Algorithm::bh: return run_bh(f, solver, config, x0);
    case Algorithm::zop: return run_zop(f, config, x0);
  }
  throw ConfigError("unknown algorithm");
}

// ---------------------------------------------------------------------------
// JSON

inline json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

inline json config_to_json(const PbhConfig& c) {
  json j{{"gamma0", c.gamma0},
         {"delta0", c.delta0},
         {"eta1", c.eta1},
         {"eta2", c.eta2},
         {"n_samples", c.n_samples},
         {"sample_growth", c.sample_growth},
         {"adaptive_delta", c.adaptive_delta},
         {"max_iterations", c.max_iterations},
         {"target_tolerance", c.target_tolerance},
         {"max_samples", c.max_samples},
         {"gamma_max", c.gamma_max},
         {"trace_capacity", c.trace_capacity}};
  return j;
}

/// Overwrites the fields present in `j`; unknown keys are a config error.
inline void apply_config_json(const json& j, PbhConfig& c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "gamma0") c.gamma0 = value.get<double>();
    else if (key == "delta0") c.delta0 = value.get<double>();
    else if (key == "eta1") c.eta1 = value.get<double>();
    else if (key == "eta2") c.eta2 = value.get<double>();
    else if (key == "n_samples") c.n_samples = value.get<int>();
    else if (key == "sample_growth") c.sample_growth = value.get<double>();
    else if (key == "adaptive_delta") c.adaptive_delta = value.get<bool>();
    else if (key == "max_iterations") c.max_iterations = value.get<long>();
    else if (key == "target_tolerance") c.target_tolerance = value.get<double>();
    else if (key == "max_samples") c.max_samples = value.get<long>();
    else if (key == "gamma_max") c.gamma_max = value.get<double>();
    else if (key == "trace_capacity") c.trace_capacity = value.get<long>();
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

inline json solver_to_json(const LocalSolver& s) {
  return json{{"method", to_string(s.method)},
              {"max_steps", s.max_steps},
              {"step_size", s.step_size},
              {"memory", s.memory},
              {"grad_tolerance", s.grad_tolerance}};
}

inline void apply_solver_json(const json& j, LocalSolver& s) {
  for (const auto& [key, value] : j.items()) {
    if (key == "method") s.method = parse_solver_method(value.get<std::string>());
    else if (key == "max_steps") s.max_steps = value.get<int>();
    else if (key == "step_size") s.step_size = value.get<double>();
    else if (key == "memory") s.memory = value.get<int>();
    else if (key == "grad_tolerance") s.grad_tolerance = value.get<double>();
    else throw ConfigError("unknown solver key '" + key + "'");
  }
}

inline json spec_to_json(const ExperimentSpec& s) {
  json j{{"objective", s.objective},
         {"dim", s.dim},
         {"algo", to_string(s.algorithm)},
         {"config", config_to_json(s.config)},
         {"solver", solver_to_json(s.solver)},
         {"seeds", s.seeds},
         {"budget_seconds", s.budget_seconds ? json(*s.budget_seconds) : json(nullptr)},
         {"init_radius", s.init_radius ? json(*s.init_radius) : json(nullptr)},
         {"scaling",
          {{"data_seed", s.scaling.data_seed},
           {"observations", s.scaling.observations},
           {"noise_level", s.scaling.noise_level}}},
         {"output_path", s.output_path.string()}};
  return j;
}

inline ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec s;
  s.objective = j.at("objective").get<std::string>();
  s.dim = j.at("dim").get<int>();
  s.algorithm = parse_algorithm(j.at("algo").get<std::string>());
  apply_config_json(j.at("config"), s.config);
  apply_solver_json(j.at("solver"), s.solver);
  s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (!j.at("budget_seconds").is_null()) s.budget_seconds = j.at("budget_seconds").get<double>();
  if (!j.at("init_radius").is_null()) s.init_radius = j.at("init_radius").get<double>();
  const auto& sc = j.at("scaling");
  s.scaling.data_seed = sc.at("data_seed").get<std::uint64_t>();
  s.scaling.observations = sc.at("observations").get<int>();
  s.scaling.noise_level = sc.at("noise_level").get<double>();
  s.output_path = j.at("output_path").get<std::string>();
  return s;
}

inline json trace_to_json(const RunTrace& t) {
  json its = json::array();
  for (const auto& r : t.iterations) {
    its.push_back({{"index", r.index},
                   {"iterate", vector_to_json(r.iterate)},
                   {"f_value", r.f_value},
                   {"gamma", r.gamma},
                   {"delta", r.delta},
                   {"n_samples", r.n_samples},
                   {"elapsed_seconds", r.elapsed_seconds},
                   {"accepted", r.accepted},
                   {"outcome", to_string(r.outcome)}});
  }
  return json{{"algorithm", t.algorithm},
              {"initial_point", vector_to_json(t.initial_point)},
              {"initial_value", t.initial_value},
              {"iterations", std::move(its)},
              {"final_point", vector_to_json(t.final_point)},
              {"final_value", t.final_value},
              {"termination", to_string(t.termination)},
              {"monotone", t.monotone},
              {"iterations_run", t.iterations_run},
              {"record_stride", t.record_stride}};
}

inline RunTrace trace_from_json(const json& j) {
  RunTrace t;
  t.algorithm = j.at("algorithm").get<std::string>();
  t.initial_point = vector_from_json(j.at("initial_point"));
  t.initial_value = j.at("initial_value").get<double>();
  for (const auto& r : j.at("iterations")) {
    IterationRecord rec;
    rec.index = r.at("index").get<long>();
    rec.iterate = vector_from_json(r.at("iterate"));
    rec.f_value = r.at("f_value").get<double>();
    rec.gamma = r.at("gamma").get<double>();
    rec.delta = r.at("delta").get<double>();
    rec.n_samples = r.at("n_samples").get<long>();
    rec.elapsed_seconds = r.at("elapsed_seconds").get<double>();
    rec.accepted = r.at("accepted").get<bool>();
    rec.outcome = parse_outcome(r.at("outcome").get<std::string>());
    t.iterations.push_back(std::move(rec));
  }
  t.final_point = vector_from_json(j.at("final_point"));
  t.final_value = j.at("final_value").get<double>();
  t.termination = parse_termination(j.at("termination").get<std::string>());
  t.monotone = j.at("monotone").get<bool>();
  t.iterations_run = j.at("iterations_run").get<long>();
  t.record_stride = j.at("record_stride").get<long>();
  return t;
}

inline json record_to_json(const ResultRecord& r) {
  json runs = json::array();
  for (const auto& s : r.runs) {
    runs.push_back({{"seed", s.seed},
                    {"final_value", s.final_value},
                    {"final_point", vector_to_json(s.final_point)},
                    {"iterations", s.iterations},
                    {"wall_seconds", s.wall_seconds},
                    {"termination", to_string(s.termination)},
                    {"trace", trace_to_json(s.trace)}});
  }
  return json{{"spec", spec_to_json(r.spec)},
              {"runs", std::move(runs)},
              {"aggregate",
               {{"mean", r.aggregate.mean},
                {"std", r.aggregate.std},
                {"median", r.aggregate.median}}},
              {"rank", r.rank ? json(*r.rank) : json(nullptr)}};
}

inline ResultRecord record_from_json(const json& j) {
  ResultRecord r;
  r.spec = spec_from_json(j.at("spec"));
  for (const auto& s : j.at("runs")) {
    SeedResult sr;
    sr.seed = s.at("seed").get<std::uint64_t>();
    sr.final_value = s.at("final_value").get<double>();
    sr.final_point = vector_from_json(s.at("final_point"));
    sr.iterations = s.at("iterations").get<long>();
    sr.wall_seconds = s.at("wall_seconds").get<double>();
    sr.termination = parse_termination(s.at("termination").get<std::string>());
    sr.trace = trace_from_json(s.at("trace"));
    r.runs.push_back(std::move(sr));
  }
  const auto& a = j.at("aggregate");
  r.aggregate = {a.at("mean").get<double>(), a.at("std").get<double>(),
                 a.at("median").get<double>()};
  if (!j.at("rank").is_null()) r.rank = j.at("rank").get<int>();
  return r;
}

// ---------------------------------------------------------------------------
// Files

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed number '" + s + "'");
  }
  return v;
}

struct CsvRow {
  std::string objective;
  int dim = 0;
  std::string algo;
  std::uint64_t seed = 0;
  double final_value = 0.0;
  long iterations = 0;
  double wall_seconds = 0.0;
  std::string termination;
};

inline const char* csv_header() {
  return "objective,dim,algo,seed,final_value,iterations,wall_seconds,termination";
}

inline std::vector<CsvRow> csv_rows(const ResultRecord& r) {
  std::vector<CsvRow> rows;
  for (const auto& s : r.runs) {
    rows.push_back({r.spec.objective, r.spec.dim, to_string(r.spec.algorithm), s.seed,
                    s.final_value, s.iterations, s.wall_seconds, to_string(s.termination)});
  }
  return rows;
}

inline std::string format_csv_row(const CsvRow& row) {
  return row.objective + "," + std::to_string(row.dim) + "," + row.algo + "," +
         std::to_string(row.seed) + "," + format_double(row.final_value) + "," +
         std::to_string(row.iterations) + "," + format_double(row.wall_seconds) + "," +
         row.termination;
}

inline std::string results_csv(const std::vector<ResultRecord>& records) {
  std::string out = std::string(csv_header()) + "\n";
  for (const auto& r : records) {
    for (const auto& row : csv_rows(r)) out += format_csv_row(row) + "\n";
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::vector<CsvRow> parse_results_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != csv_header()) throw std::runtime_error("unexpected CSV header: " + line);
      header = false;
      continue;
    }
    const auto c = split_csv_line(line);
    if (c.size() != 8) throw std::runtime_error("malformed CSV row: " + line);
    rows.push_back({c[0], std::stoi(c[1]), c[2], std::stoull(c[3]), parse_double(c[4]),
                    std::stol(c[5]), parse_double(c[6]), c[7]});
  }
  return rows;
}

inline void persist(const ResultRecord& r) {
  if (r.spec.output_path.empty()) return;
  const fs::path dir = r.spec.output_path;
  write_atomic(dir / (r.spec.stem() + ".json"), record_to_json(r).dump(2) + "\n");
  write_atomic(dir / (r.spec.stem() + ".csv"), results_csv({r}));
}

// ---------------------------------------------------------------------------
// Running

/// Runs every seed of `spec` and records its final iterate. Name resolution
/// happens before any run starts.
inline ResultRecord run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Objective f = [&] {
    try {
      return make_objective(spec.objective, spec.dim, spec.scaling);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }();

  ResultRecord record;
  record.spec = spec;
  for (std::uint64_t seed : spec.seeds) {
    PbhConfig config = spec.config;
    config.seed = seed;
    config.budget_seconds = spec.budget_seconds;
    const Vector x0 = initial_point(spec, f.dimension(), seed);

    const auto start = detail::Clock::now();
    RunTrace trace = run_algorithm(spec.algorithm, f, spec.solver, config, x0);
    SeedResult s;
    s.seed = seed;
    s.wall_seconds = detail::seconds_since(start);
    s.final_value = trace.final_value;
    s.final_point = trace.final_point;
    s.iterations = trace.iterations_run;
    s.termination = trace.termination;
    s.trace = std::move(trace);
    record.runs.push_back(std::move(s));
    // Partial results survive an interrupted experiment.
    record.aggregate = aggregate_of(record.runs);
    persist(record);
  }
  return record;
}

struct RankRow {
  std::string objective;
  int dim = 0;
  std::string algo;
  double mean = 0.0;
  int rank = 0;
};

inline std::vector<RankRow> rank_rows(std::vector<RankRow> rows) {
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) groups[{rows[i].objective, rows[i].dim}].push_back(i);
  std::vector<RankRow> out;
  for (auto& [key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].mean < rows[b].mean; });
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      RankRow r = rows[idx[pos]];
      if (pos > 0 && rows[idx[pos]].mean == rows[idx[pos - 1]].mean) {
        r.rank = out.back().rank;  // ties share the lower rank
      } else {
        r.rank = static_cast<int>(pos) + 1;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

/// Ranks algorithms by mean final value within each (objective, dim) group,
/// 1 being best. Records without runs are skipped with a warning.
inline std::vector<RankRow> rank_algorithms(std::vector<ResultRecord>& records) {
  std::vector<RankRow> rows;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].runs.empty()) {
      std::cerr << "warning: skipping " << records[i].spec.stem() << " (no runs)\n";
      continue;
    }
    rows.push_back({records[i].spec.objective, records[i].spec.dim,
                    to_string(records[i].spec.algorithm), aggregate_of(records[i].runs).mean, 0});
    owner.push_back(i);
  }
  auto ranked = rank_rows(rows);
  for (const auto& r : ranked) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].objective == r.objective && rows[k].dim == r.dim && rows[k].algo == r.algo) {
        records[owner[k]].rank = r.rank;
      }
    }
  }
  return ranked;
}

/// Ranking recomputed from per-seed CSV rows alone.
inline std::vector<RankRow> rank_from_csv_rows(const std::vector<CsvRow>& csv) {
  std::map<std::tuple<std::string, int, std::string>, std::vector<double>> finals;
  std::vector<std::tuple<std::string, int, std::string>> order;
  for (const auto& row : csv) {
    auto key = std::make_tuple(row.objective, row.dim, row.algo);
    if (!finals.count(key)) order.push_back(key);
    finals[key].push_back(row.final_value);
  }
  std::vector<RankRow> rows;
  for (const auto& key : order) {
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                    aggregate_of(finals[key]).mean, 0});
  }
  return rank_rows(std::move(rows));
}

inline std::string ranking_csv(const std::vector<RankRow>& rows) {
  std::string out = "objective,dim,algo,mean_final_value,rank\n";
  for (const auto& r : rows) {
    out += r.objective + "," + std::to_string(r.dim) + "," + r.algo + "," + format_double(r.mean) +
           "," + std::to_string(r.rank) + "\n";
  }
  return out;
}

inline std::vector<RankRow> parse_ranking_csv(const std::string& text) {
  std::vector<RankRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 5) throw std::runtime_error("malformed ranking row: " + line);
    rows.push_back({c[0], std::stoi(c[1]), c[2], parse_double(c[3]), std::stoi(c[4])});
  }
  return rows;
}

/// Loads every *.json result record in `dir`, in file-name order.
inline std::vector<ResultRecord> load_records(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ResultRecord> records;
  for (const auto& p : files) records.push_back(record_from_json(json::parse(read_file(p))));
  return records;
}

// ---------------------------------------------------------------------------
// Experiment matrices

/**
 * Expands a declarative experiment file into specs. Keys mirror the spec
 * fields:
 *
 *   objective / objectives: "rastrigin" or [{"name": "rastrigin", "dims": [2, 10]}]
 *   dim / dims, algo / algos, seeds, budget_seconds, budget_seconds_per_dim,
 *   samples_per_dim, init_radius, config {...}, solver {...}, scaling {...}, out
 *
 * budget_seconds_per_dim and samples_per_dim scale with the problem size.
 */
inline std::vector<ExperimentSpec> expand_experiment_matrix(const json& j) {
  static const std::vector<std::string> known{
      "objective", "objectives", "dim",           "dims",   "algo",
      "algos",     "seeds",      "budget_seconds", "budget_seconds_per_dim",
      "samples_per_dim", "init_radius", "config", "solver", "scaling", "out"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown experiment key '" + key + "'");
    }
  }
  try {
    std::vector<std::pair<std::string, std::vector<int>>> objectives;
    if (j.contains("objectives")) {
      for (const auto& o : j.at("objectives")) {
        objectives.emplace_back(o.at("name").get<std::string>(),
                                o.contains("dims") ? o.at("dims").get<std::vector<int>>()
                                                   : std::vector<int>{o.at("dim").get<int>()});
      }
    } else if (j.contains("objective")) {
      std::vector<int> dims = j.contains("dims") ? j.at("dims").get<std::vector<int>>()
                                                 : std::vector<int>{j.value("dim", 2)};
      objectives.emplace_back(j.at("objective").get<std::string>(), dims);
    } else {
      throw ConfigError("experiment file names no objective");
    }

    std::vector<std::string> algos;
    if (j.contains("algos")) algos = j.at("algos").get<std::vector<std::string>>();
    else algos.push_back(j.value("algo", std::string("pbh")));

    ExperimentSpec base;
    if (j.contains("config")) apply_config_json(j.at("config"), base.config);
    if (j.contains("solver")) apply_solver_json(j.at("solver"), base.solver);
    if (j.contains("seeds")) base.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("init_radius")) base.init_radius = j.at("init_radius").get<double>();
    if (j.contains("scaling")) {
      const auto& sc = j.at("scaling");
      base.scaling.data_seed = sc.value("data_seed", base.scaling.data_seed);
      base.scaling.observations = sc.value("observations", base.scaling.observations);
      base.scaling.noise_level = sc.value("noise_level", base.scaling.noise_level);
    }
    if (j.contains("out")) base.output_path = j.at("out").get<std::string>();

    std::vector<ExperimentSpec> specs;
    for (const auto& [name, dims] : objectives) {
      for (int d : dims) {
        for (const auto& a : algos) {
          ExperimentSpec s = base;
          s.objective = name;
          s.dim = d;
          s.algorithm = parse_algorithm(a);
          if (j.contains("budget_seconds")) s.budget_seconds = j.at("budget_seconds").get<double>();
          if (j.contains("budget_seconds_per_dim")) {
            s.budget_seconds = j.at("budget_seconds_per_dim").get<double>() * d;
          }
          if (j.contains("samples_per_dim")) s.config.n_samples = j.at("samples_per_dim").get<int>() * d;
          specs.push_back(std::move(s));
        }
      }
    }
    return specs;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment file: ") + e.what());
  }
}

}  // namespace pbh::harness

#endif  // PBH_HARNESS_HPP
