#ifndef GBO_EXPERIMENT_HPP
#define GBO_EXPERIMENT_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gbo/bo.hpp"
#include "gbo/features.hpp"
#include "gbo/generators.hpp"
#include "gbo/graph_io.hpp"
#include "gbo/kernels.hpp"
#include "gbo/objectives.hpp"
#include "gbo/traffic.hpp"

namespace gbo {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Parsed experiment configuration. Relative paths resolve against the
/// directory holding the config file.
struct ExperimentConfig {
  std::string benchmark;  // hartmann | robustness | utndp | custom
  json candidate_spec = json::object();
  json objective = json::object();
  std::vector<FeatureGroupSpec> feature_groups;
  std::vector<Strategy> strategies;
  std::size_t budget = 60;
  std::size_t n_init = 10;
  std::size_t refit_every = 10;
  bool final_fit = false;
  GraphKernelOptions kernel;
  std::vector<std::pair<int, int>> grid = default_grid();
  int restarts = 5;
  std::string partition;  // "" or "projects"
  std::vector<std::uint64_t> seeds;
  GaOptions ga;
  SaOptions sa;
  fs::path base_dir = ".";

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }

  static ExperimentConfig from_json(const json& j, const fs::path& base_dir = ".") {
    ExperimentConfig c;
    c.base_dir = base_dir;
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    static const std::set<std::string> keys{"benchmark",   "candidate_spec", "feature_groups", "strategies",
                                            "budget",      "n_init",         "refit_every",    "final_fit",
                                            "kernel",      "seeds",          "objective",      "ga",
                                            "sa",          "description"};
    for (const auto& [k, v] : j.items())
      if (!keys.count(k)) throw ParameterError("config: unknown key '" + k + "'");
    try {
      c.benchmark = j.at("benchmark").get<std::string>();
      if (c.benchmark != "hartmann" && c.benchmark != "robustness" && c.benchmark != "utndp" &&
          c.benchmark != "custom")
        throw ParameterError("config: unknown benchmark '" + c.benchmark + "'");
      c.candidate_spec = j.value("candidate_spec", json::object());
      c.objective = j.value("objective", json::object());
      for (const auto& g : j.at("feature_groups")) {
        FeatureGroupSpec s{g.at("name").get<std::string>(), g.at("features").get<std::vector<std::string>>()};
        for (const auto& f : s.features)
          if (!is_known_feature(f)) throw ParameterError("config: unknown feature '" + f + "'");
        c.feature_groups.push_back(std::move(s));
      }
      for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy(s.get<std::string>()));
      if (c.strategies.empty()) throw ParameterError("config: no strategies");
      c.budget = j.at("budget").get<std::size_t>();
      c.n_init = j.value("n_init", c.n_init);
      c.refit_every = j.value("refit_every", c.refit_every);
      c.final_fit = j.value("final_fit", c.final_fit);
      if (j.contains("kernel")) {
        const auto& k = j.at("kernel");
        c.kernel.k = k.value("k", c.kernel.k);
        c.kernel.samples = k.value("samples", c.kernel.samples);
        c.kernel.samples_per_node = k.value("samples_per_node", c.kernel.samples_per_node);
        c.kernel.seed = k.value("seed", c.kernel.seed);
        const std::string variant = k.value("variant", std::string("deep"));
        if (variant == "deep")
          c.kernel.variant = GraphKernelVariant::deep;
        else if (variant == "base")
          c.kernel.variant = GraphKernelVariant::base;
        else
          throw ParameterError("config: unknown kernel variant '" + variant + "'");
        if (k.contains("grid")) {
          c.grid.clear();
          for (const auto& p : k.at("grid")) c.grid.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        }
        c.restarts = k.value("restarts", c.restarts);
        c.partition = k.value("partition", std::string());
        if (!c.partition.empty() && c.partition != "projects")
          throw ParameterError("config: unknown partition '" + c.partition + "'");
      }
      const auto& seeds = j.at("seeds");
      if (seeds.is_number_unsigned()) {
        for (std::uint64_t s = 0; s < seeds.get<std::uint64_t>(); ++s) c.seeds.push_back(s);
      } else {
        c.seeds = seeds.get<std::vector<std::uint64_t>>();
      }
      if (c.seeds.empty()) throw ParameterError("config: no seeds");
      if (j.contains("ga")) {
        const auto& g = j.at("ga");
        c.ga.population = g.value("population", c.ga.population);
        c.ga.crossover_rate = g.value("crossover_rate", c.ga.crossover_rate);
        c.ga.mutation_rate = g.value("mutation_rate", c.ga.mutation_rate);
        c.ga.tournament = g.value("tournament", c.ga.tournament);
      }
      if (j.contains("sa")) {
        const auto& s = j.at("sa");
        c.sa.trials_per_cycle = s.value("trials_per_cycle", c.sa.trials_per_cycle);
        c.sa.accept_start = s.value("accept_start", c.sa.accept_start);
        c.sa.accept_end = s.value("accept_end", c.sa.accept_end);
      }
    } catch (const json::exception& e) {
      throw ParameterError(std::string("config: ") + e.what());
    }
    if (c.feature_groups.empty()) throw ParameterError("config: no feature groups");
    if (c.n_init > c.budget) throw ParameterError("config: n_init exceeds budget");
    return c;
  }

  static ExperimentConfig load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config " + path.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParameterError("config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
  }
};

/// A concrete benchmark: candidate graphs, their explicit features and an
/// objective over candidate indices.
struct Benchmark {
  CandidateSet set;
  FeatureGroups groups;
  std::vector<double> values;  // exhaustive objective table
  std::optional<BitEncoding> encoding;
  std::optional<std::vector<std::vector<NodeId>>> partition;
  json metadata = json::object();

  double optimum() const { return *std::max_element(values.begin(), values.end()); }
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  }
};

inline SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  s.node_counts = j.value("node_counts", s.node_counts);
  s.er_probs = j.value("er_probs", s.er_probs);
  s.ba_edges = j.value("ba_edges", s.ba_edges);
  s.count_per_family = j.value("count_per_family", s.count_per_family);
  s.seed = j.value("seed", s.seed);
  return s;
}

inline json hartmann_metadata() {
  json a = json::array(), p = json::array();
  for (int i = 0; i < 4; ++i) {
    a.push_back(std::vector<double>(hartmann::A[i], hartmann::A[i] + 4));
    p.push_back(std::vector<double>(hartmann::P[i], hartmann::P[i] + 4));
  }
  return {{"alpha", hartmann::alpha}, {"A", a}, {"P", p}};
}

/// Builds the candidate set, feature groups and the exhaustive objective
/// table. UTNDP candidates are evaluated by Frank-Wolfe, the rest in closed form.
inline Benchmark make_benchmark(const ExperimentConfig& c) {
  Benchmark b;
  const std::uint64_t feature_seed = derive_seed(c.candidate_spec.value("seed", std::uint64_t{0}), {0xFEA7});
  b.metadata["centrality"] = "normalized (degree, betweenness, closeness)";
  try {
    if (c.benchmark == "hartmann" || c.benchmark == "robustness") {
      b.set = synth_dataset(synth_spec_from_json(c.candidate_spec));
    } else if (c.benchmark == "custom") {
      b.set = read_graphs(c.resolve(c.candidate_spec.at("graphs").get<std::string>()).string());
    } else {
      const auto net = c.resolve(c.candidate_spec.value("net", std::string("data/siouxfalls/SiouxFalls_net.tntp")));
      const auto trips =
          c.resolve(c.candidate_spec.value("trips", std::string("data/siouxfalls/SiouxFalls_trips.tntp")));
      const TrafficNetwork full = parse_tntp(net.string(), trips.string());
      std::vector<Project> projects;
      if (c.candidate_spec.contains("projects")) {
        projects = read_projects(c.resolve(c.candidate_spec.at("projects").get<std::string>()).string());
      } else {
        projects = select_projects(full, c.candidate_spec.value("project_count", std::size_t{10}),
                                   c.candidate_spec.value("project_seed", std::uint64_t{0}));
      }
      FrankWolfeOptions fw;
      fw.tolerance = c.objective.value("tolerance", fw.tolerance);
      fw.max_iter = c.objective.value("max_iter", fw.max_iter);
      auto candidates = build_candidates(full, projects);
      for (auto& cand : candidates) {
        b.set.graphs.push_back(cand.graph);
        std::string id = "u";
        for (std::size_t j = 0; j < projects.size(); ++j) id += ((cand.decision >> j) & 1ULL) ? '1' : '0';
        b.set.ids.push_back(id);
        b.values.push_back(utndp_objective(cand.network, fw));
      }
      b.encoding = power_set_encoding(candidates.size());
      if (c.partition == "projects") {
        const Graph g = to_undirected(full);
        std::vector<std::vector<NodeId>> parts;
        for (const auto& p : projects) {
          std::set<NodeId> area{p.a, p.b};
          for (NodeId v : {p.a, p.b})
            for (NodeId u : g.neighbors(v)) area.insert(u);
          parts.emplace_back(area.begin(), area.end());
        }
        b.partition = parts;
      }
      b.metadata["projects"] = json::parse(projects_to_json(projects));
      b.metadata["frank_wolfe"] = {{"tolerance", fw.tolerance}, {"max_iter", fw.max_iter}};
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("candidate_spec: ") + e.what());
  }
  b.set.validate();
  b.groups = build_feature_groups(b.set, c.feature_groups, feature_seed);

  if (c.benchmark == "hartmann") {
    const auto names = c.objective.value(
        "features", std::vector<std::string>{"node_count", "edge_count", "avg_degree_centrality", "avg_betweenness"});
    const Eigen::MatrixXd x = normalize(extract_matrix(b.set, names, feature_seed));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Eigen::VectorXd row = x.row(i);
      b.values.push_back(hartmann_objective(std::span<const double>(row.data(), 4)));
    }
    b.metadata["hartmann"] = hartmann_metadata();
  } else if (c.benchmark == "robustness") {
    const Removal mode = parse_removal(c.objective.value("removal", std::string("targeted")));
    const double p = c.objective.value("p", 0.8);
    const std::size_t trials = c.objective.value("trials", std::size_t{100});
    const std::uint64_t seed = c.objective.value("seed", std::uint64_t{0});
    for (std::size_t i = 0; i < b.set.size(); ++i)
      b.values.push_back(robustness(b.set.graphs[i], mode, p, trials, derive_seed(seed, {i})));
  } else if (c.benchmark == "custom") {
    const std::string attr = c.objective.value("attribute", std::string("objective"));
    for (const auto& g : b.set.graphs) {
      auto v = g.attribute(attr);
      if (!v) throw ParameterError("custom benchmark: graph lacks attribute '" + attr + "'");
      b.values.push_back(*v);
    }
    if ((b.set.size() & (b.set.size() - 1)) == 0 && b.set.size() > 1) b.encoding = power_set_encoding(b.set.size());
  }
  return b;
}

inline GraphKernelBank make_kernel_bank(const ExperimentConfig& c, const Benchmark& b) {
  GraphKernelOptions opt = c.kernel;
  opt.partition = b.partition;
  return GraphKernelBank(b.set, opt);
}

inline BoConfig bo_config(const ExperimentConfig& c, const Benchmark& b, std::uint64_t seed) {
  BoConfig cfg;
  cfg.budget = c.budget;
  cfg.n_init = c.n_init;
  cfg.refit_every = c.refit_every;
  cfg.seed = seed;
  cfg.fit.grid = c.grid;
  cfg.fit.restarts = c.restarts;
  cfg.ga = c.ga;
  cfg.sa = c.sa;
  cfg.final_fit = c.final_fit;
  cfg.optimum = b.optimum();
  return cfg;
}

inline BoProblem bo_problem(const Benchmark& b, const GraphKernelBank& bank) {
  BoProblem p;
  p.ids = b.set.ids;
  p.bank = &bank;
  p.groups = &b.groups;
  const std::vector<double>* values = &b.values;
  p.objective = [values](std::size_t i) { return values->at(i); };
  p.encoding = b.encoding;
  return p;
}

// ---- output ----

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string run_name(Strategy s, std::uint64_t seed) {
  return std::string(to_string(s)) + "_seed" + std::to_string(seed);
}

inline void write_run_csv(const fs::path& path, const RunRecord& r, const FeatureGroups& groups) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << "iteration,candidate_id,y,best_so_far,window,dim,alpha";
  for (const auto& g : groups) out << ",beta_" << g.name;
  out << ",sigma,gamma\n";
  for (const auto& it : r.iterations) {
    out << it.iteration << ',' << csv_field(it.id) << ',' << fmt(it.y) << ',' << fmt(it.best_so_far);
    if (it.theta) {
      const auto& t = *it.theta;
      out << ',' << t.window << ',' << t.dim << ',' << fmt(t.alpha);
      for (double b : t.betas) out << ',' << fmt(b);
      out << ',' << fmt(t.sigma) << ',' << fmt(t.gamma());
    } else {
      out << ",,,";
      for (std::size_t g = 0; g < groups.size(); ++g) out << ',';
      out << ",,";
    }
    out << '\n';
  }
}

inline void write_fit_csv(const fs::path& path, const RunRecord& r, const FeatureGroups& groups) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << "iteration,window,dim,alpha";
  for (const auto& g : groups) out << ",beta_" << g.name;
  out << ",sigma,lml";
  for (const auto& g : groups)
    for (const auto& f : g.features) out << ",l_" << g.name << '_' << f;
  out << '\n';
  for (const auto& f : r.fits) {
    out << f.iteration << ',' << f.params.window << ',' << f.params.dim << ',' << fmt(f.params.alpha);
    for (double b : f.params.betas) out << ',' << fmt(b);
    out << ',' << fmt(f.params.sigma) << ',' << fmt(f.lml);
    for (const auto& l : f.params.length_scales)
      for (Eigen::Index d = 0; d < l.size(); ++d) out << ',' << fmt(l[d]);
    out << '\n';
  }
}

/// Linear-interpolation quantile of unsorted values.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline json quartiles(const std::vector<double>& v) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"q1", num(quantile(v, 0.25))}, {"median", num(quantile(v, 0.5))}, {"q3", num(quantile(v, 0.75))}};
}

/// Evaluations-to-optimum with runs that never reach the optimum counted as budget + 1.
inline double censored_evaluations(const RunRecord& r, std::size_t budget) {
  return static_cast<double>(r.evaluations_to_optimum.value_or(budget + 1));
}

struct ExperimentResult {
  Benchmark benchmark;
  std::vector<RunRecord> runs;  // strategies x seeds, strategy-major
  json summary;
  bool any_failed = false;
};

struct RunOptions {
  std::size_t jobs = 1;
  std::uint64_t seed_base = 0;
  std::optional<fs::path> out_dir;
};

/// Runs every (strategy, seed) pair, sharing the benchmark and kernel bank.
/// Runs under the same seed share their initial design.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& ro = {}) {
  ExperimentResult res;
  res.benchmark = make_benchmark(c);
  const Benchmark& b = res.benchmark;
  const GraphKernelBank bank = make_kernel_bank(c, b);
  const BoProblem problem = bo_problem(b, bank);

  struct Task {
    Strategy strategy;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Strategy s : c.strategies)
    for (std::uint64_t seed : c.seeds) tasks.push_back({s, seed + ro.seed_base});
  res.runs.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      try {
        res.runs[i] = run_strategy(t.strategy, problem, bo_config(c, b, t.seed));
      } catch (const std::exception& e) {
        res.runs[i].strategy = t.strategy;
        res.runs[i].seed = t.seed;
        res.runs[i].aborted = true;
        res.runs[i].error = e.what();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(ro.jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  json summary;
  summary["benchmark"] = c.benchmark;
  summary["candidates"] = b.set.size();
  summary["budget"] = c.budget;
  summary["n_init"] = c.n_init;
  summary["optimum"] = b.optimum();
  summary["optimum_id"] = b.set.ids[b.argmax()];
  summary["metadata"] = b.metadata;
  summary["censoring"] = "runs that miss the optimum count as budget + 1";
  json strategies = json::object();
  for (Strategy s : c.strategies) {
    std::vector<double> evals, gammas;
    json runs = json::array();
    for (const auto& r : res.runs) {
      if (r.strategy != s) continue;
      res.any_failed = res.any_failed || r.aborted;
      evals.push_back(censored_evaluations(r, c.budget));
      if (!r.fits.empty()) gammas.push_back(r.gamma());
      json jr = {{"seed", r.seed},
                 {"csv", "runs/" + run_name(s, r.seed) + ".csv"},
                 {"evaluations_to_optimum", r.evaluations_to_optimum ? json(*r.evaluations_to_optimum) : json(nullptr)},
                 {"best", std::isfinite(r.best()) ? json(r.best()) : json(nullptr)},
                 {"aborted", r.aborted},
                 {"wall_seconds", r.wall_seconds}};
      if (!r.error.empty()) jr["error"] = r.error;
      if (!r.fits.empty()) jr["gamma"] = std::isfinite(r.gamma()) ? json(r.gamma()) : json("inf");
      runs.push_back(jr);
    }
    json js = {{"evaluations_to_optimum", quartiles(evals)}, {"runs", runs}};
    if (!gammas.empty()) js["gamma"] = quartiles(gammas);
    strategies[to_string(s)] = js;
  }
  summary["strategies"] = strategies;
  res.summary = summary;

  if (ro.out_dir) {
    const fs::path dir = *ro.out_dir;
    fs::create_directories(dir / "runs");
    fs::create_directories(dir / "fits");
    for (const auto& r : res.runs) {
      write_run_csv(dir / "runs" / (run_name(r.strategy, r.seed) + ".csv"), r, b.groups);
      if (!r.fits.empty()) write_fit_csv(dir / "fits" / (run_name(r.strategy, r.seed) + ".csv"), r, b.groups);
    }
    std::ofstream out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  return res;
}

// ---- report ----

namespace detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split_csv_line(line));
  return t;
}

// "<strategy>_seed<n>.csv" -> strategy
inline std::string strategy_of(const fs::path& file) {
  const std::string stem = file.stem().string();
  const auto at = stem.rfind("_seed");
  return at == std::string::npos ? stem : stem.substr(0, at);
}

inline std::vector<fs::path> sorted_csvs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline double to_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace detail

/// Writes report/curves.csv (mean and variance of best-so-far per strategy and
/// iteration), report/hyperparameters.csv (quartiles of fitted parameters and
/// relevances 1/l) and report/gamma.csv (quartiles of the per-run gamma). `dir`
/// is an experiment output directory or a directory of them.
inline fs::path report(const fs::path& dir) {
  std::vector<std::pair<std::string, fs::path>> experiments;
  if (fs::is_directory(dir / "runs")) {
    experiments.emplace_back(dir.filename().string(), dir);
  } else if (fs::is_directory(dir)) {
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && fs::is_directory(e.path() / "runs")) subs.push_back(e.path());
    std::sort(subs.begin(), subs.end());
    for (const auto& s : subs) experiments.emplace_back(s.filename().string(), s);
  }
  std::size_t run_files = 0;
  for (const auto& [name, path] : experiments) run_files += detail::sorted_csvs(path / "runs").size();
  if (run_files == 0) throw ParameterError("report: no run CSVs under " + dir.string());

  const fs::path out_dir = dir / "report";
  fs::create_directories(out_dir);
  std::ofstream curves(out_dir / "curves.csv"), hyper(out_dir / "hyperparameters.csv"),
      gamma(out_dir / "gamma.csv");
  curves << "experiment,strategy,iteration,runs,mean,variance,lower,upper\n";
  hyper << "experiment,strategy,parameter,count,q1,median,q3\n";
  gamma << "experiment,strategy,runs,q1,median,q3\n";

  for (const auto& [name, path] : experiments) {
    std::map<std::string, std::vector<std::vector<double>>> best;
    for (const auto& f : detail::sorted_csvs(path / "runs")) {
      const auto t = detail::read_csv(f);
      const auto col = t.column("best_so_far");
      if (!col) throw ParameterError("report: " + f.string() + " has no best_so_far column");
      std::vector<double> curve;
      for (const auto& row : t.rows) curve.push_back(detail::to_double(row.at(*col)));
      best[detail::strategy_of(f)].push_back(std::move(curve));
    }
    for (const auto& [strategy, runs] : best) {
      std::size_t len = 0;
      for (const auto& r : runs) len = std::max(len, r.size());
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> v;
        for (const auto& r : runs)
          if (i < r.size()) v.push_back(r[i]);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        const double sd = std::sqrt(var);
        curves << csv_field(name) << ',' << strategy << ',' << i + 1 << ',' << v.size() << ',' << fmt(mean) << ','
               << fmt(var) << ',' << fmt(mean - sd) << ',' << fmt(mean + sd) << '\n';
      }
    }

    std::map<std::string, std::map<std::string, std::vector<double>>> params;
    std::map<std::string, std::vector<double>> gammas;
    for (const auto& f : detail::sorted_csvs(path / "fits")) {
      const auto t = detail::read_csv(f);
      const std::string strategy = detail::strategy_of(f);
      double alpha_sum = 0.0, beta_sum = 0.0;
      for (const auto& row : t.rows) {
        double beta_row = 0.0;
        std::size_t beta_n = 0;
        for (std::size_t c = 1; c < t.header.size() && c < row.size(); ++c) {
          const std::string& h = t.header[c];
          const double v = detail::to_double(row[c]);
          if (h == "window" || h == "dim" || h == "lml") continue;
          params[strategy][h].push_back(v);
          if (h.rfind("l_", 0) == 0) params[strategy]["relevance_" + h.substr(2)].push_back(1.0 / v);
          if (h == "alpha") alpha_sum += v;
          if (h.rfind("beta_", 0) == 0) {
            beta_row += v;
            ++beta_n;
          }
        }
        if (beta_n) beta_sum += beta_row / static_cast<double>(beta_n);
      }
      if (!t.rows.empty())
        gammas[strategy].push_back(alpha_sum > 0.0 ? beta_sum / alpha_sum : std::numeric_limits<double>::infinity());
    }
    for (const auto& [strategy, table] : params)
      for (const auto& [param, v] : table)
        hyper << csv_field(name) << ',' << strategy << ',' << param << ',' << v.size() << ','
              << fmt(quantile(v, 0.25)) << ',' << fmt(quantile(v, 0.5)) << ',' << fmt(quantile(v, 0.75)) << '\n';
    for (const auto& [strategy, v] : gammas)
      gamma << csv_field(name) << ',' << strategy << ',' << v.size() << ',' << fmt(quantile(v, 0.25)) << ','
            << fmt(quantile(v, 0.5)) << ',' << fmt(quantile(v, 0.75)) << '\n';
  }
  return out_dir;
}

}  // namespace gbo

#endif  // GBO_EXPERIMENT_HPP
