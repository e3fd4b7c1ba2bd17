#ifndef GBO_BO_HPP
#define GBO_BO_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gbo/acquisition.hpp"
#include "gbo/gp.hpp"
#include "gbo/hyperopt.hpp"
#include "gbo/kernels.hpp"
#include "gbo/random.hpp"

namespace gbo {

enum class Strategy { gbo, random, bo_f, bo_g, ga, sa };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::gbo: return "gbo";
    case Strategy::random: return "random";
    case Strategy::bo_f: return "bo_f";
    case Strategy::bo_g: return "bo_g";
    case Strategy::ga: return "ga";
    case Strategy::sa: return "sa";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& name) {
  for (auto s : {Strategy::gbo, Strategy::random, Strategy::bo_f, Strategy::bo_g, Strategy::ga,
                 Strategy::sa})
    if (name == to_string(s)) return s;
  throw ParameterError("unknown strategy '" + name + "'");
}

using Objective = std::function<double(std::size_t)>;

/// Bit-vector view of a candidate set for GA/SA: `index_of(code)` maps a
/// decision vector to its candidate, or nothing when no candidate encodes it.
struct BitEncoding {
  int bits = 0;
  std::function<std::optional<std::size_t>(std::uint64_t)> index_of;
  std::function<std::uint64_t(std::size_t)> code_of;
};

/// Identity encoding for a set of 2^b candidates whose index is the decision
/// vector.
inline BitEncoding power_set_encoding(std::size_t count) {
  if (count < 2 || (count & (count - 1)) != 0)
    throw UnsupportedError("candidate count " + std::to_string(count) +
                           " is not a power of two; no bit-vector encoding");
  BitEncoding e;
  while ((std::size_t{1} << e.bits) < count) ++e.bits;
  e.index_of = [count](std::uint64_t code) -> std::optional<std::size_t> {
    if (code < count) return static_cast<std::size_t>(code);
    return std::nullopt;
  };
  e.code_of = [](std::size_t i) { return static_cast<std::uint64_t>(i); };
  return e;
}

struct GaOptions {
  std::size_t population = 90;
  double crossover_rate = 0.6;
  double mutation_rate = 0.062;  // per bit
  std::size_t tournament = 2;
  std::size_t max_generations = 5000;
};

struct SaOptions {
  std::size_t trials_per_cycle = 2;
  double accept_start = 0.7;
  double accept_end = 0.001;
  std::size_t max_steps_per_evaluation = 200;
};

struct BoConfig {
  std::size_t budget = 100;
  std::size_t n_init = 10;
  std::size_t refit_every = 10;
  std::uint64_t seed = 0;
  FitOptions fit;  // fit.seed is derived per refit from `seed`
  GaOptions ga;
  SaOptions sa;
  std::optional<double> optimum;  // known best value, for evaluations-to-optimum
  bool final_fit = false;          // gbo: also fit on the full record once the budget is spent
};

struct BoProblem {
  std::vector<std::string> ids;
  const GraphKernelBank* bank = nullptr;  // unused by random/ga/sa/bo_f
  const FeatureGroups* groups = nullptr;
  Objective objective;
  std::optional<BitEncoding> encoding;  // required by ga/sa
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based count of distinct evaluations
  std::size_t candidate = 0;
  std::string id;
  double y = 0.0;
  double best_so_far = 0.0;
  std::optional<KernelParams> theta;  // surrogate parameters used to pick this candidate
};

struct FitTrace {
  std::size_t iteration = 0;  // evaluations made before the fit
  KernelParams params;
  double lml = 0.0;
};

struct RunRecord {
  Strategy strategy = Strategy::gbo;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  std::vector<FitTrace> fits;
  std::optional<std::size_t> evaluations_to_optimum;
  bool aborted = false;
  std::string error;
  double wall_seconds = 0.0;

  /// mean over fits of mean(beta) divided by mean over fits of alpha
  double gamma() const {
    if (fits.empty()) return std::numeric_limits<double>::quiet_NaN();
    double a = 0.0, b = 0.0;
    for (const auto& f : fits) {
      a += f.params.alpha;
      b += f.params.beta_mean();
    }
    if (a == 0.0) return std::numeric_limits<double>::infinity();
    return b / a;
  }

  double best() const {
    return iterations.empty() ? -std::numeric_limits<double>::infinity()
                              : iterations.back().best_so_far;
  }
};

/// First n distinct candidates of the seeded permutation shared by every
/// strategy under the same run seed.
inline std::vector<std::size_t> initial_design(std::size_t candidates, std::size_t n,
                                               std::uint64_t seed) {
  std::vector<std::size_t> order(candidates);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {0x1417}));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(n, candidates));
  return order;
}

namespace detail {

// Records distinct evaluations in order and serves repeats from a cache.
class EvaluationLog {
 public:
  EvaluationLog(const BoProblem& p, RunRecord& r) : problem_(p), record_(r) {}

  std::size_t count() const noexcept { return record_.iterations.size(); }
  bool seen(std::size_t i) const { return cache_.count(i) > 0; }

  double evaluate(std::size_t i, const std::optional<KernelParams>& theta = std::nullopt) {
    if (auto it = cache_.find(i); it != cache_.end()) return it->second;
    const double y = problem_.objective(i);
    cache_.emplace(i, y);
    IterationRecord rec;
    rec.iteration = count() + 1;
    rec.candidate = i;
    rec.id = problem_.ids.at(i);
    rec.y = y;
    rec.best_so_far = record_.iterations.empty() ? y : std::max(record_.iterations.back().best_so_far, y);
    rec.theta = theta;
    record_.iterations.push_back(std::move(rec));
    return y;
  }

 private:
  const BoProblem& problem_;
  RunRecord& record_;
  std::unordered_map<std::size_t, double> cache_;
};

inline void finish(RunRecord& r, const BoConfig& cfg,
                   std::chrono::steady_clock::time_point started) {
  if (cfg.optimum) {
    const double tol = 1e-12 * std::max(1.0, std::abs(*cfg.optimum));
    for (const auto& it : r.iterations)
      if (it.best_so_far >= *cfg.optimum - tol) {
        r.evaluations_to_optimum = it.iteration;
        break;
      }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

// Combined kernel over candidate indices without per-call validation.
struct FastKernel {
  const GraphKernel* graph;
  const FeatureGroups* groups;
  const KernelParams* p;

  double operator()(std::size_t i, std::size_t j) const {
    double v = p->alpha > 0.0 ? p->alpha * (*graph)(i, j) : 0.0;
    for (std::size_t g = 0; g < groups->size(); ++g) {
      if (p->betas[g] == 0.0) continue;
      const auto& f = (*groups)[g].values;
      const auto& l = p->length_scales[g];
      double s = 0.0;
      for (Eigen::Index d = 0; d < f.cols(); ++d) {
        const double r = (f(static_cast<Eigen::Index>(i), d) - f(static_cast<Eigen::Index>(j), d)) / l[d];
        s += r * r;
      }
      v += p->betas[g] * std::exp(-0.5 * s);
    }
    return v;
  }
};

inline void check_run_args(const BoProblem& problem, const BoConfig& cfg) {
  const std::size_t n = problem.ids.size();
  if (n == 0) throw ParameterError("empty candidate set");
  if (!problem.objective) throw ParameterError("no objective");
  if (cfg.budget > n) throw ParameterError("budget exceeds candidate count");
  if (cfg.n_init > cfg.budget) throw ParameterError("n_init exceeds budget");
}

}  // namespace detail

/// Graph Bayesian optimization over a finite candidate set: seeded random
/// initial design, then refit-select-evaluate until the budget is spent.
/// Hyperparameters are refitted when `refit_every` observations have arrived
/// since the last fit. Observations are standardized before fitting; EI is
/// maximized over unevaluated candidates. Candidates whose objective is not
/// finite count against the budget but are kept out of the surrogate.
inline RunRecord run_gbo(const BoProblem& problem, const BoConfig& cfg,
                         bool pin_alpha_zero = false, bool pin_betas_zero = false) {
  const auto started = std::chrono::steady_clock::now();
  detail::check_run_args(problem, cfg);
  if (cfg.n_init < 2) throw ParameterError("run_gbo: n_init must be >= 2");
  if (!problem.groups) throw ParameterError("run_gbo: feature groups required");
  if (!pin_alpha_zero && !problem.bank) throw ParameterError("run_gbo: graph kernel bank required");
  if (cfg.refit_every < 1) throw ParameterError("run_gbo: refit_every must be >= 1");

  RunRecord record;
  record.strategy = pin_alpha_zero ? Strategy::bo_f : pin_betas_zero ? Strategy::bo_g : Strategy::gbo;
  record.seed = cfg.seed;
  detail::EvaluationLog log(problem, record);
  const std::size_t n = problem.ids.size();
  std::vector<char> evaluated(n, 0);

  try {
    for (std::size_t i : initial_design(n, cfg.n_init, cfg.seed)) {
      log.evaluate(i);
      evaluated[i] = 1;
    }
    std::optional<KernelParams> theta;
    std::size_t last_fit_size = 0;
    std::vector<double> scores(n);
    auto standardized = [&] {
      ObservationSet obs;
      for (const auto& it : record.iterations)
        if (std::isfinite(it.y)) obs.add(it.candidate, it.y);
      if (obs.size() < 2) throw FitError("fewer than two finite observations");
      const double mean = std::accumulate(obs.y.begin(), obs.y.end(), 0.0) / static_cast<double>(obs.size());
      double var = 0.0;
      for (double v : obs.y) var += (v - mean) * (v - mean);
      double sd = std::sqrt(var / static_cast<double>(obs.size()));
      if (!(sd > 1e-12)) sd = 1.0;
      for (double& v : obs.y) v = (v - mean) / sd;
      return obs;
    };
    auto refit = [&](const ObservationSet& obs) {
      FitOptions fo = cfg.fit;
      fo.seed = derive_seed(cfg.seed, {0xF17, record.fits.size()});
      fo.pin_alpha_zero = pin_alpha_zero;
      fo.pin_betas_zero = pin_betas_zero;
      FitResult fit = fit_params(obs, *problem.bank, *problem.groups, fo);
      theta = fit.params;
      last_fit_size = obs.size();
      record.fits.push_back({log.count(), fit.params, fit.lml});
    };

    while (log.count() < cfg.budget) {
      const ObservationSet obs = standardized();
      if (!theta || obs.size() - last_fit_size >= cfg.refit_every) refit(obs);

      const GraphKernel* gk = theta->alpha > 0.0 ? &problem.bank->at(theta->window, theta->dim) : nullptr;
      detail::FastKernel kernel{gk, problem.groups, &*theta};
      GaussianProcess gp(gram(obs.indices, kernel, theta->sigma), obs.y_vector());
      const double k_self = theta->alpha + std::accumulate(theta->betas.begin(), theta->betas.end(), 0.0);
      const double y_max = obs.y_max();
      Eigen::VectorXd k_star(static_cast<Eigen::Index>(obs.size()));
      for (std::size_t c = 0; c < n; ++c) {
        if (evaluated[c]) continue;
        for (std::size_t a = 0; a < obs.size(); ++a) k_star[static_cast<Eigen::Index>(a)] = kernel(c, obs.indices[a]);
        scores[c] = expected_improvement(gp.predict(k_star, k_self), y_max);
      }
      const std::size_t next = select_next(scores, evaluated);
      log.evaluate(next, theta);
      evaluated[next] = 1;
    }
    if (cfg.final_fit) {
      const ObservationSet obs = standardized();
      if (!theta || obs.size() > last_fit_size) refit(obs);
    }
  } catch (const std::exception& e) {
    record.aborted = true;
    record.error = e.what();
  }
  detail::finish(record, cfg, started);
  return record;
}

inline RunRecord run_random(const BoProblem& problem, const BoConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  detail::check_run_args(problem, cfg);
  RunRecord record;
  record.strategy = Strategy::random;
  record.seed = cfg.seed;
  detail::EvaluationLog log(problem, record);
  try {
    for (std::size_t i : initial_design(problem.ids.size(), cfg.budget, cfg.seed)) log.evaluate(i);
  } catch (const std::exception& e) {
    record.aborted = true;
    record.error = e.what();
  }
  detail::finish(record, cfg, started);
  return record;
}

/// Generational GA on decision bit-vectors: tournament selection, single-point
/// crossover, per-bit mutation. The first population members are the shared
/// initial design. Repeated genomes are served from the evaluation cache.
inline RunRecord run_ga(const BoProblem& problem, const BoConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  detail::check_run_args(problem, cfg);
  if (!problem.encoding) throw UnsupportedError("ga needs a bit-vector encoding of the candidates");
  const BitEncoding& enc = *problem.encoding;
  const GaOptions& o = cfg.ga;
  RunRecord record;
  record.strategy = Strategy::ga;
  record.seed = cfg.seed;
  detail::EvaluationLog log(problem, record);
  Rng rng(derive_seed(cfg.seed, {0x6A}));
  const std::uint64_t mask = enc.bits >= 64 ? ~0ULL : ((1ULL << enc.bits) - 1);

  auto fitness = [&](std::uint64_t code) {
    auto idx = enc.index_of(code);
    if (!idx) return -std::numeric_limits<double>::infinity();
    if (log.count() >= cfg.budget && !log.seen(*idx)) return -std::numeric_limits<double>::infinity();
    return log.evaluate(*idx);
  };

  try {
    std::vector<std::uint64_t> pop;
    for (std::size_t i : initial_design(problem.ids.size(), std::min(cfg.n_init, o.population), cfg.seed))
      pop.push_back(enc.code_of(i));
    while (pop.size() < o.population) pop.push_back(rng() & mask);
    std::vector<double> fit(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = fitness(pop[i]);

    auto tournament = [&]() {
      std::size_t best = uniform_index(rng, pop.size());
      for (std::size_t t = 1; t < o.tournament; ++t) {
        std::size_t c = uniform_index(rng, pop.size());
        if (fit[c] > fit[best]) best = c;
      }
      return pop[best];
    };
    for (std::size_t gen = 0; gen < o.max_generations && log.count() < cfg.budget; ++gen) {
      std::vector<std::uint64_t> next;
      while (next.size() < pop.size()) {
        std::uint64_t a = tournament(), b = tournament();
        if (enc.bits > 1 && uniform01(rng) < o.crossover_rate) {
          const int point = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(enc.bits - 1)));
          const std::uint64_t low = (1ULL << point) - 1;
          const std::uint64_t ca = (a & low) | (b & ~low), cb = (b & low) | (a & ~low);
          a = ca & mask;
          b = cb & mask;
        }
        for (std::uint64_t* child : {&a, &b}) {
          for (int bit = 0; bit < enc.bits; ++bit)
            if (uniform01(rng) < o.mutation_rate) *child ^= 1ULL << bit;
          if (next.size() < pop.size()) next.push_back(*child);
        }
      }
      pop.swap(next);
      for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = fitness(pop[i]);
    }
  } catch (const std::exception& e) {
    record.aborted = true;
    record.error = e.what();
  }
  detail::finish(record, cfg, started);
  return record;
}

/// Temperature at which a solution worse by `delta` is accepted with
/// probability `p`.
inline double sa_temperature(double delta, double p) { return -delta / std::log(p); }

inline double sa_acceptance_probability(double worse_by, double temperature) {
  return std::exp(-worse_by / temperature);
}

/// Standard deviation of the finite initial values, or 1 when it vanishes.
inline double sa_calibration_delta(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.size() < 2) return 1.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  return sd > 0.0 ? sd : 1.0;
}

/// Simulated annealing with single-bit-flip moves. The temperature follows a
/// geometric schedule from the level accepting a delta0-worse move with
/// probability accept_start down to accept_end, indexed by the fraction of the
/// budget spent; delta0 is the spread of the initial design.
inline RunRecord run_sa(const BoProblem& problem, const BoConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  detail::check_run_args(problem, cfg);
  if (!problem.encoding) throw UnsupportedError("sa needs a bit-vector encoding of the candidates");
  const BitEncoding& enc = *problem.encoding;
  const SaOptions& o = cfg.sa;
  RunRecord record;
  record.strategy = Strategy::sa;
  record.seed = cfg.seed;
  detail::EvaluationLog log(problem, record);
  Rng rng(derive_seed(cfg.seed, {0x5A}));

  try {
    std::vector<double> init_values;
    std::uint64_t current = 0;
    double current_y = -std::numeric_limits<double>::infinity();
    const auto init = initial_design(problem.ids.size(), std::max<std::size_t>(cfg.n_init, 1), cfg.seed);
    for (std::size_t i : init) {
      const double y = log.evaluate(i);
      init_values.push_back(y);
      if (y > current_y || init_values.size() == 1) {
        current_y = y;
        current = enc.code_of(i);
      }
    }
    const double delta0 = sa_calibration_delta(init_values);
    const double t_start = sa_temperature(delta0, o.accept_start);
    const double t_end = sa_temperature(delta0, o.accept_end);
    const std::size_t n0 = log.count();
    const std::size_t max_steps = o.max_steps_per_evaluation * std::max<std::size_t>(cfg.budget, 1);
    for (std::size_t step = 0; log.count() < cfg.budget && step < max_steps; ++step) {
      const double progress = cfg.budget > n0
                                  ? static_cast<double>(log.count() - n0) / static_cast<double>(cfg.budget - n0)
                                  : 1.0;
      const double temperature = t_start * std::pow(t_end / t_start, std::clamp(progress, 0.0, 1.0));
      for (std::size_t trial = 0; trial < o.trials_per_cycle && log.count() < cfg.budget; ++trial) {
        const std::uint64_t cand = current ^ (1ULL << uniform_index(rng, static_cast<std::size_t>(enc.bits)));
        auto idx = enc.index_of(cand);
        if (!idx) continue;
        const double y = log.evaluate(*idx);
        if (y >= current_y ||
            (std::isfinite(y) && uniform01(rng) < sa_acceptance_probability(current_y - y, temperature))) {
          current = cand;
          current_y = y;
        }
      }
    }
  } catch (const std::exception& e) {
    record.aborted = true;
    record.error = e.what();
  }
  detail::finish(record, cfg, started);
  return record;
}

/// random = no model; bo_f = GBO with alpha pinned to 0; bo_g = GBO with every
/// beta pinned to 0; ga and sa search the bit-vector encoding.
inline RunRecord run_baseline(Strategy kind, const BoProblem& problem, const BoConfig& cfg) {
  switch (kind) {
    case Strategy::random: return run_random(problem, cfg);
    case Strategy::bo_f: return run_gbo(problem, cfg, true, false);
    case Strategy::bo_g: return run_gbo(problem, cfg, false, true);
    case Strategy::ga: return run_ga(problem, cfg);
    case Strategy::sa: return run_sa(problem, cfg);
    case Strategy::gbo: return run_gbo(problem, cfg);
  }
  throw ParameterError("unknown strategy");
}

inline RunRecord run_strategy(Strategy kind, const BoProblem& problem, const BoConfig& cfg) {
  return run_baseline(kind, problem, cfg);
}

}  // namespace gbo

#endif  // GBO_BO_HPP
