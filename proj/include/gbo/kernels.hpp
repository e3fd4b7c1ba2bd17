#ifndef GBO_KERNELS_HPP
#define GBO_KERNELS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gbo/embedding.hpp"
#include "gbo/errors.hpp"
#include "gbo/features.hpp"
#include "gbo/graphlets.hpp"

namespace gbo {

inline double base_graphlet_kernel(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("graphlet profiles use different vocabularies");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// psi_a^T diag(m) psi_b
inline double deep_graphlet_kernel(std::span<const double> a, std::span<const double> b,
                                   std::span<const double> m_diag) {
  if (a.size() != b.size() || a.size() != m_diag.size())
    throw ParameterError("deep graphlet kernel: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * m_diag[i] * b[i];
  return s;
}

/// K(i,j) / sqrt(K(i,i) K(j,j)); the diagonal is set to exactly 1.
inline Eigen::MatrixXd normalize_kernel(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols()) throw ParameterError("normalize_kernel: matrix not square");
  const Eigen::Index n = raw.rows();
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(raw(i, i) > 0.0))
      throw DegenerateGraphError("zero self-kernel at index " + std::to_string(i));
    inv[i] = 1.0 / std::sqrt(raw(i, i));
  }
  Eigen::MatrixXd out = inv.asDiagonal() * raw * inv.asDiagonal();
  out.diagonal().setOnes();
  return out;
}

/// Squared-exponential kernel with one length scale per dimension.
inline double seard(std::span<const double> a, std::span<const double> b,
                    std::span<const double> length_scales) {
  if (a.size() != b.size() || a.size() != length_scales.size())
    throw ParameterError("seard: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(length_scales[i] > 0.0)) throw ParameterError("seard: length scales must be positive");
    const double r = (a[i] - b[i]) / length_scales[i];
    s += r * r;
  }
  return std::exp(-0.5 * s);
}

/// theta = {w, d, l_f, sigma, alpha, beta_j}: one length-scale vector and one
/// weight per feature group.
struct KernelParams {
  int window = 5;
  int dim = 5;
  std::vector<Eigen::VectorXd> length_scales;
  double sigma = 1e-3;
  double alpha = 1.0;
  std::vector<double> betas;

  double beta_mean() const {
    if (betas.empty()) return 0.0;
    double s = 0.0;
    for (double b : betas) s += b;
    return s / static_cast<double>(betas.size());
  }

  /// mean(beta) / alpha
  double gamma() const {
    if (alpha == 0.0) return std::numeric_limits<double>::infinity();
    return beta_mean() / alpha;
  }

  void validate(const FeatureGroups& groups) const {
    if (alpha < 0.0) throw ParameterError("kernel weight alpha is negative");
    if (betas.size() != groups.size() || length_scales.size() != groups.size())
      throw ParameterError("kernel params need one beta and one length-scale vector per group");
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (betas[j] < 0.0) throw ParameterError("kernel weight beta is negative");
      if (length_scales[j].size() != groups[j].dim())
        throw ParameterError("length-scale vector does not match feature group '" +
                             groups[j].name + "'");
    }
  }
};

/// Normalized graph kernel for one (window, dim) grid point, evaluated on
/// demand from the candidates' graphlet profiles and the diagonal weights, or
/// read from an explicit table.
class GraphKernel {
 public:
  GraphKernel(std::shared_ptr<const Eigen::MatrixXd> psi, Eigen::VectorXd m_diag, int window,
              int dim)
      : psi_(std::move(psi)), m_(std::move(m_diag)), window_(window), dim_(dim) {
    if (m_.size() != psi_->cols()) throw ParameterError("graph kernel: M length != vocabulary");
    weighted_ = *psi_ * m_.asDiagonal();
    self_.resize(psi_->rows());
    for (Eigen::Index i = 0; i < psi_->rows(); ++i) {
      const double s = weighted_.row(i).dot(psi_->row(i));
      if (!(s > 0.0)) throw DegenerateGraphError("zero self-kernel for candidate " + std::to_string(i));
      self_[i] = 1.0 / std::sqrt(s);
    }
  }

  GraphKernel(Eigen::MatrixXd table, int window, int dim)
      : table_(std::move(table)), window_(window), dim_(dim) {}

  int window() const noexcept { return window_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const {
    return static_cast<std::size_t>(psi_ ? psi_->rows() : table_.rows());
  }

  double operator()(std::size_t i, std::size_t j) const {
    // ordered so that k(i, j) and k(j, i) agree bit for bit
    const auto a = static_cast<Eigen::Index>(std::min(i, j)), b = static_cast<Eigen::Index>(std::max(i, j));
    if (!psi_) return table_(a, b);
    if (a == b) return 1.0;
    return weighted_.row(a).dot(psi_->row(b)) * self_[a] * self_[b];
  }

  /// Unnormalized psi_i^T M psi_j, available for profile-backed kernels.
  double raw(std::size_t i, std::size_t j) const {
    if (!psi_) throw UnsupportedError("raw kernel values need graphlet profiles");
    return weighted_.row(static_cast<Eigen::Index>(i)).dot(psi_->row(static_cast<Eigen::Index>(j)));
  }

 private:
  std::shared_ptr<const Eigen::MatrixXd> psi_;
  Eigen::VectorXd m_;
  Eigen::MatrixXd weighted_;
  Eigen::VectorXd self_;
  Eigen::MatrixXd table_;
  int window_, dim_;
};

enum class GraphKernelVariant { deep, base };

struct GraphKernelOptions {
  GraphKernelVariant variant = GraphKernelVariant::deep;
  int k = 4;
  std::size_t samples = 500;
  std::size_t samples_per_node = 10;
  std::uint64_t seed = 0;
  SkipGramOptions skipgram;  // window, dim and seed are set per grid point
  std::optional<std::vector<std::vector<NodeId>>> partition;
};

/// Graph kernels for every (window, dim) grid point over a fixed candidate
/// set. Profiles and the corpus are computed once; embeddings are trained on
/// first use of a grid point and cached. Safe for concurrent use.
class GraphKernelBank {
 public:
  GraphKernelBank(const CandidateSet& set, GraphKernelOptions opt) : opt_(std::move(opt)) {
    const auto& table = GraphletTable::get(opt_.k);
    auto psi = std::make_shared<Eigen::MatrixXd>(static_cast<Eigen::Index>(set.size()),
                                                 static_cast<Eigen::Index>(table.class_count()));
    for (std::size_t i = 0; i < set.size(); ++i)
      psi->row(static_cast<Eigen::Index>(i)) =
          sample_graphlets(set.graphs[i], opt_.k, opt_.samples, opt_.seed, opt_.partition)
              .transpose();
    psi_ = std::move(psi);
    if (opt_.variant == GraphKernelVariant::deep) {
      corpus_ = build_corpus(set, opt_.k, opt_.samples_per_node, derive_seed(opt_.seed, {0xC0}));
    }
  }

  /// Bank over precomputed tables, e.g. loaded from a kernel cache file.
  explicit GraphKernelBank(std::map<std::pair<int, int>, Eigen::MatrixXd> tables) {
    for (auto& [key, m] : tables)
      kernels_.emplace(key, std::make_shared<GraphKernel>(std::move(m), key.first, key.second));
  }

  const Eigen::MatrixXd& profiles() const {
    if (!psi_) throw UnsupportedError("table-backed kernel bank has no profiles");
    return *psi_;
  }
  const GraphKernelOptions& options() const noexcept { return opt_; }

  /// The base kernel ignores (window, dim): every grid point shares M = I.
  const GraphKernel& at(int window, int dim) const {
    std::pair<int, int> key{window, dim};
    if (psi_ && opt_.variant == GraphKernelVariant::base) key = {0, 0};
    std::lock_guard lock(mu_);
    auto it = kernels_.find(key);
    if (it != kernels_.end()) return *it->second;
    if (!psi_)
      throw ParameterError("kernel cache has no entry for w=" + std::to_string(window) +
                           " d=" + std::to_string(dim));
    Eigen::VectorXd m;
    if (opt_.variant == GraphKernelVariant::base) {
      m = Eigen::VectorXd::Ones(psi_->cols());
    } else {
      SkipGramOptions sg = opt_.skipgram;
      sg.window = window;
      sg.dim = dim;
      sg.seed = derive_seed(opt_.seed, {static_cast<std::uint64_t>(window),
                                        static_cast<std::uint64_t>(dim)});
      m = train_embeddings(corpus_, static_cast<std::size_t>(psi_->cols()), sg).m_diag;
    }
    auto k = std::make_shared<GraphKernel>(psi_, std::move(m), window, dim);
    return *kernels_.emplace(key, std::move(k)).first->second;
  }

 private:
  GraphKernelOptions opt_;
  std::shared_ptr<const Eigen::MatrixXd> psi_;
  std::vector<Sentence> corpus_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<GraphKernel>> kernels_;
};

/// alpha * k_graph(i,j) + sum_j beta_j * seard(F_j[i], F_j[j]; l_j)
inline double combined_kernel(std::size_t i, std::size_t j, const GraphKernel& graph,
                              const FeatureGroups& groups, const KernelParams& p) {
  p.validate(groups);
  double value = p.alpha == 0.0 ? 0.0 : p.alpha * graph(i, j);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (p.betas[g] == 0.0) continue;
    const auto& f = groups[g].values;
    const Eigen::VectorXd a = f.row(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd b = f.row(static_cast<Eigen::Index>(j));
    value += p.betas[g] * seard(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                                std::span<const double>(b.data(), static_cast<std::size_t>(b.size())),
                                std::span<const double>(p.length_scales[g].data(),
                                                        static_cast<std::size_t>(p.length_scales[g].size())));
  }
  return value;
}

/// Combined kernel with fixed parameters, usable as a (i, j) -> double callable.
struct CombinedKernel {
  const GraphKernel* graph;
  const FeatureGroups* groups;
  KernelParams params;

  double operator()(std::size_t i, std::size_t j) const {
    return combined_kernel(i, j, *graph, *groups, params);
  }
};

// Kernel cache: text table with one `id_a id_b w d value` row per unordered
// candidate pair (i <= j) and grid point.

inline void write_kernel_cache(const std::string& path, const std::vector<std::string>& ids,
                               const GraphKernelBank& bank,
                               const std::vector<std::pair<int, int>>& grid) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write kernel cache " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# id_a id_b w d k_normalized\n";
  for (auto [w, d] : grid) {
    const GraphKernel& k = bank.at(w, d);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i; j < ids.size(); ++j)
        out << ids[i] << ' ' << ids[j] << ' ' << w << ' ' << d << ' ' << k(i, j) << '\n';
  }
}

inline std::map<std::pair<int, int>, Eigen::MatrixXd> read_kernel_cache(
    const std::string& path, const std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open kernel cache");
  std::map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<Eigen::Index>(i);
  const auto n = static_cast<Eigen::Index>(ids.size());
  std::map<std::pair<int, int>, Eigen::MatrixXd> tables;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b;
    int w, d;
    double v;
    if (!(ss >> a >> b >> w >> d >> v)) throw ParseError(path, lineno, "malformed cache row");
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end())
      throw ParseError(path, lineno, "unknown graph id in cache row");
    auto it = tables.try_emplace({w, d}, Eigen::MatrixXd::Constant(n, n, std::nan(""))).first;
    it->second(ia->second, ib->second) = v;
    it->second(ib->second, ia->second) = v;
  }
  for (const auto& [key, m] : tables)
    if (m.hasNaN())
      throw ParseError(path, lineno,
                       "kernel cache incomplete for w=" + std::to_string(key.first) +
                           " d=" + std::to_string(key.second));
  return tables;
}

}  // namespace gbo

#endif  // GBO_KERNELS_HPP
