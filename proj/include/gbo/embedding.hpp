#ifndef GBO_EMBEDDING_HPP
#define GBO_EMBEDDING_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gbo/errors.hpp"
#include "gbo/graphlets.hpp"
#include "gbo/random.hpp"

namespace gbo {

struct SkipGramOptions {
  int window = 5;
  int dim = 5;
  int negative = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

/// Graphlet embeddings and the diagonal weights M_ii = <v_i, v_i> used by the
/// deep graphlet kernel.
struct EmbeddingModel {
  int window = 0;
  int dim = 0;
  Eigen::MatrixXd vectors;  // vocab x dim
  Eigen::VectorXd m_diag;
};

/// Skip-gram with negative sampling. Each token predicts every other token
/// within `window` positions of the same sentence; negatives are drawn from
/// the unigram distribution raised to 0.75. The learning rate decays
/// linearly to 1e-4 of its start value. Deterministic for a fixed seed.
inline EmbeddingModel train_embeddings(const std::vector<Sentence>& corpus, std::size_t vocab_size,
                                       const SkipGramOptions& opt) {
  if (opt.window < 1 || opt.dim < 1) throw ParameterError("skip-gram: window and dim must be >= 1");
  if (vocab_size == 0) throw ParameterError("skip-gram: empty vocabulary");
  std::size_t total = 0;
  std::vector<double> freq(vocab_size, 0.0);
  for (const auto& s : corpus) {
    for (auto t : s) {
      if (t >= vocab_size) throw ParameterError("skip-gram: token outside vocabulary");
      freq[t] += 1.0;
    }
    total += s.size();
  }
  if (total == 0) throw ParameterError("skip-gram: empty corpus");

  std::vector<double> cumulative(vocab_size);
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    acc += std::pow(freq[i], 0.75);
    cumulative[i] = acc;
  }

  const auto V = static_cast<Eigen::Index>(vocab_size);
  const Eigen::Index d = opt.dim;
  Rng rng(opt.seed);
  Eigen::MatrixXd in(V, d), out = Eigen::MatrixXd::Zero(V, d);
  for (Eigen::Index i = 0; i < V; ++i)
    for (Eigen::Index j = 0; j < d; ++j) in(i, j) = (uniform01(rng) - 0.5) / static_cast<double>(d);

  auto draw_negative = [&]() {
    double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<Eigen::Index>(std::min<std::size_t>(it - cumulative.begin(), vocab_size - 1));
  };
  auto sigmoid = [](double x) {
    x = std::clamp(x, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-x));
  };

  const double work = static_cast<double>(opt.epochs) * static_cast<double>(total) + 1.0;
  double processed = 0.0;
  Eigen::VectorXd grad_in(d);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& s : corpus) {
      const auto len = static_cast<long>(s.size());
      for (long i = 0; i < len; ++i, processed += 1.0) {
        const double lr = opt.learning_rate * std::max(1e-4, 1.0 - processed / work);
        const Eigen::Index center = s[static_cast<std::size_t>(i)];
        const long lo = std::max(0L, i - opt.window), hi = std::min(len - 1, i + opt.window);
        for (long j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const Eigen::Index context = s[static_cast<std::size_t>(j)];
          grad_in.setZero();
          for (int n = 0; n <= opt.negative; ++n) {
            Eigen::Index target = context;
            double label = 1.0;
            if (n > 0) {
              target = draw_negative();
              if (target == context) continue;
              label = 0.0;
            }
            const double g = (label - sigmoid(in.row(center).dot(out.row(target)))) * lr;
            grad_in += g * out.row(target).transpose();
            out.row(target) += g * in.row(center);
          }
          in.row(center) += grad_in.transpose();
        }
      }
    }
  }
  EmbeddingModel model;
  model.window = opt.window;
  model.dim = opt.dim;
  model.m_diag = in.rowwise().squaredNorm();
  model.vectors = std::move(in);
  return model;
}

}  // namespace gbo

#endif  // GBO_EMBEDDING_HPP
