#ifndef GBO_ACQUISITION_HPP
#define GBO_ACQUISITION_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "gbo/errors.hpp"
#include "gbo/gp.hpp"

namespace gbo {

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// EI = (mu - y_max) Phi(z) + s phi(z), z = (mu - y_max) / s, s = sqrt(var).
/// With zero variance EI reduces to max(0, mu - y_max).
inline double expected_improvement(double mean, double var, double y_max) {
  const double improvement = mean - y_max;
  if (!(var > 0.0)) return std::max(0.0, improvement);
  const double s = std::sqrt(var);
  const double z = improvement / s;
  return std::max(0.0, improvement * normal_cdf(z) + s * normal_pdf(z));
}

inline double expected_improvement(const Posterior& p, double y_max) {
  return expected_improvement(p.mean, p.var, y_max);
}

/// Index of the highest score among unevaluated candidates; the lowest index
/// wins ties.
inline std::size_t select_next(std::span<const double> scores, const std::vector<char>& evaluated) {
  if (scores.size() != evaluated.size()) throw ParameterError("select_next: size mismatch");
  std::size_t best = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (evaluated[i]) continue;
    if (best == scores.size() || scores[i] > scores[best]) best = i;
  }
  if (best == scores.size()) throw ParameterError("select_next: candidate set exhausted");
  return best;
}

}  // namespace gbo

#endif  // GBO_ACQUISITION_HPP
