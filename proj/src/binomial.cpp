#include "mcre/binomial.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <stdexcept>

namespace mcre {

ConfidenceInterval clopper_pearson(std::size_t hits, std::size_t trials, double confidence) {
  if (trials == 0 || hits > trials)
    throw std::invalid_argument("clopper_pearson: need 0 <= hits <= trials, trials >= 1");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("clopper_pearson: confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const double k = static_cast<double>(hits);
  const double n = static_cast<double>(trials);
  ConfidenceInterval ci;
  // Quantiles of Beta(k, n-k+1) and Beta(k+1, n-k).
  if (hits > 0) ci.lower = boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  if (hits < trials) ci.upper = boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace mcre
