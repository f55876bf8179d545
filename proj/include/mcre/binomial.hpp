#pragma once

#include <cstddef>

namespace mcre {

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Exact two-sided Clopper-Pearson interval for `hits` successes in `trials`
/// at the given confidence level (e.g. 0.99).
ConfidenceInterval clopper_pearson(std::size_t hits, std::size_t trials, double confidence);

}  // namespace mcre
