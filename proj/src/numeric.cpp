#include "qratio/numeric.hpp"

namespace qratio {

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_of(values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace qratio
