#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace qratio {

using cplx = std::complex<double>;

// Pairwise (cascade) summation with a fixed split order, so results are
// reproducible bit for bit for a given input.
double pairwise_sum(std::span<const double> values);

template <class F>
double pairwise_sum_of(std::size_t n, F&& term) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  struct Rec {
    F& f;
    double operator()(std::size_t lo, std::size_t hi) const {
      const std::size_t len = hi - lo;
      if (len <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
      }
      const std::size_t mid = lo + len / 2;
      return (*this)(lo, mid) + (*this)(mid, hi);
    }
  };
  return Rec{term}(0, n);
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace qratio
