#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qfall {

using complex = std::complex<double>;

// Spatial vectors carry their own dimension (1..3).
using Vec = std::vector<double>;

// Row-major d x d matrix.
using Mat = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;

inline double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  return m;
}

inline Vec difference(std::span<const double> a, std::span<const double> b) {
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace qfall
