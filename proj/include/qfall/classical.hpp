#pragma once

#include <vector>

#include "qfall/curvature.hpp"
#include "qfall/types.hpp"

namespace qfall::classical {

struct ClassicalState {
  Vec x;
  Vec v;
  double t = 0.0;
};

/// Time-stamped position samples; the common currency of match_metric.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
};

/// Linearised geodesic deviation: a = -R x.
Vec tidal_acceleration(std::span<const double> x, const curvature::TidalMatrix& tidal);

/// Fixed-step RK4 on x' = v, v' = -R x. Returns n_steps + 1 states. A negative
/// dt integrates backwards.
std::vector<ClassicalState> rk4_integrate(const ClassicalState& s0,
                                          const curvature::TidalMatrix& tidal, double dt,
                                          long n_steps);

/// E = |v|^2/2 + x.R.x/2, conserved by the exact flow.
double tidal_energy(const ClassicalState& s, const curvature::TidalMatrix& tidal);

Trajectory positions(const std::vector<ClassicalState>& states, long stride = 1);

/// max_t |x_a(t) - x_b(t)| (Euclidean per sample). Timestamps must agree.
double match_metric(const Trajectory& a, const Trajectory& b);

bool timestamps_match(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace qfall::classical
