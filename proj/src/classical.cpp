#include "qfall/classical.hpp"

#include <cmath>
#include <sstream>

#include "qfall/error.hpp"

namespace qfall::classical {

namespace {

constexpr double kSpeedGuard = 0.1;

// f(s) for the first-order system (x, v).
void derivative(const curvature::TidalMatrix& tidal, const Vec& x, const Vec& v, Vec& dx, Vec& dv) {
  dx = v;
  dv = tidal_acceleration(x, tidal);
}

Vec axpy(const Vec& y, double a, const Vec& x) {
  Vec out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * x[i];
  return out;
}

}  // namespace

Vec tidal_acceleration(std::span<const double> x, const curvature::TidalMatrix& tidal) {
  if (x.size() != static_cast<std::size_t>(tidal.dim())) {
    throw Error(ErrorCode::SizeMismatch, "position/tidal dimension");
  }
  Vec a = tidal.apply(x);
  for (double& c : a) c = -c;
  return a;
}

std::vector<ClassicalState> rk4_integrate(const ClassicalState& s0,
                                          const curvature::TidalMatrix& tidal, double dt,
                                          long n_steps) {
  const std::size_t d = static_cast<std::size_t>(tidal.dim());
  if (s0.x.size() != d || s0.v.size() != d) {
    throw Error(ErrorCode::SizeMismatch, "classical state dimension");
  }
  if (n_steps < 0) throw Error(ErrorCode::InvalidArgument, "n_steps must be non-negative");
  if (!(std::abs(dt) * std::sqrt(tidal.max_abs_entry()) < 0.1)) {
    std::ostringstream os;
    os << "|dt| sqrt(max|R|) = " << std::abs(dt) * std::sqrt(tidal.max_abs_entry())
       << " is not below 0.1";
    throw Error(ErrorCode::StepTooLarge, os.str());
  }

  std::vector<ClassicalState> out;
  out.reserve(static_cast<std::size_t>(n_steps) + 1);
  out.push_back(s0);
  Vec k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
  for (long s = 0; s < n_steps; ++s) {
    const ClassicalState& cur = out.back();
    derivative(tidal, cur.x, cur.v, k1x, k1v);
    derivative(tidal, axpy(cur.x, 0.5 * dt, k1x), axpy(cur.v, 0.5 * dt, k1v), k2x, k2v);
    derivative(tidal, axpy(cur.x, 0.5 * dt, k2x), axpy(cur.v, 0.5 * dt, k2v), k3x, k3v);
    derivative(tidal, axpy(cur.x, dt, k3x), axpy(cur.v, dt, k3v), k4x, k4v);
    ClassicalState next;
    next.x = cur.x;
    next.v = cur.v;
    for (std::size_t i = 0; i < d; ++i) {
      next.x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
      next.v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    next.t = s0.t + static_cast<double>(s + 1) * dt;
    if (!(euclidean_norm(next.v) < kSpeedGuard)) {
      throw Error(ErrorCode::OutsideValidity, "classical speed left the low-energy regime");
    }
    out.push_back(std::move(next));
  }
  return out;
}

double tidal_energy(const ClassicalState& s, const curvature::TidalMatrix& tidal) {
  double v2 = 0.0;
  for (double c : s.v) v2 += c * c;
  return 0.5 * v2 + 0.5 * tidal.quadratic_form(s.x);
}

Trajectory positions(const std::vector<ClassicalState>& states, long stride) {
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
  Trajectory tr;
  for (std::size_t i = 0; i < states.size(); i += static_cast<std::size_t>(stride)) {
    tr.t.push_back(states[i].t);
    tr.x.push_back(states[i].x);
  }
  return tr;
}

bool timestamps_match(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) return false;
  }
  return true;
}

double match_metric(const Trajectory& a, const Trajectory& b) {
  if (!timestamps_match(a.t, b.t) || a.x.size() != a.t.size() || b.x.size() != b.t.size()) {
    throw Error(ErrorCode::TimestampMismatch, "trajectories are not sampled at the same times");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    if (a.x[i].size() != b.x[i].size()) throw Error(ErrorCode::SizeMismatch, "trajectory dimension");
    worst = std::max(worst, euclidean_norm(difference(a.x[i], b.x[i])));
  }
  return worst;
}

}  // namespace qfall::classical
