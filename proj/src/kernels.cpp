#include "qfall/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "qfall/error.hpp"

namespace qfall::kernels {

namespace {

using curvature::RateModel;
using curvature::TidalMatrix;

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::SizeMismatch, "kernel operands differ in size");
}

// Per-node building blocks shared by both loop flavours.

double node_k2(const SpectralGrid& grid, std::size_t flat) {
  const auto idx = grid.unravel(flat);
  const auto k = grid.wavenumbers();
  double k2 = 0.0;
  for (int a = 0; a < grid.dim(); ++a) k2 += k[idx[a]] * k[idx[a]];
  return k2;
}

std::array<double, 3> node_position(const SpectralGrid& grid, std::size_t flat) {
  const auto idx = grid.unravel(flat);
  const auto x = grid.positions();
  std::array<double, 3> p{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.dim(); ++a) p[a] = x[idx[a]];
  return p;
}

std::array<double, 3> node_wavenumber(const SpectralGrid& grid, std::size_t flat) {
  const auto idx = grid.unravel(flat);
  const auto k = grid.wavenumbers();
  std::array<double, 3> p{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.dim(); ++a) p[a] = k[idx[a]];
  return p;
}

complex tidal_factor(const SpectralGrid& grid, const TidalMatrix& tidal, double coefficient,
                     RateModel model, std::size_t flat) {
  const auto p = node_position(grid, flat);
  const std::span<const double> x(p.data(), static_cast<std::size_t>(grid.dim()));
  double phase = 0.0;
  if (model == RateModel::first_order) {
    phase = -coefficient * tidal.quadratic_form(x);
  } else {
    phase = -2.0 * coefficient * (curvature::proper_time_rate(x, tidal) - 1.0);
  }
  return std::polar(1.0, phase);
}

void add_position_moment(const SpectralGrid& grid, std::span<const complex> f, std::size_t i,
                         std::array<double, 4>& acc) {
  const double w = std::norm(f[i]);
  const auto p = node_position(grid, i);
  acc[0] += w;
  for (int a = 0; a < grid.dim(); ++a) acc[a + 1] += p[a] * w;
}

void add_wavenumber_moment(const SpectralGrid& grid, std::span<const complex> f, std::size_t i,
                           std::array<double, 4>& acc) {
  const double w = std::norm(f[i]);
  const auto k = node_wavenumber(grid, i);
  acc[0] += w;
  for (int a = 0; a < grid.dim(); ++a) acc[a + 1] += k[a] * w;
}

void add_central_second(const SpectralGrid& grid, std::span<const complex> f,
                        std::span<const double> mean, std::size_t i, std::array<double, 9>& acc) {
  const double w = std::norm(f[i]);
  const auto p = node_position(grid, i);
  const int d = grid.dim();
  for (int a = 0; a < d; ++a) {
    const double da = p[a] - mean[a];
    for (int b = a; b < d; ++b) acc[a * 3 + b] += da * (p[b] - mean[b]) * w;
  }
}

bool in_boundary_band(const SpectralGrid& grid, std::size_t i, double inner) {
  const auto p = node_position(grid, i);
  for (int a = 0; a < grid.dim(); ++a) {
    if (std::abs(p[a]) > inner) return true;
  }
  return false;
}

std::array<double, 9> mirror_upper(std::array<double, 9> m) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < a; ++b) m[a * 3 + b] = m[b * 3 + a];
  }
  return m;
}

Moments to_moments(const std::array<double, 4>& acc) {
  Moments m;
  m.mass = acc[0];
  m.first = {acc[1], acc[2], acc[3]};
  return m;
}

// Fixed-block reduction: block boundaries depend only on n, and the block
// partials are combined serially in block order.
template <std::size_t K, class Fn>
std::array<double, K> blocked_sum(std::size_t n, Fn&& accumulate) {
  std::array<std::array<double, K>, kReductionBlocks> partial{};
  const std::size_t blocks = std::clamp<std::size_t>(n, 1, kReductionBlocks);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < static_cast<long>(blocks); ++b) {
    const std::size_t lo = n * b / blocks;
    const std::size_t hi = n * (b + 1) / blocks;
    std::array<double, K> acc{};
    for (std::size_t i = lo; i < hi; ++i) accumulate(i, acc);
    partial[b] = acc;
  }
  std::array<double, K> total{};
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t k = 0; k < K; ++k) total[k] += partial[b][k];
  }
  return total;
}

template <std::size_t K, class Fn>
std::array<double, K> serial_sum(std::size_t n, Fn&& accumulate) {
  std::array<double, K> acc{};
  for (std::size_t i = 0; i < n; ++i) accumulate(i, acc);
  return acc;
}

}  // namespace

void scale(std::span<complex> field, double factor) {
  const long n = static_cast<long>(field.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) field[i] *= factor;
}

void multiply(std::span<complex> field, std::span<const complex> factors) {
  require_same_size(field.size(), factors.size());
  const long n = static_cast<long>(field.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) field[i] *= factors[i];
}

ComplexField kinetic_phase_table(const SpectralGrid& grid, double coefficient) {
  ComplexField table(grid.size());
  const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) table[i] = std::polar(1.0, -coefficient * node_k2(grid, i));
  return table;
}

ComplexField tidal_phase_table(const SpectralGrid& grid, const TidalMatrix& tidal,
                               double coefficient, RateModel model) {
  if (tidal.dim() != grid.dim()) throw Error(ErrorCode::SizeMismatch, "tidal/grid dimension");
  ComplexField table(grid.size());
  const long n = static_cast<long>(grid.size());
  // proper_time_rate may throw; exceptions must not escape an OpenMP region.
  bool failed = false;
#pragma omp parallel for schedule(static) reduction(|| : failed)
  for (long i = 0; i < n; ++i) {
    try {
      table[i] = tidal_factor(grid, tidal, coefficient, model, i);
    } catch (const Error&) {
      failed = true;
    }
  }
  if (failed) throw Error(ErrorCode::OutsideValidity, "clock rate not real somewhere on the grid");
  return table;
}

double density_sum(std::span<const complex> field) {
  return blocked_sum<1>(field.size(), [&](std::size_t i, auto& acc) {
    acc[0] += std::norm(field[i]);
  })[0];
}

Moments position_moments(std::span<const complex> field, const SpectralGrid& grid) {
  require_same_size(field.size(), grid.size());
  return to_moments(blocked_sum<4>(field.size(), [&](std::size_t i, auto& acc) {
    add_position_moment(grid, field, i, acc);
  }));
}

std::array<double, 9> central_second_moments(std::span<const complex> field,
                                             const SpectralGrid& grid,
                                             std::span<const double> mean) {
  require_same_size(field.size(), grid.size());
  return mirror_upper(blocked_sum<9>(field.size(), [&](std::size_t i, auto& acc) {
    add_central_second(grid, field, mean, i, acc);
  }));
}

Moments wavenumber_moments(std::span<const complex> spectrum, const SpectralGrid& grid) {
  require_same_size(spectrum.size(), grid.size());
  return to_moments(blocked_sum<4>(spectrum.size(), [&](std::size_t i, auto& acc) {
    add_wavenumber_moment(grid, spectrum, i, acc);
  }));
}

double imag_conj_dot(std::span<const complex> a, std::span<const complex> b) {
  require_same_size(a.size(), b.size());
  return blocked_sum<1>(a.size(), [&](std::size_t i, auto& acc) {
    acc[0] += std::imag(std::conj(a[i]) * b[i]);
  })[0];
}

double boundary_mass(std::span<const complex> field, const SpectralGrid& grid,
                     double inner_half_width) {
  require_same_size(field.size(), grid.size());
  return blocked_sum<1>(field.size(), [&](std::size_t i, auto& acc) {
    if (in_boundary_band(grid, i, inner_half_width)) acc[0] += std::norm(field[i]);
  })[0];
}

namespace reference {

void multiply(std::span<complex> field, std::span<const complex> factors) {
  require_same_size(field.size(), factors.size());
  for (std::size_t i = 0; i < field.size(); ++i) field[i] *= factors[i];
}

ComplexField kinetic_phase_table(const SpectralGrid& grid, double coefficient) {
  ComplexField table(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    table[i] = std::polar(1.0, -coefficient * node_k2(grid, i));
  }
  return table;
}

ComplexField tidal_phase_table(const SpectralGrid& grid, const TidalMatrix& tidal,
                               double coefficient, RateModel model) {
  if (tidal.dim() != grid.dim()) throw Error(ErrorCode::SizeMismatch, "tidal/grid dimension");
  ComplexField table(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    table[i] = tidal_factor(grid, tidal, coefficient, model, i);
  }
  return table;
}

double density_sum(std::span<const complex> field) {
  return serial_sum<1>(field.size(), [&](std::size_t i, auto& acc) {
    acc[0] += std::norm(field[i]);
  })[0];
}

Moments position_moments(std::span<const complex> field, const SpectralGrid& grid) {
  require_same_size(field.size(), grid.size());
  return to_moments(serial_sum<4>(field.size(), [&](std::size_t i, auto& acc) {
    add_position_moment(grid, field, i, acc);
  }));
}

std::array<double, 9> central_second_moments(std::span<const complex> field,
                                             const SpectralGrid& grid,
                                             std::span<const double> mean) {
  require_same_size(field.size(), grid.size());
  return mirror_upper(serial_sum<9>(field.size(), [&](std::size_t i, auto& acc) {
    add_central_second(grid, field, mean, i, acc);
  }));
}

Moments wavenumber_moments(std::span<const complex> spectrum, const SpectralGrid& grid) {
  require_same_size(spectrum.size(), grid.size());
  return to_moments(serial_sum<4>(spectrum.size(), [&](std::size_t i, auto& acc) {
    add_wavenumber_moment(grid, spectrum, i, acc);
  }));
}

double imag_conj_dot(std::span<const complex> a, std::span<const complex> b) {
  require_same_size(a.size(), b.size());
  return serial_sum<1>(a.size(), [&](std::size_t i, auto& acc) {
    acc[0] += std::imag(std::conj(a[i]) * b[i]);
  })[0];
}

double boundary_mass(std::span<const complex> field, const SpectralGrid& grid,
                     double inner_half_width) {
  require_same_size(field.size(), grid.size());
  return serial_sum<1>(field.size(), [&](std::size_t i, auto& acc) {
    if (in_boundary_band(grid, i, inner_half_width)) acc[0] += std::norm(field[i]);
  })[0];
}

}  // namespace reference

}  // namespace qfall::kernels
