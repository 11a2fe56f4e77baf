#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "qfall/curvature.hpp"
#include "qfall/spectral_grid.hpp"
#include "qfall/types.hpp"

// Data-parallel inner loops of the propagator and the observables. The
// OpenMP versions reduce over a fixed block decomposition that depends only
// on the field size, so results are bit-identical for any thread count.
// The serial versions in kernels::reference are kept as the test oracle.
namespace qfall::kernels {

inline constexpr std::size_t kReductionBlocks = 64;

struct Moments {
  double mass = 0.0;                     // sum |f|^2
  std::array<double, 3> first{};         // sum coord_a |f|^2
};

void scale(std::span<complex> field, double factor);
void multiply(std::span<complex> field, std::span<const complex> factors);

/// exp(-i * coefficient * k^2) on the wavenumber lattice.
ComplexField kinetic_phase_table(const SpectralGrid& grid, double coefficient);

/// exp(-i * 2 * coefficient * (rate(x) - 1)) on the position lattice. With the
/// first-order rate this is exp(-i * coefficient * x.R.x).
ComplexField tidal_phase_table(const SpectralGrid& grid, const curvature::TidalMatrix& tidal,
                               double coefficient, curvature::RateModel model);

double density_sum(std::span<const complex> field);
Moments position_moments(std::span<const complex> field, const SpectralGrid& grid);
/// sum (x-m)_a (x-m)_b |f|^2, row-major 3x3 (unused axes zero).
std::array<double, 9> central_second_moments(std::span<const complex> field,
                                             const SpectralGrid& grid,
                                             std::span<const double> mean);
Moments wavenumber_moments(std::span<const complex> spectrum, const SpectralGrid& grid);
/// sum Im(conj(a) * b)
double imag_conj_dot(std::span<const complex> a, std::span<const complex> b);
/// sum |f|^2 over nodes with some |x_a| > inner_half_width.
double boundary_mass(std::span<const complex> field, const SpectralGrid& grid,
                     double inner_half_width);

namespace reference {

void multiply(std::span<complex> field, std::span<const complex> factors);
ComplexField kinetic_phase_table(const SpectralGrid& grid, double coefficient);
ComplexField tidal_phase_table(const SpectralGrid& grid, const curvature::TidalMatrix& tidal,
                               double coefficient, curvature::RateModel model);
double density_sum(std::span<const complex> field);
Moments position_moments(std::span<const complex> field, const SpectralGrid& grid);
std::array<double, 9> central_second_moments(std::span<const complex> field,
                                             const SpectralGrid& grid,
                                             std::span<const double> mean);
Moments wavenumber_moments(std::span<const complex> spectrum, const SpectralGrid& grid);
double imag_conj_dot(std::span<const complex> a, std::span<const complex> b);
double boundary_mass(std::span<const complex> field, const SpectralGrid& grid,
                     double inner_half_width);

}  // namespace reference

}  // namespace qfall::kernels
