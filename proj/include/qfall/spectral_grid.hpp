#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "qfall/types.hpp"

namespace qfall {

/// Complex samples on a SpectralGrid in row-major axis order (axis 0 slowest).
using ComplexField = std::vector<complex>;

/// Uniform periodic lattice on [-L/2, L/2)^d with N points per axis and the
/// conjugate wavenumber lattice in standard DFT order.
class SpectralGrid {
 public:
  SpectralGrid(int dim, int points_per_axis, double extent);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double extent() const { return extent_; }
  std::size_t size() const { return size_; }
  double spacing() const { return extent_ / n_; }
  double cell_volume() const;
  double k_max() const { return kPi * n_ / extent_; }

  /// Node positions along one axis: -L/2 + n L / N.
  std::span<const double> positions() const { return positions_; }
  /// Wavenumbers along one axis: (2 pi / L) m, m in [0..N/2-1, -N/2..-1].
  std::span<const double> wavenumbers() const { return wavenumbers_; }
  static int lattice_mode(int index, int n) { return index < n / 2 ? index : index - n; }

  std::array<int, 3> unravel(std::size_t flat) const;
  std::size_t ravel(std::span<const int> idx) const;

  /// Position vector of a flat node index.
  Vec position_of(std::size_t flat) const;

  bool operator==(const SpectralGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && extent_ == o.extent_;
  }

 private:
  int dim_;
  int n_;
  double extent_;
  std::size_t size_;
  std::vector<double> positions_;
  std::vector<double> wavenumbers_;
};

/// Unitary DFT: both directions scaled by N^(-d/2), so sum|f|^2 == sum|F|^2.
/// Deterministic for a given build; safe to call from several threads.
ComplexField forward_transform(std::span<const complex> field, const SpectralGrid& grid);
ComplexField inverse_transform(std::span<const complex> spectrum, const SpectralGrid& grid);

void forward_transform_inplace(ComplexField& field, const SpectralGrid& grid);
void inverse_transform_inplace(ComplexField& spectrum, const SpectralGrid& grid);

}  // namespace qfall
