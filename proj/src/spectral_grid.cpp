#include "qfall/spectral_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "qfall/error.hpp"
#include "qfall/kernels.hpp"

namespace qfall {

SpectralGrid::SpectralGrid(int dim, int points_per_axis, double extent)
    : dim_(dim), n_(points_per_axis), extent_(extent) {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::InvalidArgument, "grid dimension must be 1..3");
  if (points_per_axis < 8 || points_per_axis % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "points per axis must be even and >= 8");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw Error(ErrorCode::InvalidArgument, "grid extent must be positive");
  }
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n_);

  positions_.resize(n_);
  wavenumbers_.resize(n_);
  const double dk = 2.0 * kPi / extent_;
  for (int i = 0; i < n_; ++i) {
    positions_[i] = -0.5 * extent_ + i * extent_ / n_;
    wavenumbers_[i] = dk * lattice_mode(i, n_);
  }
}

double SpectralGrid::cell_volume() const { return std::pow(spacing(), dim_); }

std::array<int, 3> SpectralGrid::unravel(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::size_t SpectralGrid::ravel(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(idx[a]);
  return flat;
}

Vec SpectralGrid::position_of(std::size_t flat) const {
  const auto idx = unravel(flat);
  Vec x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = positions_[idx[a]];
  return x;
}

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t size = 1;
    for (int a = 0; a < dim; ++a) size *= static_cast<std::size_t>(n);
    fftw_complex* scratch = fftw_alloc_complex(size);
    int dims[3] = {n, n, n};
    fftw_plan plan =
        fftw_plan_dft(dim, dims, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw Error(ErrorCode::InvalidArgument, "FFTW could not build a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(ComplexField& data, const SpectralGrid& grid, int sign) {
  if (data.size() != grid.size()) {
    throw Error(ErrorCode::SizeMismatch, "field size does not match grid");
  }
  fftw_plan plan = plan_cache().get(grid.dim(), grid.points_per_axis(), sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, raw, raw);
  kernels::scale(data, 1.0 / std::sqrt(static_cast<double>(grid.size())));
}

}  // namespace

void forward_transform_inplace(ComplexField& field, const SpectralGrid& grid) {
  execute(field, grid, FFTW_FORWARD);
}

void inverse_transform_inplace(ComplexField& spectrum, const SpectralGrid& grid) {
  execute(spectrum, grid, FFTW_BACKWARD);
}

ComplexField forward_transform(std::span<const complex> field, const SpectralGrid& grid) {
  ComplexField out(field.begin(), field.end());
  forward_transform_inplace(out, grid);
  return out;
}

ComplexField inverse_transform(std::span<const complex> spectrum, const SpectralGrid& grid) {
  ComplexField out(spectrum.begin(), spectrum.end());
  inverse_transform_inplace(out, grid);
  return out;
}

}  // namespace qfall
