#include "qfall/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qfall/error.hpp"
#include "qfall/kernels.hpp"

namespace qfall::wavepacket {

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::gaussian: return "gaussian";
    case ShapeKind::skewed_gaussian: return "skewed_gaussian";
    case ShapeKind::double_peak: return "double_peak";
    case ShapeKind::custom_table: return "custom_table";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(std::string_view name) {
  if (name == "gaussian") return ShapeKind::gaussian;
  if (name == "skewed_gaussian") return ShapeKind::skewed_gaussian;
  if (name == "double_peak") return ShapeKind::double_peak;
  if (name == "custom_table") return ShapeKind::custom_table;
  throw Error(ErrorCode::ConfigError, "unknown packet shape '" + std::string(name) + "'");
}

PacketShape PacketShape::gaussian(double sigma) {
  PacketShape s;
  s.sigma = {sigma};
  return s;
}

PacketShape PacketShape::skewed_gaussian(double sigma, double skew) {
  PacketShape s;
  s.kind = ShapeKind::skewed_gaussian;
  s.sigma = {sigma};
  s.skew = skew;
  return s;
}

PacketShape PacketShape::double_peak(double sigma, double separation) {
  PacketShape s;
  s.kind = ShapeKind::double_peak;
  s.sigma = {sigma};
  s.separation = separation;
  return s;
}

PacketShape PacketShape::custom(std::vector<TableSample> table) {
  PacketShape s;
  s.kind = ShapeKind::custom_table;
  s.table = std::move(table);
  return s;
}

std::string PacketShape::label() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case ShapeKind::gaussian: os << "(sigma=" << sigma_along(0) << ")"; break;
    case ShapeKind::skewed_gaussian:
      os << "(sigma=" << sigma_along(0) << ",skew=" << skew << ")";
      break;
    case ShapeKind::double_peak:
      os << "(sigma=" << sigma_along(0) << ",separation=" << separation << ")";
      break;
    case ShapeKind::custom_table: os << "(" << table.size() << " samples)"; break;
  }
  return os.str();
}

std::vector<TableSample> read_table_csv(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open packet table " + path.string());
  std::vector<TableSample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cols.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw Error(ErrorCode::ConfigError,
                  path.string() + ":" + std::to_string(line_no) + ": non-numeric row");
    }
    if (cols.size() != static_cast<std::size_t>(dim + 2)) {
      throw Error(ErrorCode::ConfigError, path.string() + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(dim + 2) +
                                              " columns");
    }
    TableSample s;
    s.position.assign(cols.begin(), cols.begin() + dim);
    s.amplitude = {cols[dim], cols[dim + 1]};
    rows.push_back(std::move(s));
  }
  if (rows.empty()) throw Error(ErrorCode::ConfigError, "packet table " + path.string() + " is empty");
  return rows;
}

double skew_mean_offset(double sigma, double skew) {
  const double delta = skew / std::sqrt(1.0 + skew * skew);
  return sigma * delta * std::sqrt(2.0 / kPi);
}

WaveFunction::WaveFunction(SpectralGrid grid, ComplexField psi, double mass, double time)
    : grid_(std::move(grid)), psi_(std::move(psi)), mass_(mass), time_(time) {
  if (psi_.size() != grid_.size()) {
    throw Error(ErrorCode::SizeMismatch, "wave function size does not match grid");
  }
  if (!(mass_ > 0.0) || !std::isfinite(mass_)) {
    throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  }
  for (const auto& z : psi_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorCode::InvalidArgument, "wave function has non-finite samples");
    }
  }
}

double WaveFunction::rest_phase() const {
  const double turns = mass_ * time_;
  return 2.0 * kPi * (turns - std::floor(turns));
}

ComplexField WaveFunction::full_field() const {
  ComplexField out = psi_;
  kernels::multiply(out, ComplexField(out.size(), rest_phase_factor()));
  return out;
}

namespace {

double gaussian_amplitude(double u, double sigma) { return std::exp(-u * u / (4.0 * sigma * sigma)); }

void require_dim(std::span<const double> v, int dim, const char* what) {
  if (v.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::SizeMismatch, std::string(what) + " must have one entry per axis");
  }
}

void validate_shape(const SpectralGrid& grid, const PacketShape& shape) {
  const double L = grid.extent();
  if (shape.kind == ShapeKind::custom_table) {
    if (shape.table.empty()) throw Error(ErrorCode::InvalidArgument, "custom table is empty");
    return;
  }
  if (shape.sigma.size() != 1 && shape.sigma.size() != static_cast<std::size_t>(grid.dim())) {
    throw Error(ErrorCode::SizeMismatch, "sigma needs one value or one per axis");
  }
  for (double s : shape.sigma) {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (s > L / 8.0) {
      std::ostringstream os;
      os << "sigma " << s << " exceeds L/8 = " << L / 8.0;
      throw Error(ErrorCode::PacketTooWide, os.str());
    }
  }
  if (shape.kind == ShapeKind::double_peak) {
    if (!(shape.separation >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "peak separation must be non-negative");
    }
    if (!(shape.separation < L / 4.0)) {
      std::ostringstream os;
      os << "peak separation " << shape.separation << " is not below L/4 = " << L / 4.0;
      throw Error(ErrorCode::PacketTooWide, os.str());
    }
  }
  if (!std::isfinite(shape.skew)) throw Error(ErrorCode::InvalidArgument, "skew must be finite");
}

ComplexField sample_table(const SpectralGrid& grid, const PacketShape& shape,
                          std::span<const double> center) {
  ComplexField psi(grid.size(), complex{0.0, 0.0});
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  const double half = 0.5 * grid.extent();
  for (const auto& s : shape.table) {
    if (s.position.size() != static_cast<std::size_t>(grid.dim())) {
      throw Error(ErrorCode::SizeMismatch, "table position dimension does not match grid");
    }
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < grid.dim(); ++a) {
      const double x = center[a] + s.position[a];
      if (x < -half || x >= half) {
        throw Error(ErrorCode::PacketTooWide, "table sample lies outside the domain");
      }
      idx[a] = static_cast<int>(std::lround((x + half) / h)) % n;
    }
    psi[grid.ravel(idx)] = s.amplitude;
  }
  return psi;
}

}  // namespace

ComplexField sample_envelope(const SpectralGrid& grid, const PacketShape& shape,
                             std::span<const double> center) {
  require_dim(center, grid.dim(), "center");
  validate_shape(grid, shape);
  if (shape.kind == ShapeKind::custom_table) return sample_table(grid, shape, center);

  ComplexField psi(grid.size());
  const int d = grid.dim();
  const double half_sep = 0.5 * shape.separation;
  const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const Vec x = grid.position_of(i);
    double transverse = 1.0;
    for (int a = 1; a < d; ++a) transverse *= gaussian_amplitude(x[a] - center[a], shape.sigma_along(a));
    const double u = x[0] - center[0];
    const double s0 = shape.sigma_along(0);
    double along = 0.0;
    switch (shape.kind) {
      case ShapeKind::gaussian: along = gaussian_amplitude(u, s0); break;
      case ShapeKind::skewed_gaussian:
        // |psi|^2 is a skew-normal density: 2 phi(u) Phi(skew u).
        along = gaussian_amplitude(u, s0) *
                std::sqrt(std::erfc(-shape.skew * u / (s0 * std::sqrt(2.0))));
        break;
      case ShapeKind::double_peak:
        along = gaussian_amplitude(u - half_sep, s0) + gaussian_amplitude(u + half_sep, s0);
        break;
      case ShapeKind::custom_table: break;
    }
    psi[i] = along * transverse;
  }
  return psi;
}

WaveFunction make_packet(const SpectralGrid& grid, const PacketShape& shape,
                         std::span<const double> x0, std::span<const double> v0, double mass) {
  const int d = grid.dim();
  require_dim(x0, d, "x0");
  require_dim(v0, d, "v0");
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  }
  validate_shape(grid, shape);

  if (max_abs(x0) > grid.extent() / 4.0) {
    throw Error(ErrorCode::PacketTooWide, "packet centre lies beyond L/4 from the origin");
  }
  const double speed = euclidean_norm(v0);
  if (speed > 0.05) {
    std::ostringstream os;
    os << "|v0| = " << speed << " exceeds the low-energy limit 0.05";
    throw Error(ErrorCode::VelocityTooHigh, os.str());
  }
  const double k0 = 2.0 * kPi * mass * speed;
  if (shape.kind != ShapeKind::custom_table) {
    const double sigma_min = *std::min_element(shape.sigma.begin(), shape.sigma.end());
    if (k0 > grid.k_max() / 2.0 || k0 + 4.0 / sigma_min > grid.k_max()) {
      std::ostringstream os;
      os << "boost wavenumber " << k0 << " plus spectral width " << 4.0 / sigma_min
         << " reaches k_max = " << grid.k_max();
      throw Error(ErrorCode::AliasRisk, os.str());
    }
  } else if (k0 > grid.k_max() / 2.0) {
    throw Error(ErrorCode::AliasRisk, "boost wavenumber exceeds k_max / 2");
  }

  Vec center(x0.begin(), x0.end());
  if (shape.kind == ShapeKind::skewed_gaussian) {
    center[0] -= skew_mean_offset(shape.sigma_along(0), shape.skew);
  }
  ComplexField psi = sample_envelope(grid, shape, center);

  const long n = static_cast<long>(grid.size());
  const double kboost = 2.0 * kPi * mass;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const Vec x = grid.position_of(i);
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += kboost * v0[a] * x[a];
    psi[i] *= std::polar(1.0, phase);
  }

  const double total = kernels::density_sum(psi) * grid.cell_volume();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "packet envelope vanishes on the grid");
  kernels::scale(psi, 1.0 / std::sqrt(total));
  return WaveFunction(grid, std::move(psi), mass);
}

double norm(const WaveFunction& wf) {
  return kernels::density_sum(wf.psi()) * wf.grid().cell_volume();
}

Vec mean_position(const WaveFunction& wf) {
  const auto m = kernels::position_moments(wf.psi(), wf.grid());
  const double dv = wf.grid().cell_volume();
  Vec out(wf.grid().dim());
  for (int a = 0; a < wf.grid().dim(); ++a) out[a] = m.first[a] * dv;
  return out;
}

Vec mean_wavenumber(const WaveFunction& wf) {
  const ComplexField spectrum = forward_transform(wf.psi(), wf.grid());
  const auto m = kernels::wavenumber_moments(spectrum, wf.grid());
  const double dv = wf.grid().cell_volume();
  Vec out(wf.grid().dim());
  for (int a = 0; a < wf.grid().dim(); ++a) out[a] = m.first[a] * dv;
  return out;
}

Vec mean_velocity_spectral(const WaveFunction& wf) {
  Vec k = mean_wavenumber(wf);
  for (double& c : k) c /= 2.0 * kPi * wf.mass();
  return k;
}

Vec mean_velocity_realspace(const WaveFunction& wf) {
  const auto& grid = wf.grid();
  const ComplexField spectrum = forward_transform(wf.psi(), grid);
  const auto k = grid.wavenumbers();
  const double dv = grid.cell_volume();
  Vec out(grid.dim());
  ComplexField gradient(grid.size());
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      const auto idx = grid.unravel(i);
      gradient[i] = complex{0.0, k[idx[axis]]} * spectrum[i];
    }
    inverse_transform_inplace(gradient, grid);
    // -i/(4 pi mu) (psi* d psi - psi d psi*) = Im(psi* d psi) / (2 pi mu)
    out[axis] = kernels::imag_conj_dot(wf.psi(), gradient) * dv / (2.0 * kPi * wf.mass());
  }
  return out;
}

Mat covariance(const WaveFunction& wf) {
  const int d = wf.grid().dim();
  const Vec mean = mean_position(wf);
  const auto c = kernels::central_second_moments(wf.psi(), wf.grid(), mean);
  const double dv = wf.grid().cell_volume();
  Mat out(d * d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) out[a * d + b] = c[a * 3 + b] * dv;
  }
  return out;
}

}  // namespace qfall::wavepacket
