#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfall/spectral_grid.hpp"
#include "qfall/types.hpp"

namespace qfall::wavepacket {

enum class ShapeKind { gaussian, skewed_gaussian, double_peak, custom_table };

std::string_view to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(std::string_view name);

struct TableSample {
  Vec position;  // offset from the packet centre
  complex amplitude;
};

/// Envelope description. Widths are standard deviations of |psi|^2 per axis
/// (one value is broadcast to every axis). Skew and separation act on axis 0.
struct PacketShape {
  ShapeKind kind = ShapeKind::gaussian;
  Vec sigma{1.0};
  double skew = 0.0;
  double separation = 0.0;  // distance between the two peaks
  std::vector<TableSample> table;
  std::string table_source;  // where the table was read from, if anywhere

  static PacketShape gaussian(double sigma);
  static PacketShape skewed_gaussian(double sigma, double skew);
  static PacketShape double_peak(double sigma, double separation);
  static PacketShape custom(std::vector<TableSample> table);

  double sigma_along(int axis) const { return sigma.size() == 1 ? sigma[0] : sigma.at(axis); }
  std::string label() const;
};

/// Reads `x1[,x2,x3],re,im` rows; blank lines, `#` comments and a
/// non-numeric header row are skipped.
std::vector<TableSample> read_table_csv(const std::filesystem::path& path, int dim);

/// Mean displacement of a skew-normal density along its skew axis.
double skew_mean_offset(double sigma, double skew);

/// Slow part psi of Psi = exp(-2 pi i mu t) psi on a grid. The rest-mass
/// phase is tracked through `time` and never multiplied into the samples.
class WaveFunction {
 public:
  WaveFunction(SpectralGrid grid, ComplexField psi, double mass, double time = 0.0);

  const SpectralGrid& grid() const { return grid_; }
  const ComplexField& psi() const { return psi_; }
  ComplexField& psi() { return psi_; }
  double mass() const { return mass_; }
  double time() const { return time_; }
  void advance_time(double dt) { time_ += dt; }

  /// 2 pi mu t reduced to [0, 2 pi).
  double rest_phase() const;
  complex rest_phase_factor() const { return std::polar(1.0, -rest_phase()); }
  /// Full Psi, materialised on request only.
  ComplexField full_field() const;

 private:
  SpectralGrid grid_;
  ComplexField psi_;
  double mass_;
  double time_;
};

/// Unnormalised envelope with its reference point at `center`. Skewed
/// envelopes are not re-centred here, their mean sits off `center`.
ComplexField sample_envelope(const SpectralGrid& grid, const PacketShape& shape,
                             std::span<const double> center);

/// Normalised packet whose mean position is x0 (analytic shapes) and whose
/// mean velocity is v0, via the boost factor exp(i 2 pi mu v0 . x).
WaveFunction make_packet(const SpectralGrid& grid, const PacketShape& shape,
                         std::span<const double> x0, std::span<const double> v0, double mass);

double norm(const WaveFunction& wf);
Vec mean_position(const WaveFunction& wf);
/// sum |A(k)|^2 k dV, the spectral centroid of the unitary spectrum.
Vec mean_wavenumber(const WaveFunction& wf);
Vec mean_velocity_spectral(const WaveFunction& wf);
Vec mean_velocity_realspace(const WaveFunction& wf);
Mat covariance(const WaveFunction& wf);

}  // namespace qfall::wavepacket
