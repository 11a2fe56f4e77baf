#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qfall/types.hpp"

namespace qfall::curvature {

inline constexpr double kDefaultValidityThreshold = 0.1;

/// Electric part R_{0i0j} of the Riemann tensor in the Fermi normal frame,
/// in geometric units (1/length^2). Stored exactly symmetric.
class TidalMatrix {
 public:
  /// Builds from row-major entries. Entries whose transposes differ by more
  /// than 1e-14 raise AsymmetricInput; smaller mismatches are averaged away.
  TidalMatrix(int dim, std::span<const double> row_major);

  static TidalMatrix zero(int dim);
  static TidalMatrix diagonal(std::span<const double> diag);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return entries_[i * dim_ + j]; }
  std::span<const double> entries() const { return {entries_.data(), entries_.size()}; }

  double max_abs_entry() const;
  double trace() const;
  /// x . R . x
  double quadratic_form(std::span<const double> x) const;
  /// R . x
  Vec apply(std::span<const double> x) const;
  TidalMatrix scaled(double factor) const;

  bool vacuum_trace_ok() const;

 private:
  TidalMatrix() = default;
  int dim_ = 0;
  std::vector<double> entries_;
};

struct ValidityReport {
  double epsilon = 0.0;  // max|R| * L^2, roughly (L / curvature radius)^2
  bool ok = false;
  std::vector<std::string> messages;
};

ValidityReport validate_tidal(const TidalMatrix& tidal, double domain_extent, bool vacuum,
                              double threshold = kDefaultValidityThreshold);

/// Variant taking raw caller entries; asymmetric input is reported here.
ValidityReport validate_tidal(int dim, std::span<const double> row_major, double domain_extent,
                              bool vacuum, double threshold = kDefaultValidityThreshold);

/// Exact clock rate sqrt(1 + x.R.x) relative to the observer at the origin.
double proper_time_rate(std::span<const double> x, const TidalMatrix& tidal);

/// Truncated rate 1 + x.R.x / 2 used by the propagator.
double first_order_rate(std::span<const double> x, const TidalMatrix& tidal);

enum class RateModel { first_order, exact };

double clock_rate(std::span<const double> x, const TidalMatrix& tidal, RateModel model);

/// Full Riemann tensor R_{abcd}, indices 0..3 (0 = time). Diagnostic only.
class RiemannComponents {
 public:
  RiemannComponents() { values_.fill(0.0); }

  double& operator()(int a, int b, int c, int d) { return values_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return values_[index(a, b, c, d)]; }

  /// Sets R_{abcd} and every component tied to it by the pair symmetries.
  void set_with_symmetries(int a, int b, int c, int d, double value);

  /// Tensor whose only nonzero block is the electric part.
  static RiemannComponents from_tidal(const TidalMatrix& tidal);

  TidalMatrix electric_part() const;

  /// Largest violation of antisymmetry, pair exchange and the first Bianchi
  /// identity.
  double symmetry_defect() const;
  /// Throws SymmetryViolation if symmetry_defect() exceeds tol.
  void validate(double tol = 1e-12) const;

 private:
  static constexpr int index(int a, int b, int c, int d) { return ((a * 4 + b) * 4 + c) * 4 + d; }
  std::array<double, 256> values_;
};

using Metric = std::array<std::array<double, 4>, 4>;

/// Fermi-normal metric to second order in x. x has 1..3 spatial components;
/// missing components are zero.
Metric metric_at(std::span<const double> x, const RiemannComponents& riemann);

}  // namespace qfall::curvature
