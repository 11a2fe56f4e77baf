#include "qfall/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfall/error.hpp"

namespace qfall::curvature {

namespace {

constexpr double kAsymmetryTol = 1e-14;
constexpr double kVacuumTraceTol = 1e-12;

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::InvalidArgument, "dimension must be 1, 2 or 3");
}

}  // namespace

TidalMatrix::TidalMatrix(int dim, std::span<const double> row_major) : dim_(dim) {
  check_dim(dim);
  if (row_major.size() != static_cast<std::size_t>(dim * dim)) {
    throw Error(ErrorCode::SizeMismatch, "tidal matrix needs dim*dim entries");
  }
  entries_.assign(row_major.begin(), row_major.end());
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const double a = entries_[i * dim + j];
      const double b = entries_[j * dim + i];
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw Error(ErrorCode::InvalidArgument, "tidal matrix entries must be finite");
      }
      if (std::abs(a - b) > kAsymmetryTol) {
        std::ostringstream os;
        os << "R[" << i << "][" << j << "]=" << a << " vs R[" << j << "][" << i << "]=" << b;
        throw Error(ErrorCode::AsymmetricInput, os.str());
      }
      const double mean = 0.5 * (a + b);
      entries_[i * dim + j] = mean;
      entries_[j * dim + i] = mean;
    }
  }
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(entries_[i * dim + i])) {
      throw Error(ErrorCode::InvalidArgument, "tidal matrix entries must be finite");
    }
  }
}

TidalMatrix TidalMatrix::zero(int dim) {
  check_dim(dim);
  return TidalMatrix(dim, std::vector<double>(dim * dim, 0.0));
}

TidalMatrix TidalMatrix::diagonal(std::span<const double> diag) {
  const int dim = static_cast<int>(diag.size());
  check_dim(dim);
  std::vector<double> e(dim * dim, 0.0);
  for (int i = 0; i < dim; ++i) e[i * dim + i] = diag[i];
  return TidalMatrix(dim, e);
}

double TidalMatrix::max_abs_entry() const { return max_abs(entries_); }

double TidalMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += entries_[i * dim_ + i];
  return t;
}

double TidalMatrix::quadratic_form(std::span<const double> x) const {
  double q = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (int j = 0; j < dim_; ++j) row += entries_[i * dim_ + j] * x[j];
    q += x[i] * row;
  }
  return q;
}

Vec TidalMatrix::apply(std::span<const double> x) const {
  Vec out(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) out[i] += entries_[i * dim_ + j] * x[j];
  }
  return out;
}

TidalMatrix TidalMatrix::scaled(double factor) const {
  TidalMatrix out = *this;
  for (double& e : out.entries_) e *= factor;
  return out;
}

bool TidalMatrix::vacuum_trace_ok() const {
  return std::abs(trace()) <= kVacuumTraceTol * std::max(1.0, max_abs_entry());
}

ValidityReport validate_tidal(const TidalMatrix& tidal, double domain_extent, bool vacuum,
                              double threshold) {
  if (!(domain_extent > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "domain extent must be positive");
  }
  if (vacuum && !tidal.vacuum_trace_ok()) {
    std::ostringstream os;
    os << "vacuum requested but trace(R) = " << tidal.trace();
    throw Error(ErrorCode::TraceNotZero, os.str());
  }
  ValidityReport report;
  report.epsilon = tidal.max_abs_entry() * domain_extent * domain_extent;
  report.ok = report.epsilon < threshold;
  if (!report.ok) {
    std::ostringstream os;
    os << "weak-field parameter " << report.epsilon << " >= threshold " << threshold;
    report.messages.push_back(os.str());
  }
  return report;
}

ValidityReport validate_tidal(int dim, std::span<const double> row_major, double domain_extent,
                              bool vacuum, double threshold) {
  return validate_tidal(TidalMatrix(dim, row_major), domain_extent, vacuum, threshold);
}

double proper_time_rate(std::span<const double> x, const TidalMatrix& tidal) {
  const double arg = 1.0 + tidal.quadratic_form(x);
  if (!(arg > 0.0)) {
    throw Error(ErrorCode::OutsideValidity, "1 + x.R.x <= 0, clock rate is not real");
  }
  return std::sqrt(arg);
}

double first_order_rate(std::span<const double> x, const TidalMatrix& tidal) {
  return 1.0 + 0.5 * tidal.quadratic_form(x);
}

double clock_rate(std::span<const double> x, const TidalMatrix& tidal, RateModel model) {
  return model == RateModel::exact ? proper_time_rate(x, tidal) : first_order_rate(x, tidal);
}

void RiemannComponents::set_with_symmetries(int a, int b, int c, int d, double value) {
  (*this)(a, b, c, d) = value;
  (*this)(b, a, c, d) = -value;
  (*this)(a, b, d, c) = -value;
  (*this)(b, a, d, c) = value;
  (*this)(c, d, a, b) = value;
  (*this)(d, c, a, b) = -value;
  (*this)(c, d, b, a) = -value;
  (*this)(d, c, b, a) = value;
}

RiemannComponents RiemannComponents::from_tidal(const TidalMatrix& tidal) {
  RiemannComponents r;
  for (int i = 0; i < tidal.dim(); ++i) {
    for (int j = 0; j < tidal.dim(); ++j) {
      const double e = tidal(i, j);
      r(0, i + 1, 0, j + 1) = e;
      r(i + 1, 0, j + 1, 0) = e;
      r(i + 1, 0, 0, j + 1) = -e;
      r(0, i + 1, j + 1, 0) = -e;
    }
  }
  return r;
}

TidalMatrix RiemannComponents::electric_part() const {
  std::vector<double> e(9);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) e[i * 3 + j] = (*this)(0, i + 1, 0, j + 1);
  }
  return TidalMatrix(3, e);
}

double RiemannComponents::symmetry_defect() const {
  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      for (int c = 0; c < 4; ++c) {
        for (int d = 0; d < 4; ++d) {
          const double r = (*this)(a, b, c, d);
          worst = std::max(worst, std::abs(r + (*this)(b, a, c, d)));
          worst = std::max(worst, std::abs(r + (*this)(a, b, d, c)));
          worst = std::max(worst, std::abs(r - (*this)(c, d, a, b)));
          worst = std::max(worst, std::abs(r + (*this)(a, c, d, b) + (*this)(a, d, b, c)));
        }
      }
    }
  }
  return worst;
}

void RiemannComponents::validate(double tol) const {
  const double defect = symmetry_defect();
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "Riemann symmetry defect " << defect << " exceeds " << tol;
    throw Error(ErrorCode::SymmetryViolation, os.str());
  }
}

Metric metric_at(std::span<const double> x, const RiemannComponents& riemann) {
  if (x.empty() || x.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "position must have 1..3 components");
  }
  riemann.validate();
  std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};  // p[0] unused, spatial in 1..3
  for (std::size_t i = 0; i < x.size(); ++i) p[i + 1] = x[i];

  Metric g{};
  double g00 = 0.0;
  for (int i = 1; i < 4; ++i) {
    for (int j = 1; j < 4; ++j) g00 += riemann(0, i, 0, j) * p[i] * p[j];
  }
  g[0][0] = -(1.0 + g00);

  // The line element carries 2 g_{0i} dt dx^i, so the per-component value is
  // half of the -4/3 coefficient.
  for (int i = 1; i < 4; ++i) {
    double s = 0.0;
    for (int j = 1; j < 4; ++j) {
      for (int k = 1; k < 4; ++k) s += riemann(0, j, i, k) * p[j] * p[k];
    }
    g[0][i] = -(2.0 / 3.0) * s;
    g[i][0] = g[0][i];
  }

  for (int i = 1; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      double s = 0.0;
      for (int k = 1; k < 4; ++k) {
        for (int l = 1; l < 4; ++l) s += riemann(i, k, j, l) * p[k] * p[l];
      }
      g[i][j] = (i == j ? 1.0 : 0.0) - s / 3.0;
      g[j][i] = g[i][j];
    }
  }
  return g;
}

}  // namespace qfall::curvature
