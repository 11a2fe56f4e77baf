#include "qfall/propagator.hpp"

#include <cmath>
#include <sstream>

#include "qfall/kernels.hpp"

namespace qfall::propagator {

using curvature::TidalMatrix;

std::string_view to_string(StepScheme scheme) {
  return scheme == StepScheme::lie ? "lie" : "strang";
}

StepScheme scheme_from_string(std::string_view name) {
  if (name == "lie") return StepScheme::lie;
  if (name == "strang") return StepScheme::strang;
  throw Error(ErrorCode::ConfigError, "unknown step scheme '" + std::string(name) + "'");
}

std::vector<double> MomentSeries::times() const {
  std::vector<double> t;
  t.reserve(records.size());
  for (const auto& r : records) t.push_back(r.t);
  return t;
}

std::vector<Vec> MomentSeries::mean_positions() const {
  std::vector<Vec> x;
  x.reserve(records.size());
  for (const auto& r : records) x.push_back(r.mean_x);
  return x;
}

namespace {

std::string boundary_message(long step, double mass) {
  std::ostringstream os;
  os << "probability " << mass << " inside the boundary margin at step " << step;
  return os.str();
}

double kinetic_coefficient(double dt, double mass) { return dt / (4.0 * kPi * mass); }

void check_kinetic(const SpectralGrid& grid, double mass, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double phase = kinetic_coefficient(dt, mass) * grid.k_max() * grid.k_max();
  if (!(phase < kPi)) {
    std::ostringstream os;
    os << "kinetic phase per step at k_max is " << phase << " >= pi";
    throw Error(ErrorCode::StepTooLarge, os.str());
  }
}

void check_tidal(const SpectralGrid& grid, double mass, const TidalMatrix& tidal, double dt,
                 double threshold) {
  if (tidal.dim() != grid.dim()) throw Error(ErrorCode::SizeMismatch, "tidal/grid dimension");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double half = 0.5 * grid.extent();
  const double phase = dt * tidal.max_abs_entry() * half * half * kPi * mass;
  if (!(phase < kPi)) {
    std::ostringstream os;
    os << "tidal phase per step at the domain edge is " << phase << " >= pi";
    throw Error(ErrorCode::StepTooLarge, os.str());
  }
  const auto report = curvature::validate_tidal(tidal, grid.extent(), false, threshold);
  if (!report.ok) throw Error(ErrorCode::OutsideValidity, report.messages.front());
}

DroppedTerms estimate_dropped(const MomentSeries& series, const SpectralGrid& grid, double mass,
                              const TidalMatrix& tidal, double dt) {
  DroppedTerms d;
  const double r = tidal.max_abs_entry();
  d.weak_field_epsilon = r * grid.extent() * grid.extent();
  for (const auto& rec : series.records) {
    const double x = euclidean_norm(rec.mean_x);
    const double v = euclidean_norm(rec.mean_v);
    d.rate_velocity = std::max(d.rate_velocity, x * x * v * r);
    d.dispersion_phase =
        std::max(d.dispersion_phase, std::pow(2.0 * kPi * v, 2) * x * x * mass * r * dt);
  }
  return d;
}

}  // namespace

BoundaryContact::BoundaryContact(long step, double mass_in_band, MomentSeries partial)
    : Error(ErrorCode::BoundaryContact, boundary_message(step, mass_in_band)),
      step_(step),
      mass_in_band_(mass_in_band),
      partial_(std::move(partial)) {}

void check_step(const SpectralGrid& grid, double mass, const TidalMatrix& tidal, double dt,
                double validity_threshold) {
  check_kinetic(grid, mass, dt);
  check_tidal(grid, mass, tidal, dt, validity_threshold);
}

WaveFunction kinetic_step(WaveFunction wf, double dt) {
  const auto& grid = wf.grid();
  check_kinetic(grid, wf.mass(), dt);
  forward_transform_inplace(wf.psi(), grid);
  kernels::multiply(wf.psi(), kernels::kinetic_phase_table(grid, kinetic_coefficient(dt, wf.mass())));
  inverse_transform_inplace(wf.psi(), grid);
  wf.advance_time(dt);
  return wf;
}

WaveFunction tidal_step(WaveFunction wf, const TidalMatrix& tidal, double dt,
                        curvature::RateModel rate) {
  const auto& grid = wf.grid();
  check_tidal(grid, wf.mass(), tidal, dt, curvature::kDefaultValidityThreshold);
  kernels::multiply(wf.psi(), kernels::tidal_phase_table(grid, tidal, kPi * wf.mass() * dt, rate));
  return wf;
}

SplitStepPropagator::SplitStepPropagator(const SpectralGrid& grid, double mass,
                                         const TidalMatrix& tidal, const EvolveConfig& cfg)
    : grid_(grid), dt_(cfg.dt), scheme_(cfg.scheme) {
  check_step(grid, mass, tidal, cfg.dt, cfg.validity_threshold);
  kinetic_ = kernels::kinetic_phase_table(grid, kinetic_coefficient(cfg.dt, mass));
  const double fraction = scheme_ == StepScheme::strang ? 0.5 : 1.0;
  tidal_ = kernels::tidal_phase_table(grid, tidal, kPi * mass * cfg.dt * fraction, cfg.rate);
}

void SplitStepPropagator::step(WaveFunction& wf) const {
  auto& psi = wf.psi();
  if (scheme_ == StepScheme::strang) kernels::multiply(psi, tidal_);
  forward_transform_inplace(psi, grid_);
  kernels::multiply(psi, kinetic_);
  inverse_transform_inplace(psi, grid_);
  kernels::multiply(psi, tidal_);
  wf.advance_time(dt_);
}

MomentRecord measure(const WaveFunction& wf, long step) {
  MomentRecord r;
  r.step = step;
  r.t = wf.time();
  r.norm = wavepacket::norm(wf);
  r.mean_x = wavepacket::mean_position(wf);
  r.mean_v = wavepacket::mean_velocity_spectral(wf);
  r.cov = wavepacket::covariance(wf);
  return r;
}

EvolveResult evolve(WaveFunction wf, const TidalMatrix& tidal, const EvolveConfig& cfg,
                    const RecordSink& sink) {
  if (cfg.n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be positive");
  if (cfg.record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be positive");
  if (!(cfg.boundary_margin_fraction > 0.0 && cfg.boundary_margin_fraction < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "boundary_margin_fraction must lie in (0, 0.5)");
  }
  const SpectralGrid grid = wf.grid();
  const SplitStepPropagator stepper(grid, wf.mass(), tidal, cfg);
  const double inner = (0.5 - cfg.boundary_margin_fraction) * grid.extent();
  const double dv = grid.cell_volume();

  MomentSeries series;
  series.dim = grid.dim();
  auto record = [&](long step) {
    series.records.push_back(measure(wf, step));
    if (sink) sink(series.records.back());
  };
  auto monitor = [&](long step) {
    const double band = kernels::boundary_mass(wf.psi(), grid, inner) * dv;
    if (band > cfg.boundary_mass_tol) {
      series.dropped = estimate_dropped(series, grid, wf.mass(), tidal, cfg.dt);
      throw BoundaryContact(step, band, std::move(series));
    }
  };

  monitor(0);
  record(0);
  for (long s = 1; s <= cfg.n_steps; ++s) {
    stepper.step(wf);
    monitor(s);
    if (s % cfg.record_every == 0) record(s);
  }
  series.dropped = estimate_dropped(series, grid, wf.mass(), tidal, cfg.dt);
  return {std::move(series), std::move(wf)};
}

std::vector<Vec> acceleration_series(const MomentSeries& series) {
  const auto& r = series.records;
  const std::size_t n = r.size();
  if (n < 3) throw Error(ErrorCode::TooFewRecords, "acceleration needs at least 3 records");
  const double h = r[1].t - r[0].t;
  if (!(h > 0.0)) throw Error(ErrorCode::NonUniformRecords, "record times must increase");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((r[i].t - r[i - 1].t) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw Error(ErrorCode::NonUniformRecords, "record spacing is not uniform");
    }
  }
  const int d = series.dim;
  std::vector<Vec> acc(n, Vec(d, 0.0));
  for (int a = 0; a < d; ++a) {
    acc[0][a] = (-3.0 * r[0].mean_v[a] + 4.0 * r[1].mean_v[a] - r[2].mean_v[a]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      acc[i][a] = (r[i + 1].mean_v[a] - r[i - 1].mean_v[a]) / (2.0 * h);
    }
    acc[n - 1][a] =
        (3.0 * r[n - 1].mean_v[a] - 4.0 * r[n - 2].mean_v[a] + r[n - 3].mean_v[a]) / (2.0 * h);
  }
  return acc;
}

}  // namespace qfall::propagator
