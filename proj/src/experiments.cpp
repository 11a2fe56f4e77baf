#include "qfall/experiments.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "qfall/error.hpp"

namespace qfall::experiments {

using curvature::TidalMatrix;
using propagator::MomentSeries;
using wavepacket::WaveFunction;

namespace {

// Sweep members are independent; each one runs its kernels serially inside
// the outer team, so the results do not depend on scheduling.
template <class Fn>
void for_each_member(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

classical::Trajectory quantum_positions(const MomentSeries& s) {
  return {s.times(), s.mean_positions()};
}

std::vector<std::vector<double>> square(std::size_t n) {
  return std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
}

WepReport assemble(std::string varied, std::vector<std::string> labels,
                   const std::vector<RunResult>& runs, double tolerance) {
  WepReport rep;
  rep.varied = std::move(varied);
  rep.labels = std::move(labels);
  const std::size_t n = runs.size();
  rep.deviation = square(n);
  rep.eotvos = square(n);
  for (const auto& x : runs.front().reference.x) {
    rep.amplitude = std::max(rep.amplitude, euclidean_norm(x));
  }
  rep.threshold = tolerance * rep.amplitude;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dev =
          classical::match_metric(quantum_positions(runs[a].quantum), quantum_positions(runs[b].quantum));
      const double eta = eotvos_ratio(runs[a].quantum, runs[b].quantum);
      rep.deviation[a][b] = rep.deviation[b][a] = dev;
      rep.eotvos[a][b] = rep.eotvos[b][a] = eta;
      rep.max_deviation = std::max(rep.max_deviation, dev);
      rep.max_eotvos = std::max(rep.max_eotvos, eta);
    }
  }
  rep.pass = rep.max_deviation <= rep.threshold;
  return rep;
}

std::string annotate(const std::string& label, const std::exception& e) {
  return label + ": " + e.what();
}

}  // namespace

Scenario Scenario::standard_1d() {
  Scenario s;
  s.grid = SpectralGrid(1, 768, 20.0);
  s.evolve.dt = 0.1;
  s.evolve.n_steps = 1570;
  s.evolve.record_every = 10;
  s.evolve.scheme = propagator::StepScheme::strang;
  return s;
}

WaveFunction Scenario::initial_state() const {
  return wavepacket::make_packet(grid, shape, x0, v0, mass);
}

RunResult run_scenario(const Scenario& scenario, const RunSink& sink) {
  curvature::validate_tidal(scenario.tidal, scenario.grid.extent(), scenario.vacuum,
                            scenario.evolve.validity_threshold);
  WaveFunction wf = scenario.initial_state();
  const auto& cfg = scenario.evolve;

  classical::ClassicalState s0;
  s0.x = wavepacket::mean_position(wf);
  s0.v = wavepacket::mean_velocity_spectral(wf);
  s0.t = wf.time();
  const auto states = classical::rk4_integrate(s0, scenario.tidal, cfg.dt, cfg.n_steps);
  const classical::Trajectory reference = classical::positions(states, cfg.record_every);

  RunResult result;
  std::size_t next = 0;
  auto forward = [&](const propagator::MomentRecord& rec) {
    const Vec& cl = reference.x.at(next++);
    result.deviation.push_back(euclidean_norm(difference(rec.mean_x, cl)));
    if (sink) sink(rec, cl);
  };
  auto evolved = propagator::evolve(std::move(wf), scenario.tidal, cfg, forward);
  result.quantum = std::move(evolved.series);
  result.reference = reference;
  result.match = classical::match_metric(quantum_positions(result.quantum), result.reference);
  return result;
}

double tidal_edge_phase(const SpectralGrid& grid, const TidalMatrix& tidal, double mass, double dt) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.position_of(i);
    worst = std::max(worst, std::abs(tidal.quadratic_form(x)));
  }
  return kPi * mass * worst * dt;
}

RippleReport ripple_check(const WaveFunction& wf, const TidalMatrix& tidal, double dt) {
  const auto& grid = wf.grid();
  RippleReport rep;
  rep.edge_phase = tidal_edge_phase(grid, tidal, wf.mass(), dt);
  if (rep.edge_phase >= kPi / 4.0) {
    std::ostringstream os;
    os << "tidal phase at the domain edge is " << rep.edge_phase << " >= pi/4";
    throw Error(ErrorCode::PhaseWrapRisk, os.str());
  }
  const Vec x = wavepacket::mean_position(wf);
  const Vec k_before = wavepacket::mean_wavenumber(wf);
  const WaveFunction kicked = propagator::tidal_step(wf, tidal, dt);
  const Vec k_after = wavepacket::mean_wavenumber(kicked);

  const Vec rx = tidal.apply(x);
  const int d = grid.dim();
  rep.predicted.resize(d);
  rep.measured.resize(d);
  for (int a = 0; a < d; ++a) {
    rep.predicted[a] = -2.0 * kPi * wf.mass() * rx[a] * dt;
    rep.measured[a] = k_after[a] - k_before[a];
  }
  // The one-cell kick sets the scale when <x> is (close to) the origin.
  const double cell_kick = 2.0 * kPi * wf.mass() * tidal.max_abs_entry() * grid.spacing() * dt;
  const double scale = std::max({euclidean_norm(rep.predicted), cell_kick, 1e-300});
  rep.relative_error = euclidean_norm(difference(rep.measured, rep.predicted)) / scale;
  return rep;
}

PhaseDifference phase_difference_check(const WaveFunction& wf, const TidalMatrix& tidal, double dt,
                                       std::span<const int> node_a, std::span<const int> node_b) {
  const auto& grid = wf.grid();
  const int d = grid.dim();
  if (node_a.size() != static_cast<std::size_t>(d) || node_b.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::SizeMismatch, "node index dimension");
  }
  int differing = 0;
  for (int a = 0; a < d; ++a) {
    if (node_a[a] < 0 || node_a[a] >= grid.points_per_axis() || node_b[a] < 0 ||
        node_b[a] >= grid.points_per_axis()) {
      throw Error(ErrorCode::InvalidArgument, "node index outside the grid");
    }
    const int step = std::abs(node_a[a] - node_b[a]);
    if (step > 1) throw Error(ErrorCode::NotAdjacent, "nodes are more than one cell apart");
    differing += step;
  }
  if (differing > 1) throw Error(ErrorCode::NotAdjacent, "nodes differ along more than one axis");

  // Imprint onto a uniform field so only the tidal factor is measured.
  WaveFunction unit(grid, ComplexField(grid.size(), complex{1.0, 0.0}), wf.mass(), wf.time());
  const WaveFunction imprinted = propagator::tidal_step(std::move(unit), tidal, dt);
  const std::size_t ia = grid.ravel(node_a);
  const std::size_t ib = grid.ravel(node_b);

  PhaseDifference out;
  out.measured = std::arg(imprinted.psi()[ib] * std::conj(imprinted.psi()[ia]));
  const Vec xa = grid.position_of(ia);
  const Vec xb = grid.position_of(ib);
  Vec mid(d);
  Vec dx(d);
  for (int a = 0; a < d; ++a) {
    mid[a] = 0.5 * (xa[a] + xb[a]);
    dx[a] = xb[a] - xa[a];
  }
  const Vec rmid = tidal.apply(mid);
  double dot = 0.0;
  for (int a = 0; a < d; ++a) dot += rmid[a] * dx[a];
  out.predicted = -2.0 * kPi * wf.mass() * dot * dt;
  out.bound = 2.0 * kPi * tidal.max_abs_entry() * wf.mass() * dt * grid.spacing() * grid.spacing();
  return out;
}

WepReport wep_mass_sweep(const Scenario& base, const std::vector<double>& masses, double tolerance) {
  if (masses.size() < 2) throw Error(ErrorCode::TooFewVariants, "mass sweep needs at least 2 masses");
  std::vector<RunResult> runs(masses.size());
  std::vector<std::string> labels;
  for (double m : masses) {
    std::ostringstream os;
    os << "mu=" << m;
    labels.push_back(os.str());
  }
  for_each_member(masses.size(), [&](std::size_t i) {
    Scenario s = base;
    s.mass = masses[i];
    try {
      runs[i] = run_scenario(s);
    } catch (const Error& e) {
      throw Error(e.code(), annotate(labels[i], e));
    }
  });
  return assemble("mass", std::move(labels), runs, tolerance);
}

WepReport wep_shape_sweep(const Scenario& base, const std::vector<wavepacket::PacketShape>& shapes,
                          double tolerance) {
  if (shapes.size() < 2) throw Error(ErrorCode::TooFewVariants, "shape sweep needs at least 2 shapes");
  std::vector<std::string> labels;
  for (const auto& s : shapes) labels.push_back(s.label());

  std::vector<Vec> x0(shapes.size());
  std::vector<Vec> v0(shapes.size());
  for_each_member(shapes.size(), [&](std::size_t i) {
    Scenario s = base;
    s.shape = shapes[i];
    const WaveFunction wf = s.initial_state();
    x0[i] = wavepacket::mean_position(wf);
    v0[i] = wavepacket::mean_velocity_spectral(wf);
  });
  for (std::size_t i = 1; i < shapes.size(); ++i) {
    const double dx = max_abs(difference(x0[i], x0[0]));
    const double dv = max_abs(difference(v0[i], v0[0]));
    if (dx > 1e-6 || dv > 1e-6) {
      std::ostringstream os;
      os << labels[i] << " starts with <x> off by " << dx << " and <v> off by " << dv << " from "
         << labels[0];
      throw Error(ErrorCode::InitialMomentMismatch, os.str());
    }
  }

  std::vector<RunResult> runs(shapes.size());
  for_each_member(shapes.size(), [&](std::size_t i) {
    Scenario s = base;
    s.shape = shapes[i];
    try {
      runs[i] = run_scenario(s);
    } catch (const Error& e) {
      throw Error(e.code(), annotate(labels[i], e));
    }
  });
  return assemble("shape", std::move(labels), runs, tolerance);
}

double eotvos_ratio(const MomentSeries& a, const MomentSeries& b) {
  if (!classical::timestamps_match(a.times(), b.times())) {
    throw Error(ErrorCode::TimestampMismatch, "series are not sampled at the same times");
  }
  const auto acc_a = propagator::acceleration_series(a);
  const auto acc_b = propagator::acceleration_series(b);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < acc_a.size(); ++i) {
    num = std::max(num, euclidean_norm(difference(acc_a[i], acc_b[i])));
    den = std::max(den, euclidean_norm(acc_a[i]) + euclidean_norm(acc_b[i]));
  }
  if (den < 1e-15) return 0.0;
  return 2.0 * num / den;
}

std::array<double, 2> default_order_band(propagator::StepScheme scheme) {
  return scheme == propagator::StepScheme::strang ? std::array<double, 2>{1.8, 2.2}
                                                  : std::array<double, 2>{0.8, 1.2};
}

namespace {

long exact_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - n) > 1e-6 * std::max(1.0, r)) {
    std::ostringstream os;
    os << what << ": " << num << " is not a whole multiple of " << den;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  return n;
}

}  // namespace

ConvergenceReport convergence_study(const Scenario& base, const std::vector<double>& dt_list,
                                    propagator::StepScheme scheme) {
  if (dt_list.size() < 3) throw Error(ErrorCode::TooFewPoints, "convergence study needs >= 3 step sizes");
  for (std::size_t i = 1; i < dt_list.size(); ++i) {
    if (!(dt_list[i] > 0.0) || std::abs(dt_list[i - 1] / dt_list[i] - 2.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "each step size must halve the previous one");
    }
  }
  ConvergenceReport rep;
  rep.scheme = scheme;
  rep.dts = dt_list;
  rep.band = default_order_band(scheme);

  const double total = base.evolve.dt * static_cast<double>(base.evolve.n_steps);
  const double coarse = dt_list.front();
  const double finest = dt_list.back();
  rep.reference_dt = finest / 10.0;
  exact_ratio(total, coarse, "total time");

  curvature::validate_tidal(base.tidal, base.grid.extent(), base.vacuum,
                            base.evolve.validity_threshold);
  const WaveFunction initial = base.initial_state();
  classical::ClassicalState s0;
  s0.x = wavepacket::mean_position(initial);
  s0.v = wavepacket::mean_velocity_spectral(initial);
  s0.t = initial.time();
  const long ref_steps = exact_ratio(total, rep.reference_dt, "reference steps");
  const long ref_stride = exact_ratio(coarse, rep.reference_dt, "reference stride");
  const auto reference = classical::positions(
      classical::rk4_integrate(s0, base.tidal, rep.reference_dt, ref_steps), ref_stride);

  rep.errors.assign(dt_list.size(), 0.0);
  for_each_member(dt_list.size(), [&](std::size_t i) {
    propagator::EvolveConfig cfg = base.evolve;
    cfg.dt = dt_list[i];
    cfg.scheme = scheme;
    cfg.n_steps = exact_ratio(total, dt_list[i], "steps");
    cfg.record_every = exact_ratio(coarse, dt_list[i], "record spacing");
    const auto run = propagator::evolve(initial, base.tidal, cfg);
    rep.errors[i] = classical::match_metric(quantum_positions(run.series), reference);
  });

  // Least-squares slope of log(error) against log(dt).
  const double n = static_cast<double>(dt_list.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    const double lx = std::log(dt_list[i]);
    const double ly = std::log(std::max(rep.errors[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  rep.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.pass = rep.order >= rep.band[0] && rep.order <= rep.band[1];
  return rep;
}

}  // namespace qfall::experiments
