#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qfall/classical.hpp"
#include "qfall/curvature.hpp"
#include "qfall/propagator.hpp"
#include "qfall/spectral_grid.hpp"
#include "qfall/wavepacket.hpp"

namespace qfall::experiments {

struct Scenario {
  SpectralGrid grid{1, 256, 20.0};
  wavepacket::PacketShape shape = wavepacket::PacketShape::gaussian(1.0);
  Vec x0{2.0};
  Vec v0{0.0};
  double mass = 100.0;
  curvature::TidalMatrix tidal = curvature::TidalMatrix::diagonal(std::vector<double>{1e-4});
  bool vacuum = false;
  propagator::EvolveConfig evolve{};

  /// d=1, N=768, L=20, sigma=1, mu=100, R=[1e-4], x0=2, v0=0, strang, dt=0.1,
  /// over a quarter tidal period (1570 steps). Near the quarter period the
  /// velocity spread reaches omega*sigma, resolved at N=768 for mu up to 200.
  static Scenario standard_1d();

  wavepacket::WaveFunction initial_state() const;
};

struct RunResult {
  propagator::MomentSeries quantum;
  classical::Trajectory reference;  // RK4 sampled at the quantum record times
  std::vector<double> deviation;    // |<x> - x_cl| per record
  double match = 0.0;
};

using RunSink = std::function<void(const propagator::MomentRecord&, const Vec& classical_x)>;

/// Evolves the scenario and compares against RK4 started from the packet's
/// measured initial moments.
RunResult run_scenario(const Scenario& scenario, const RunSink& sink = {});

struct RippleReport {
  Vec predicted;  // -2 pi mu R <x> dt
  Vec measured;   // change of the spectral centroid across one tidal step
  double relative_error = 0.0;
  double edge_phase = 0.0;
};

/// Largest |pi mu x.R.x dt| over the grid.
double tidal_edge_phase(const SpectralGrid& grid, const curvature::TidalMatrix& tidal, double mass,
                        double dt);

RippleReport ripple_check(const wavepacket::WaveFunction& wf, const curvature::TidalMatrix& tidal,
                          double dt);

struct PhaseDifference {
  double measured = 0.0;
  double predicted = 0.0;
  double bound = 0.0;  // 2 pi max|R| mu dt dx^2
};

PhaseDifference phase_difference_check(const wavepacket::WaveFunction& wf,
                                       const curvature::TidalMatrix& tidal, double dt,
                                       std::span<const int> node_a, std::span<const int> node_b);

struct WepReport {
  std::string varied;  // "mass" or "shape"
  std::vector<std::string> labels;
  std::vector<std::vector<double>> deviation;
  std::vector<std::vector<double>> eotvos;
  double amplitude = 0.0;
  double threshold = 0.0;
  double max_deviation = 0.0;
  double max_eotvos = 0.0;
  bool pass = false;
};

inline constexpr double kDefaultWepTolerance = 1e-8;

WepReport wep_mass_sweep(const Scenario& base, const std::vector<double>& masses,
                         double tolerance = kDefaultWepTolerance);
WepReport wep_shape_sweep(const Scenario& base, const std::vector<wavepacket::PacketShape>& shapes,
                          double tolerance = kDefaultWepTolerance);

/// 2 max|a_A - a_B| / max(|a_A| + |a_B|) over acceleration series; 0 when the
/// denominator is below 1e-15.
double eotvos_ratio(const propagator::MomentSeries& a, const propagator::MomentSeries& b);

struct ConvergenceReport {
  propagator::StepScheme scheme = propagator::StepScheme::strang;
  std::vector<double> dts;
  std::vector<double> errors;
  double reference_dt = 0.0;
  double order = 0.0;
  std::array<double, 2> band{0.0, 0.0};
  bool pass = false;
};

std::array<double, 2> default_order_band(propagator::StepScheme scheme);

/// Runs the scenario at each dt (each half the previous) over the scenario's
/// total time and fits the log-log slope of match_metric against RK4.
ConvergenceReport convergence_study(const Scenario& base, const std::vector<double>& dt_list,
                                    propagator::StepScheme scheme);

}  // namespace qfall::experiments
