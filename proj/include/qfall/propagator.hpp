#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "qfall/curvature.hpp"
#include "qfall/error.hpp"
#include "qfall/spectral_grid.hpp"
#include "qfall/wavepacket.hpp"

namespace qfall::propagator {

using wavepacket::WaveFunction;

enum class StepScheme {
  lie,     // kinetic then tidal, first order
  strang,  // half tidal, kinetic, half tidal, second order
};

std::string_view to_string(StepScheme scheme);
StepScheme scheme_from_string(std::string_view name);

struct EvolveConfig {
  double dt = 0.1;
  long n_steps = 1;
  long record_every = 1;
  StepScheme scheme = StepScheme::strang;
  double boundary_margin_fraction = 0.1;
  double boundary_mass_tol = 1e-8;
  curvature::RateModel rate = curvature::RateModel::first_order;
  double validity_threshold = curvature::kDefaultValidityThreshold;
};

struct MomentRecord {
  long step = 0;
  double t = 0.0;
  double norm = 0.0;
  Vec mean_x;
  Vec mean_v;
  Mat cov;
};

/// Order-of-magnitude estimates for terms the scheme drops, per run.
struct DroppedTerms {
  double weak_field_epsilon = 0.0;  // max|R| L^2
  double rate_velocity = 0.0;       // max_t |<x>|^2 |<v>| max|R|
  double dispersion_phase = 0.0;    // max_t (2 pi |<v>|)^2 |<x>|^2 mu max|R| dt
};

struct MomentSeries {
  int dim = 1;
  std::vector<MomentRecord> records;
  DroppedTerms dropped;

  std::vector<double> times() const;
  std::vector<Vec> mean_positions() const;
};

struct EvolveResult {
  MomentSeries series;
  WaveFunction final_state;
};

/// Raised when probability mass enters the margin band next to the periodic
/// boundary. Carries everything recorded before the abort.
class BoundaryContact : public Error {
 public:
  BoundaryContact(long step, double mass_in_band, MomentSeries partial);
  long step() const { return step_; }
  double mass_in_band() const { return mass_in_band_; }
  const MomentSeries& partial() const { return partial_; }

 private:
  long step_;
  double mass_in_band_;
  MomentSeries partial_;
};

using RecordSink = std::function<void(const MomentRecord&)>;

/// Multiplies every spectral mode by exp(-i k^2 dt / (4 pi mu)) and advances t.
WaveFunction kinetic_step(WaveFunction wf, double dt);

/// Imprints the clock-rate phase exp(-i pi mu x.R.x dt). Leaves t unchanged.
WaveFunction tidal_step(WaveFunction wf, const curvature::TidalMatrix& tidal, double dt,
                        curvature::RateModel rate = curvature::RateModel::first_order);

/// Throws StepTooLarge / OutsideValidity if the step would alias.
void check_step(const SpectralGrid& grid, double mass, const curvature::TidalMatrix& tidal,
                double dt, double validity_threshold = curvature::kDefaultValidityThreshold);

/// Precomputed phase tables for repeated steps of one configuration.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const SpectralGrid& grid, double mass, const curvature::TidalMatrix& tidal,
                      const EvolveConfig& cfg);

  void step(WaveFunction& wf) const;

 private:
  SpectralGrid grid_;
  double dt_;
  StepScheme scheme_;
  ComplexField kinetic_;
  ComplexField tidal_;  // full step for lie, half step for strang
};

MomentRecord measure(const WaveFunction& wf, long step);

/// Runs cfg.n_steps steps, recording moments at step 0 and every
/// cfg.record_every steps. Each record is also handed to `sink` as it is made.
EvolveResult evolve(WaveFunction wf, const curvature::TidalMatrix& tidal, const EvolveConfig& cfg,
                    const RecordSink& sink = {});

/// d<v>/dt per record: centred differences inside, second-order one-sided
/// differences at the ends.
std::vector<Vec> acceleration_series(const MomentSeries& series);

}  // namespace qfall::propagator
