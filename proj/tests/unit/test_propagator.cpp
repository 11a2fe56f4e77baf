#include <gtest/gtest.h>

#include <random>

#include "qfall/classical.hpp"
#include "qfall/error.hpp"
#include "qfall/experiments.hpp"
#include "qfall/propagator.hpp"

using namespace qfall;
using namespace qfall::propagator;
using curvature::TidalMatrix;
using wavepacket::PacketShape;

namespace {

const SpectralGrid kGrid(1, 256, 20.0);
const TidalMatrix kTidal = TidalMatrix::diagonal(std::vector{1e-4});

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

WaveFunction standard_packet(double x0 = 2.0, double v0 = 0.0, double mass = 100.0) {
  return wavepacket::make_packet(kGrid, PacketShape::gaussian(1.0), Vec{x0}, Vec{v0}, mass);
}

}  // namespace

TEST(KineticStep, SingleModePhase) {
  const double mass = 10.0, dt = 0.05;
  const int mode = 4;
  ComplexField psi(256);
  for (int i = 0; i < 256; ++i) psi[i] = std::polar(0.2, kGrid.wavenumbers()[mode] * kGrid.positions()[i]);
  const WaveFunction wf(kGrid, psi, mass);
  const auto out = kinetic_step(wf, dt);
  const double k = kGrid.wavenumbers()[mode];
  for (int i : {0, 17, 200}) {
    EXPECT_NEAR(std::arg(out.psi()[i] / psi[i]), -k * k * dt / (4.0 * kPi * mass), 1e-13);
  }
  EXPECT_DOUBLE_EQ(out.time(), dt);
}

TEST(KineticStep, ZeroModeUnchanged) {
  const WaveFunction wf(kGrid, ComplexField(256, complex{0.3, -0.1}), 5.0);
  const auto out = kinetic_step(wf, 0.1);
  for (const auto& z : out.psi()) EXPECT_LT(std::abs(z - complex{0.3, -0.1}), 1e-15);
}

TEST(KineticStep, GroupVelocityDrift) {
  const auto wf = standard_packet(0.0, 0.01);
  const auto out = kinetic_step(wf, 0.1);
  EXPECT_NEAR(wavepacket::mean_position(out)[0] - wavepacket::mean_position(wf)[0], 0.001, 1e-10);
  EXPECT_NEAR(wavepacket::norm(out), wavepacket::norm(wf), 1e-12);
  EXPECT_NEAR(wavepacket::mean_velocity_spectral(out)[0], wavepacket::mean_velocity_spectral(wf)[0], 1e-12);
}

TEST(KineticStep, RejectsAliasingStep) {
  // dt k_max^2 / (4 pi mu) >= pi at mu = 1, dt = 0.1
  EXPECT_EQ(code_of([] { kinetic_step(standard_packet(0.0, 0.0, 1.0), 0.1); }), ErrorCode::StepTooLarge);
}

TEST(TidalStep, FlatSpaceIsIdentity) {
  const auto wf = standard_packet(1.0, 0.01);
  const auto out = tidal_step(wf, TidalMatrix::zero(1), 0.1);
  EXPECT_EQ(out.psi(), wf.psi());
  EXPECT_EQ(out.time(), wf.time());
}

TEST(TidalStep, CentredPacketGetsNoKick) {
  const SpectralGrid g(2, 64, 16.0);
  const std::vector<double> e{1e-4, 3e-5, 3e-5, -2e-5};
  const TidalMatrix r(2, e);
  const auto wf = wavepacket::make_packet(g, PacketShape::gaussian(1.0), Vec{0.0, 0.0}, Vec{0.0, 0.0}, 100.0);
  const auto out = tidal_step(wf, r, 0.1);
  const Vec dv = difference(wavepacket::mean_velocity_spectral(out), wavepacket::mean_velocity_spectral(wf));
  EXPECT_LT(max_abs(dv), 1e-12);
}

TEST(TidalStep, OffCentreKickMatchesGridSum) {
  const auto wf = standard_packet(2.0);
  const auto out = tidal_step(wf, kTidal, 0.1);
  // Brute force: sum |psi|^2 (-R x dt) dV over the grid.
  long double oracle = 0.0L;
  for (int i = 0; i < 256; ++i) {
    oracle += std::norm(wf.psi()[i]) * (-1e-4L * kGrid.positions()[i] * 0.1L) * kGrid.spacing();
  }
  const double dv = wavepacket::mean_velocity_spectral(out)[0] - wavepacket::mean_velocity_spectral(wf)[0];
  EXPECT_NEAR(static_cast<double>(oracle), -2e-5, 1e-10);
  EXPECT_NEAR(dv, static_cast<double>(oracle), 1e-10);
  EXPECT_NEAR(wavepacket::norm(out), wavepacket::norm(wf), 1e-12);
  EXPECT_NEAR(wavepacket::mean_position(out)[0], wavepacket::mean_position(wf)[0], 1e-12);
  EXPECT_EQ(out.time(), wf.time());
}

TEST(TidalStep, EhrenfestKickIsShapeIndependent) {
  const SpectralGrid g(2, 64, 16.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1e-4, 1e-4);
  std::vector<PacketShape> shapes{PacketShape::gaussian(0.9), PacketShape::skewed_gaussian(0.8, 2.5),
                                  PacketShape::double_peak(0.6, 2.0)};
  for (const auto& shape : shapes) {
    const double off = 0.3 * u(rng);
    const std::vector<double> e{u(rng), off, off, u(rng)};
    const TidalMatrix r(2, e);
    const auto wf = wavepacket::make_packet(g, shape, Vec{1.5, -0.7}, Vec{0.003, 0.001}, 50.0);
    const auto out = tidal_step(wf, r, 0.2);
    const Vec rx = r.apply(wavepacket::mean_position(wf));
    const Vec v0 = wavepacket::mean_velocity_spectral(wf);
    const Vec v1 = wavepacket::mean_velocity_spectral(out);
    for (int a = 0; a < 2; ++a) EXPECT_NEAR(v1[a] - v0[a] + rx[a] * 0.2, 0.0, 1e-10) << shape.label();
  }
}

TEST(TidalStep, Guards) {
  EXPECT_EQ(code_of([] { tidal_step(standard_packet(), TidalMatrix::diagonal(std::vector{5e-2}), 0.1); }),
            ErrorCode::StepTooLarge);
  EXPECT_EQ(code_of([] { tidal_step(standard_packet(), TidalMatrix::diagonal(std::vector{4e-4}), 0.01); }),
            ErrorCode::OutsideValidity);
}

TEST(TidalStep, ExactRateDiffersAtSecondOrder) {
  const auto wf = standard_packet(2.0);
  const auto a = tidal_step(wf, kTidal, 0.1, curvature::RateModel::first_order);
  const auto b = tidal_step(wf, kTidal, 0.1, curvature::RateModel::exact);
  // Phase gap at node x is 2 pi mu dt (1 + q/2 - sqrt(1 + q)) with q = x.R.x.
  for (int i : {10, 128, 200}) {
    const double x = kGrid.positions()[i];
    const double q = 1e-4 * x * x;
    const double series = q * q / 8.0 - q * q * q / 16.0;
    EXPECT_NEAR(std::arg(b.psi()[i] / a.psi()[i]), 2.0 * kPi * 100.0 * 0.1 * series,
                2.0 * kPi * 100.0 * 0.1 * 5.0 * q * q * q * q / 128.0 + 1e-14);
  }
}

TEST(Evolve, FreePacketMovesUniformly) {
  EvolveConfig cfg;
  cfg.dt = 0.1;
  cfg.n_steps = 1000;
  cfg.record_every = 50;
  const auto wf = wavepacket::make_packet(kGrid, PacketShape::gaussian(1.0), Vec{-2.0}, Vec{0.004}, 100.0);
  const auto res = evolve(wf, TidalMatrix::zero(1), cfg);
  const auto& r = res.series.records;
  ASSERT_EQ(r.size(), 21u);
  for (const auto& rec : r) {
    EXPECT_NEAR(rec.mean_v[0], r.front().mean_v[0], 1e-12);
    EXPECT_NEAR(rec.mean_x[0], r.front().mean_x[0] + r.front().mean_v[0] * rec.t, 1e-10);
    EXPECT_NEAR(rec.norm, 1.0, 1e-12);
  }
  EXPECT_NEAR(res.final_state.time(), 100.0, 1e-9);
}

TEST(Evolve, TracksClassicalQuarterPeriod) {
  const auto s = experiments::Scenario::standard_1d();
  const auto res = experiments::run_scenario(s);
  EXPECT_LT(res.match, 1e-6);
  EXPECT_NEAR(res.quantum.records.back().t, 157.0, 1e-9);
  // Starts at rest at x=2 and swings towards the centre.
  EXPECT_LT(res.quantum.records.back().mean_x[0], 0.1);
}

TEST(Evolve, MassDoesNotChangeTheMeanTrajectory) {
  auto s = experiments::Scenario::standard_1d();
  const auto a = evolve(s.initial_state(), s.tidal, s.evolve);
  s.mass = 200.0;
  const auto b = evolve(s.initial_state(), s.tidal, s.evolve);
  const double dev = classical::match_metric({a.series.times(), a.series.mean_positions()},
                                             {b.series.times(), b.series.mean_positions()});
  EXPECT_LT(dev, 1e-8);
}

TEST(Evolve, LieAndStrangAgreeToFirstOrder) {
  auto s = experiments::Scenario::standard_1d();
  s.evolve.n_steps = 200;
  const auto strang = evolve(s.initial_state(), s.tidal, s.evolve);
  s.evolve.scheme = StepScheme::lie;
  const auto lie = evolve(s.initial_state(), s.tidal, s.evolve);
  const double gap = std::abs(strang.series.records.back().mean_x[0] - lie.series.records.back().mean_x[0]);
  EXPECT_GT(gap, 1e-7);
  EXPECT_LT(gap, 1e-3);
  EXPECT_EQ(strang.final_state.time(), lie.final_state.time());
}

TEST(Evolve, NormDriftStaysAtRoundoff) {
  auto s = experiments::Scenario::standard_1d();
  s.evolve.n_steps = 2000;
  s.evolve.record_every = 100;
  const auto res = evolve(s.initial_state(), s.tidal, s.evolve);
  for (const auto& r : res.series.records) EXPECT_LT(std::abs(r.norm - 1.0), 1e-12 * 2000);
}

TEST(Evolve, BoundaryContactCarriesPartialSeries) {
  EvolveConfig cfg;
  cfg.dt = 0.1;
  cfg.n_steps = 3000;
  cfg.record_every = 100;
  const auto wf = wavepacket::make_packet(kGrid, PacketShape::gaussian(1.0), Vec{2.0}, Vec{0.02}, 100.0);
  try {
    evolve(wf, TidalMatrix::zero(1), cfg);
    FAIL() << "expected BoundaryContact";
  } catch (const BoundaryContact& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoundaryContact);
    EXPECT_GT(e.step(), 0);
    EXPECT_LT(e.step(), 3000);
    EXPECT_GT(e.mass_in_band(), 1e-8);
    EXPECT_EQ(e.partial().records.size(), static_cast<std::size_t>(e.step() / 100 + 1));
  }
}

TEST(Evolve, InitialBoundaryContact) {
  EvolveConfig cfg;
  const auto wf = wavepacket::make_packet(kGrid, PacketShape::gaussian(2.5), Vec{5.0}, Vec{0.0}, 100.0);
  try {
    evolve(wf, TidalMatrix::zero(1), cfg);
    FAIL();
  } catch (const BoundaryContact& e) {
    EXPECT_EQ(e.step(), 0);
    EXPECT_TRUE(e.partial().records.empty());
  }
}

TEST(Evolve, SinkSeesEveryRecord) {
  auto s = experiments::Scenario::standard_1d();
  s.evolve.n_steps = 100;
  s.evolve.record_every = 25;
  std::vector<long> steps;
  const auto res = evolve(s.initial_state(), s.tidal, s.evolve, [&](const MomentRecord& r) { steps.push_back(r.step); });
  EXPECT_EQ(steps, (std::vector<long>{0, 25, 50, 75, 100}));
  EXPECT_GT(res.series.dropped.weak_field_epsilon, 0.0);
}

TEST(Acceleration, FreePacketHasNone) {
  EvolveConfig cfg;
  cfg.n_steps = 100;
  cfg.record_every = 10;
  const auto res = evolve(standard_packet(0.0, 0.01), TidalMatrix::zero(1), cfg);
  for (const auto& a : acceleration_series(res.series)) EXPECT_LT(std::abs(a[0]), 1e-10);
}

TEST(Acceleration, FollowsTidalForce) {
  auto s = experiments::Scenario::standard_1d();
  const auto res = evolve(s.initial_state(), s.tidal, s.evolve);
  const auto acc = acceleration_series(res.series);
  ASSERT_EQ(acc.size(), res.series.records.size());
  // Record spacing 1.0, omega = 0.01: one-sided end differences err by ~omega^2 h^2 |a| / 3.
  for (std::size_t i = 0; i < acc.size(); ++i) {
    EXPECT_NEAR(acc[i][0], -1e-4 * res.series.records[i].mean_x[0], 1e-8);
  }
}

TEST(Acceleration, NeedsThreeRecords) {
  MomentSeries two;
  two.records.resize(2);
  EXPECT_EQ(code_of([&] { acceleration_series(two); }), ErrorCode::TooFewRecords);
  MomentSeries uneven;
  uneven.records.resize(3);
  uneven.records[1].t = 1.0;
  uneven.records[2].t = 3.0;
  for (auto& r : uneven.records) r.mean_v = {0.0};
  EXPECT_EQ(code_of([&] { acceleration_series(uneven); }), ErrorCode::NonUniformRecords);
}
