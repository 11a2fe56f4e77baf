#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qfall/curvature.hpp"
#include "qfall/error.hpp"

using namespace qfall;
using namespace qfall::curvature;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

TidalMatrix diag3(double a, double b, double c) { return TidalMatrix::diagonal(std::vector{a, b, c}); }

}  // namespace

TEST(Validity, ZeroCurvatureIsFlat) {
  const auto rep = validate_tidal(TidalMatrix::zero(3), 10.0, true);
  EXPECT_EQ(rep.epsilon, 0.0);
  EXPECT_TRUE(rep.ok);
}

TEST(Validity, TraceFreeVacuumAccepted) {
  const auto rep = validate_tidal(diag3(-2e-4, 1e-4, 1e-4), 10.0, true);
  EXPECT_NEAR(rep.epsilon, 2e-2, 1e-15);
  EXPECT_TRUE(rep.ok);
}

TEST(Validity, NonzeroTraceRejectedInVacuum) {
  EXPECT_EQ(code_of([] { validate_tidal(diag3(1e-4, 1e-4, 1e-4), 10.0, true); }),
            ErrorCode::TraceNotZero);
  EXPECT_NO_THROW(validate_tidal(diag3(1e-4, 1e-4, 1e-4), 10.0, false));
}

TEST(Validity, AsymmetricEntriesRejected) {
  const std::vector<double> e{0.0, 1e-4, 2e-4, 0.0};
  EXPECT_EQ(code_of([&] { validate_tidal(2, e, 10.0, false); }), ErrorCode::AsymmetricInput);
  const std::vector<double> nearly{0.0, 1e-4, 1e-4 + 1e-16, 0.0};
  const TidalMatrix r(2, nearly);
  EXPECT_EQ(r(0, 1), r(1, 0));
}

TEST(Validity, ThresholdAndExtent) {
  const auto rep = validate_tidal(diag3(1e-3, 0.0, 0.0), 20.0, false);
  EXPECT_FALSE(rep.ok);
  EXPECT_FALSE(rep.messages.empty());
  EXPECT_EQ(code_of([] { validate_tidal(TidalMatrix::zero(1), 0.0, false); }),
            ErrorCode::InvalidArgument);
}

TEST(Validity, MonotoneInDomainExtent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (int trial = 0; trial < 200; ++trial) {
    const TidalMatrix r = diag3(u(rng), u(rng), u(rng));
    bool seen_bad = false;
    for (double L = 0.5; L < 40.0; L *= 1.3) {
      const bool ok = validate_tidal(r, L, false).ok;
      if (seen_bad) EXPECT_FALSE(ok);
      seen_bad = seen_bad || !ok;
    }
  }
}

TEST(ClockRate, FlatSpaceRunsAtUnitRate) {
  const std::vector<double> x{3.0, -2.0, 1.0};
  EXPECT_EQ(proper_time_rate(x, TidalMatrix::zero(3)), 1.0);
  EXPECT_EQ(first_order_rate(x, TidalMatrix::zero(3)), 1.0);
  EXPECT_EQ(first_order_rate(std::vector<double>{0.0, 0.0, 0.0}, diag3(1e-4, 2e-4, -3e-4)), 1.0);
}

TEST(ClockRate, DirectFormula) {
  EXPECT_DOUBLE_EQ(proper_time_rate(std::vector<double>{1.0, 0.0, 0.0}, diag3(4e-4, 0.0, 0.0)),
                   std::sqrt(1.0004));
  EXPECT_NEAR(first_order_rate(std::vector<double>{1.0, 1.0, 0.0}, diag3(-2e-4, 1e-4, 1e-4)), 0.99995,
              1e-16);
}

TEST(ClockRate, ExactMinusFirstOrderMatchesSeries) {
  // x.R.x = 1e-3; leading difference is -(x.R.x)^2 / 8.
  const std::vector<double> x{1.0};
  const TidalMatrix r = TidalMatrix::diagonal(std::vector{1e-3});
  const double diff = proper_time_rate(x, r) - first_order_rate(x, r);
  const long double expected = oracle::rate_difference_series(1e-3L);
  EXPECT_NEAR(diff, static_cast<double>(expected), 1e-15);
  EXPECT_NEAR(std::abs(diff), 1.25e-7, 1e-9);
}

TEST(ClockRate, OutsideValidityWhenRateImaginary) {
  EXPECT_EQ(code_of([] {
              proper_time_rate(std::vector<double>{10.0}, TidalMatrix::diagonal(std::vector{-0.02}));
            }),
            ErrorCode::OutsideValidity);
}

TEST(ClockRate, ExactRateNeverExceedsFirstOrder) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> e(9);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) e[i * 3 + j] = e[j * 3 + i] = 0.05 * u(rng);
    const TidalMatrix r(3, e);
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const double q = r.quadratic_form(x);
    if (std::abs(q) > 0.5) continue;
    const double exact = proper_time_rate(x, r);
    const double first = first_order_rate(x, r);
    EXPECT_LE(exact, first + 1e-15);
    EXPECT_LE(std::abs(exact - first), q * q / 2.0 + 1e-15);
  }
}

TEST(Riemann, RandomAlgebraicTensorsPassValidation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = oracle::random_riemann(rng, 1e-3);
    EXPECT_NO_THROW(r.validate());
  }
}

TEST(Riemann, PerturbedTensorFailsValidation) {
  std::mt19937_64 rng(5);
  auto r = oracle::random_riemann(rng, 1e-3);
  r(0, 1, 2, 3) += 1e-9;
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::SymmetryViolation);
}

TEST(Riemann, ElectricPartRoundTrip) {
  const std::vector<double> e{-2e-4, 1e-5, 0.0, 1e-5, 1e-4, 3e-6, 0.0, 3e-6, 1e-4};
  const TidalMatrix t(3, e);
  const auto r = RiemannComponents::from_tidal(t);
  EXPECT_NO_THROW(r.validate());
  const auto back = r.electric_part();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(back(i, j), t(i, j));
}

TEST(Metric, MinkowskiWithoutCurvatureOrAtOrigin) {
  std::mt19937_64 rng(9);
  const auto r = oracle::random_riemann(rng, 1e-3);
  for (const auto& g : {metric_at(std::vector<double>{1.0, 2.0, 3.0}, RiemannComponents{}),
                        metric_at(std::vector<double>{0.0, 0.0, 0.0}, r)}) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) EXPECT_EQ(g[a][b], a == b ? (a == 0 ? -1.0 : 1.0) : 0.0);
  }
}

TEST(Metric, SingleElectricComponent) {
  const double eps = 3e-4, a = 1.5;
  RiemannComponents r;
  r.set_with_symmetries(0, 1, 0, 1, eps);
  const auto g = metric_at(std::vector<double>{a, 0.0, 0.0}, r);
  EXPECT_DOUBLE_EQ(g[0][0], -(1.0 + eps * a * a));
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(g[0][i], 0.0);
    for (int j = 1; j < 4; ++j) EXPECT_EQ(g[i][j], i == j ? 1.0 : 0.0);
  }
}

TEST(Metric, CrossAndSpatialTerms) {
  // R_{0 1 2 1} = c and partners; x = (a, 0, 0): g_{02} = -(2/3) R_{0 1 2 1} a^2.
  RiemannComponents r;
  const double c = 2e-4, a = 2.0;
  r.set_with_symmetries(0, 1, 2, 1, c);
  r.validate();
  auto g = metric_at(std::vector<double>{a, 0.0, 0.0}, r);
  EXPECT_DOUBLE_EQ(g[0][2], -(2.0 / 3.0) * c * a * a);
  EXPECT_EQ(g[2][0], g[0][2]);

  RiemannComponents s;
  s.set_with_symmetries(2, 1, 2, 1, c);  // R_{2121}: g_22 = 1 - R_{2121} a^2 / 3
  s.validate();
  g = metric_at(std::vector<double>{a, 0.0, 0.0}, s);
  EXPECT_DOUBLE_EQ(g[2][2], 1.0 - c * a * a / 3.0);
}

TEST(Metric, AlwaysExactlySymmetric) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = oracle::random_riemann(rng, 1e-3);
    const auto g = metric_at(std::vector<double>{u(rng), u(rng), u(rng)}, r);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) EXPECT_EQ(g[a][b], g[b][a]);
  }
}

TEST(Metric, RejectsBrokenTensor) {
  RiemannComponents r;
  r(0, 1, 0, 1) = 1e-4;  // partners missing
  EXPECT_EQ(code_of([&] { metric_at(std::vector<double>{1.0}, r); }), ErrorCode::SymmetryViolation);
}
