#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "oracles.hpp"
#include "qfall/kernels.hpp"
#include "qfall/parallel.hpp"

using namespace qfall;
namespace ref = qfall::kernels::reference;

namespace {

curvature::TidalMatrix random_tidal(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1e-4, 1e-4);
  std::vector<double> e(dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) e[i * dim + j] = e[j * dim + i] = u(rng);
  return curvature::TidalMatrix(dim, e);
}

class KernelsVsReference : public ::testing::TestWithParam<int> {};

}  // namespace

TEST_P(KernelsVsReference, AgreeOnRandomFields) {
  const int dim = GetParam();
  std::mt19937_64 rng(100 + dim);
  const SpectralGrid g(dim, dim == 3 ? 16 : 64, 10.0);
  const auto f = oracle::random_field(rng, g.size());
  const auto h = oracle::random_field(rng, g.size());
  const auto tidal = random_tidal(rng, dim);
  const double tol = 1e-12;

  EXPECT_NEAR(kernels::density_sum(f), ref::density_sum(f), tol * ref::density_sum(f));
  EXPECT_NEAR(kernels::imag_conj_dot(f, h), ref::imag_conj_dot(f, h), tol * ref::density_sum(f));
  EXPECT_NEAR(kernels::boundary_mass(f, g, 3.0), ref::boundary_mass(f, g, 3.0),
              tol * ref::density_sum(f));

  const auto pm = kernels::position_moments(f, g);
  const auto pr = ref::position_moments(f, g);
  const auto km = kernels::wavenumber_moments(f, g);
  const auto kr = ref::wavenumber_moments(f, g);
  EXPECT_NEAR(pm.mass, pr.mass, tol * pr.mass);
  EXPECT_NEAR(km.mass, kr.mass, tol * kr.mass);
  for (int a = 0; a < 3; ++a) {
    EXPECT_NEAR(pm.first[a], pr.first[a], tol * pr.mass * 10.0);
    EXPECT_NEAR(km.first[a], kr.first[a], tol * kr.mass * g.k_max());
  }
  const std::vector<double> mean{0.3, -0.2, 0.1};
  const auto cm = kernels::central_second_moments(f, g, mean);
  const auto cr = ref::central_second_moments(f, g, mean);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(cm[i], cr[i], tol * pr.mass * 100.0);

  // Pointwise kernels are bit-identical to the serial loops.
  const auto kin = kernels::kinetic_phase_table(g, 0.01);
  const auto kin_ref = ref::kinetic_phase_table(g, 0.01);
  EXPECT_EQ(std::memcmp(kin.data(), kin_ref.data(), kin.size() * sizeof(complex)), 0);
  for (auto model : {curvature::RateModel::first_order, curvature::RateModel::exact}) {
    const auto tid = kernels::tidal_phase_table(g, tidal, 31.4, model);
    const auto tid_ref = ref::tidal_phase_table(g, tidal, 31.4, model);
    EXPECT_EQ(std::memcmp(tid.data(), tid_ref.data(), tid.size() * sizeof(complex)), 0);
  }
  auto a = f;
  auto b = f;
  kernels::multiply(a, h);
  ref::multiply(b, h);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(complex)), 0);
}

INSTANTIATE_TEST_SUITE_P(Dims, KernelsVsReference, ::testing::Values(1, 2, 3));

TEST(Kernels, ReductionsIndependentOfThreadCount) {
  std::mt19937_64 rng(77);
  const SpectralGrid g(2, 64, 10.0);
  const auto f = oracle::random_field(rng, g.size());
  parallel::set_max_threads(1);
  const double one = kernels::density_sum(f);
  const auto m1 = kernels::position_moments(f, g);
  parallel::set_max_threads(4);
  const double four = kernels::density_sum(f);
  const auto m4 = kernels::position_moments(f, g);
  parallel::set_max_threads(0);
  EXPECT_EQ(one, four);
  EXPECT_EQ(m1.first, m4.first);
}

TEST(Kernels, TidalTableUsesQuadraticPhase) {
  const SpectralGrid g(1, 16, 8.0);
  const auto tidal = curvature::TidalMatrix::diagonal(std::vector{2e-3});
  const auto t = kernels::tidal_phase_table(g, tidal, 5.0, curvature::RateModel::first_order);
  for (int i = 0; i < 16; ++i) {
    const double x = g.positions()[i];
    EXPECT_NEAR(std::arg(t[i]), -5.0 * 2e-3 * x * x, 1e-15);
  }
}

TEST(Kernels, SmallFieldsReduce) {
  const ComplexField one{complex{2.0, 0.0}};
  EXPECT_EQ(kernels::density_sum(one), 4.0);
  EXPECT_EQ(kernels::density_sum(ComplexField{}), 0.0);
}
