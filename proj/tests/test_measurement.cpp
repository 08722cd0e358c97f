#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmem/measurement.hpp"
#include "test_support.hpp"

using namespace qmem;
using std::numbers::pi;

namespace {

// Closed form for a Fock state: (2/pi) (-1)^n e^{-2|a|^2} L_n(4|a|^2).
double fock_wigner(int n, Complex alpha) {
  const double r2 = std::norm(alpha);
  return 2.0 / pi * (n % 2 ? -1.0 : 1.0) * std::exp(-2.0 * r2) * std::laguerre(n, 4.0 * r2);
}

ReadoutModel ideal() { return ReadoutModel{}; }

}  // namespace

TEST(Readout, Validation) {
  ReadoutModel ro;
  ro.contrast = 0.0;
  EXPECT_THROW(ro.validate(), DomainError);
  ro = ReadoutModel{};
  ro.contrast = 0.8;
  ro.baseline = 0.3;
  EXPECT_THROW(ro.validate(), DomainError);
  ro = ReadoutModel{};
  ro.shots = 0;
  EXPECT_THROW(ro.validate(), DomainError);
}

TEST(Readout, IdealExamples) {
  const HilbertDims dims{20, 2};
  EXPECT_NEAR(readout_probability(fock_state(0, dims), ideal()), 1.0, 1e-15);
  EXPECT_NEAR(readout_probability(fock_state(1, dims), ideal()), 0.0, 1e-15);
  EXPECT_NEAR(readout_probability(coherent_state(std::sqrt(2.0), dims), ideal()), std::exp(-2.0), 1e-12);
}

TEST(Readout, AffineInSelectedPopulationAndMarginalizesTransmon) {
  const HilbertDims dims{20, 2};
  std::mt19937_64 rng(12);
  ReadoutModel ro;
  ro.contrast = 0.7;
  ro.baseline = 0.1;
  ro.selective_photon = 1;
  const QuantumState a = test::random_state(dims, rng);
  const QuantumState b = coherent_state(Complex(0.3, 1.0), dims);
  const double pa = a.photon_distribution()(1), pb = b.photon_distribution()(1);
  const double slope = (readout_probability(a, ro) - readout_probability(b, ro)) / (pa - pb);
  EXPECT_NEAR(slope, 0.7, 1e-12);
  EXPECT_NEAR(readout_probability(a, ro) - slope * pa, 0.1, 1e-12);
  ComplexVector excited_one = ComplexVector::Zero(dims.dim());
  excited_one(dims.index(1, 1)) = 1.0;
  EXPECT_NEAR(readout_probability(QuantumState::from_pure(dims, excited_one), ro), 0.8, 1e-15);
}

TEST(Shots, DegenerateProbabilities) {
  ReadoutModel ro;
  for (int shots : {1, 7, 10000}) {
    ro.shots = shots;
    EXPECT_EQ(sample_shots(0.0, ro, 3), 0.0);
    EXPECT_EQ(sample_shots(1.0, ro, 3), 1.0);
  }
}

TEST(Shots, HalfProbabilityBound) {
  ReadoutModel ro;
  ro.shots = 10000;
  for (std::uint64_t i = 0; i < 200; ++i) {
    ro.rng_seed = i;
    EXPECT_NEAR(sample_shots(0.5, ro, i), 0.5, 0.02);
  }
}

TEST(Shots, DeterministicPerSeedAndIndex) {
  ReadoutModel ro;
  ro.shots = 1000;
  ro.rng_seed = 42;
  const double a = sample_shots(0.37, ro, 5);
  EXPECT_EQ(a, sample_shots(0.37, ro, 5));
  bool differs = false;
  for (std::uint64_t i = 0; i < 10; ++i) differs |= sample_shots(0.37, ro, i) != a;
  EXPECT_TRUE(differs);
}

TEST(Shots, LawOfLargeNumbers) {
  ReadoutModel ro;
  ro.shots = 100;
  ro.rng_seed = 2024;
  const double p = 0.3;
  double sum = 0.0;
  const int points = 1000;
  for (int i = 0; i < points; ++i) sum += sample_shots(p, ro, i);
  const double sigma = std::sqrt(p * (1 - p) / (100.0 * points));
  EXPECT_NEAR(sum / points, p, 3 * sigma);
}

TEST(Parity, Expectations) {
  const HilbertDims dims{30, 2};
  const ComplexMatrix par = parity_operator(dims);
  EXPECT_NEAR(expectation(fock_state(0, dims), par).real(), 1.0, 1e-15);
  EXPECT_NEAR(expectation(fock_state(1, dims), par).real(), -1.0, 1e-15);
  for (Complex alpha : {Complex(0.5, 0.0), Complex(1.0, -0.7), Complex(0.0, 1.5)}) {
    EXPECT_NEAR(expectation(coherent_state(alpha, dims), par).real(), std::exp(-2.0 * std::norm(alpha)), 1e-10);
  }
}

TEST(Wigner, OriginValues) {
  const HilbertDims dims{25, 2};
  EXPECT_NEAR(wigner_at(fock_state(0, dims).cavity_reduced(), 0.0), 2.0 / pi, 1e-12);
  EXPECT_NEAR(wigner_at(fock_state(1, dims).cavity_reduced(), 0.0), -2.0 / pi, 1e-12);
}

TEST(Wigner, FockStatesMatchLaguerreClosedForm) {
  const HilbertDims dims{36, 2};
  for (int n : {0, 1, 2, 3}) {
    const ComplexMatrix rho = fock_state(n, dims).cavity_reduced();
    for (Complex alpha : {Complex(0.3, 0.1), Complex(-0.8, 0.6), Complex(1.1, -1.2), Complex(0.0, 2.0)}) {
      EXPECT_NEAR(wigner_at(rho, alpha), fock_wigner(n, alpha), 1e-9) << "n=" << n << " alpha=" << alpha;
    }
  }
}

TEST(Wigner, VacuumQuadrature) {
  const HilbertDims dims{36, 2};
  const WignerGrid g = wigner(fock_state(0, dims), {-3.0, 3.0, -3.0, 3.0, 121, 121});
  EXPECT_NEAR(g.integral(), 1.0, 1e-3);
}

TEST(Wigner, DisplacedVacuumIsTranslated) {
  const HilbertDims dims{36, 2};
  const Complex beta(0.6, -0.4);
  const QuantumState displaced = apply_gate(fock_state(0, dims), Displace{beta}, dims);
  const WignerGridSpec spec{-2.0, 2.0, -2.0, 2.0, 21, 21};
  const WignerGrid g = wigner(displaced, spec);
  for (int i = 0; i < spec.n_re; ++i) {
    for (int j = 0; j < spec.n_im; ++j) {
      const Complex alpha(g.re[i], g.im[j]);
      EXPECT_NEAR(g.values(i, j), fock_wigner(0, alpha - beta), 1e-6);
    }
  }
}

TEST(Wigner, BoundedAndNormalizedForRandomStates) {
  const HilbertDims dims{25, 2};
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const QuantumState s = test::random_state(dims, rng, 2, 2);
    const WignerGrid g = wigner(s);
    EXPECT_LE(g.values.cwiseAbs().maxCoeff(), 2.0 / pi + 1e-6);
    EXPECT_NEAR(g.integral(), 1.0, 2e-3);
  }
}

TEST(Wigner, SymmetricStateGivesSymmetricGrid) {
  const HilbertDims dims{25, 2};
  const WignerGrid g = wigner(fock_state(2, dims));
  EXPECT_LT((g.values - g.values.reverse()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((g.values - g.values.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Wigner, TruncationGuard) {
  EXPECT_NEAR(wigner_bound_limit(25), 2.5, 1e-15);
  EXPECT_THROW(wigner(fock_state(0, {20, 2})), DomainError);
  EXPECT_NO_THROW(wigner(fock_state(0, {20, 2}), {-2.0, 2.0, -2.0, 2.0, 5, 5}));
}

TEST(Nbar, ColdCavity) {
  DeviceModel m;
  EXPECT_NEAR(nbar_estimate(m, {10, 2}, ideal()), 0.0, 1e-6);
}

TEST(Nbar, ThermalOracle) {
  DeviceModel m;
  m.nbar_th = 0.05;
  const NbarEstimate e = nbar_estimate_detail(m, {12, 2}, ideal());
  // Thermal P(0) = 1/(1 + nbar), so -ln P(0) = ln(1.05).
  EXPECT_NEAR(e.p0, 1.0 / 1.05, 1e-6);
  EXPECT_NEAR(e.nbar, 0.05, 0.002);
  EXPECT_GE(e.settle_time, 10 * m.cavity_T1);
  EXPECT_LE(e.residual, 1e-6);
}

TEST(Nbar, WarmerCavityInReportedRange) {
  DeviceModel m;
  m.nbar_th = 0.08;
  const double n = nbar_estimate(m, {12, 2}, ideal());
  EXPECT_GT(n, 0.03);
  EXPECT_LT(n, 0.11);
  EXPECT_NEAR(n, std::log(1.08), 1e-6);
}
