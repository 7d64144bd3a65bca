#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qtele/detection.hpp"
#include "qtele/errors.hpp"
#include "qtele/gaussian.hpp"
#include "random_states.hpp"

namespace qtele {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

void expect_state_near(const GaussianState& a, const GaussianState& b, double tol) {
  ASSERT_EQ(a.n_modes(), b.n_modes());
  EXPECT_LE(max_abs(a.cov() - b.cov()), tol);
  EXPECT_LE(max_abs(a.disp() - b.disp()), tol);
}

TEST(Vacuum, SingleModeIsIdentityWithZeroDisplacement) {
  const auto v = vacuum_state(1);
  EXPECT_EQ(v.cov(), Matrix::Identity(2, 2));
  EXPECT_EQ(v.disp(), Vector::Zero(2));
}

TEST(Vacuum, ThreeModesIsIdentitySix) { EXPECT_EQ(vacuum_state(3).cov(), Matrix::Identity(6, 6)); }

TEST(Vacuum, SymplecticEigenvalueIsOne) {
  const auto nu = vacuum_state(1).symplectic_eigenvalues();
  ASSERT_EQ(nu.size(), 1u);
  EXPECT_NEAR(nu[0], 1.0, 1e-15);
}

TEST(Vacuum, ZeroModesRejected) { EXPECT_THROW(vacuum_state(0), InvalidArgument); }

TEST(Coherent, ZeroAmplitudeIsVacuum) { expect_state_near(coherent_state(0.0), vacuum_state(1), 0.0); }

TEST(Coherent, RealAmplitudeDisplacement) {
  const auto c = coherent_state(1.0);
  EXPECT_DOUBLE_EQ(c.disp()(0), kSqrt2);
  EXPECT_DOUBLE_EQ(c.disp()(1), 0.0);
  EXPECT_EQ(c.cov(), Matrix::Identity(2, 2));
}

TEST(Coherent, ImaginaryAmplitudeDisplacement) {
  const auto c = coherent_state({0.0, 0.5});
  EXPECT_DOUBLE_EQ(c.disp()(0), 0.0);
  EXPECT_DOUBLE_EQ(c.disp()(1), kSqrt2 * 0.5);
}

TEST(Coherent, MeanPhotonNumberIsAlphaSquared) {
  EXPECT_NEAR(coherent_state({0.3, -0.4}).mean_photon_number(0), 0.25, 1e-15);
}

TEST(Thermal, ZeroIsVacuum) { expect_state_near(thermal_state(0.0), vacuum_state(1), 0.0); }

TEST(Thermal, HalfPhotonGivesCovarianceTwo) { EXPECT_EQ(thermal_state(0.5).cov(), 2.0 * Matrix::Identity(2, 2)); }

TEST(Thermal, VacuumOverlapIsGeometricZeroWeight) {
  const ModeIndex m[] = {0};
  EXPECT_NEAR(vacuum_overlap(thermal_state(0.1), m), 1.0 / 1.1, 1e-15);
}

TEST(Thermal, NegativeRejected) { EXPECT_THROW(thermal_state(-1e-3), InvalidArgument); }

TEST(Tmsv, ZeroIsTwoModeVacuum) { expect_state_near(two_mode_squeezed_state(0.0), vacuum_state(2), 0.0); }

TEST(Tmsv, DeterminantIsOne) {
  for (double mu : {1e-6, 8e-3, 0.3, 2.0, 50.0}) {
    EXPECT_NEAR(two_mode_squeezed_state(mu).cov().determinant(), 1.0, 1e-10) << mu;
  }
}

TEST(Tmsv, MarginalsAreThermal) {
  const auto s = two_mode_squeezed_state(8e-3);
  for (ModeIndex k : {ModeIndex{0}, ModeIndex{1}}) {
    const ModeIndex keep[] = {k};
    expect_state_near(partial_trace(s, keep), thermal_state(8e-3), 1e-15);
  }
}

TEST(Tmsv, NegativeRejected) { EXPECT_THROW(two_mode_squeezed_state(-0.1), InvalidArgument); }

TEST(Tensor, VacuaComposeToVacuum) { expect_state_near(tensor(vacuum_state(1), vacuum_state(1)), vacuum_state(2), 0.0); }

TEST(Tensor, BlockDiagonalCovariance) {
  const auto s = tensor(coherent_state(0.7), thermal_state(0.2));
  Matrix expected = Matrix::Identity(4, 4);
  expected.bottomRightCorner(2, 2) *= 1.4;
  EXPECT_LT(max_abs(s.cov() - expected), 1e-15);
  EXPECT_EQ(s.n_modes(), 2u);
  EXPECT_EQ(tensor(vacuum_state(3), two_mode_squeezed_state(0.1)).n_modes(), 5u);
}

TEST(PhaseShifter, ZeroIsIdentity) { EXPECT_EQ(phase_shifter(0.0).matrix(), Matrix::Identity(2, 2)); }

TEST(PhaseShifter, QuarterTurnMatrix) {
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_LT(max_abs(phase_shifter(std::numbers::pi / 2).matrix() - expected), 1e-16);
}

TEST(PhaseShifter, InverseComposesToIdentity) {
  EXPECT_LT(max_abs((phase_shifter(0.73) * phase_shifter(-0.73)).matrix() - Matrix::Identity(2, 2)), 1e-15);
}

TEST(Beamsplitter, FullTransmissionIsIdentity) { EXPECT_EQ(beamsplitter(1.0, 0.0).matrix(), Matrix::Identity(4, 4)); }

TEST(Beamsplitter, BalancedEntries) {
  const double h = 1.0 / kSqrt2;
  Matrix expected(4, 4);
  expected << h, 0, 0, -h,
              0, h, h, 0,
              0, -h, h, 0,
              h, 0, 0, h;
  EXPECT_LT(max_abs(beamsplitter(h, h).matrix() - expected), 1e-16);
}

TEST(Beamsplitter, UnbalancedIsSymplectic) { EXPECT_LT(beamsplitter(0.8, 0.6).symplectic_defect(), 1e-10); }

TEST(Beamsplitter, NonUnitaryRejected) { EXPECT_THROW(beamsplitter(0.8, 0.7), InvalidArgument); }

TEST(Embed, IdentityStaysIdentity) {
  const ModeIndex m[] = {0};
  EXPECT_EQ(embed(SymplecticTransform::identity(1), m, 3).matrix(), Matrix::Identity(6, 6));
}

TEST(Embed, BalancedSplitterKeepsVacuum) {
  const ModeIndex m[] = {1, 2};
  const double h = 1.0 / kSqrt2;
  expect_state_near(apply_transform(vacuum_state(3), embed(beamsplitter(h, h), m, 3)), vacuum_state(3), 1e-15);
}

TEST(Embed, MatchesDirectTwoModeComputation) {
  // Splitter on modes (2, 0) of a 3-mode product state, against the same
  // splitter applied to the two-mode state (mode2, mode0) directly.
  const auto a = coherent_state({0.3, 0.1});
  const auto b = thermal_state(0.2);
  const auto c = coherent_state({-0.5, 0.4});
  const auto full = tensor(tensor(a, b), c);
  const ModeIndex m[] = {2, 0};
  const auto out = apply_transform(full, embed(beamsplitter(0.6, 0.8), m, 3));
  const auto direct = apply_transform(tensor(c, a), beamsplitter(0.6, 0.8));
  const ModeIndex keep[] = {2, 0};
  expect_state_near(partial_trace(out, keep), direct, 1e-15);
  const ModeIndex mid[] = {1};
  expect_state_near(partial_trace(out, mid), b, 0.0);
}

TEST(Embed, DuplicateOrOutOfRangeRejected) {
  const ModeIndex dup[] = {1, 1};
  const ModeIndex far[] = {0, 3};
  EXPECT_THROW(embed(beamsplitter(1, 0), dup, 3), InvalidArgument);
  EXPECT_THROW(embed(beamsplitter(1, 0), far, 3), InvalidArgument);
}

TEST(ApplyTransform, PassiveKeepsVacuum) {
  const ModeIndex m[] = {0, 1};
  expect_state_near(apply_transform(vacuum_state(2), embed(beamsplitter(0.28, 0.96), m, 2)), vacuum_state(2), 1e-15);
}

TEST(ApplyTransform, PhaseRotatesCoherentAmplitude) {
  const std::complex<double> alpha{0.4, -0.2};
  const double phi = 1.1;
  expect_state_near(apply_transform(coherent_state(alpha), phase_shifter(phi)),
                    coherent_state(alpha * std::polar(1.0, phi)), 1e-15);
}

TEST(ApplyTransform, DeterminantInvariant) {
  const auto s = tensor(thermal_state(0.3), two_mode_squeezed_state(0.5));
  const ModeIndex m[] = {0, 2};
  const auto out = apply_transform(s, embed(beamsplitter(0.6, 0.8), m, 3));
  EXPECT_NEAR(out.cov().determinant(), s.cov().determinant(), 1e-12);
}

TEST(ApplyTransform, DimensionMismatchRejected) {
  EXPECT_THROW(apply_transform(vacuum_state(3), beamsplitter(1, 0)), InvalidArgument);
}

TEST(ApplyLoss, UnitTransmissionIsIdentity) {
  const auto s = tensor(coherent_state(0.5), two_mode_squeezed_state(0.1));
  expect_state_near(apply_loss(s, {1, 1.0}), s, 0.0);
}

TEST(ApplyLoss, FullLossGivesVacuum) { expect_state_near(apply_loss(coherent_state({1.0, 2.0}), {0, 0.0}), vacuum_state(1), 0.0); }

TEST(ApplyLoss, HalvesThermalMean) {
  const auto out = apply_loss(thermal_state(0.4), {0, 0.5});
  expect_state_near(out, thermal_state(0.2), 1e-15);
  EXPECT_NEAR(((out.cov() - Matrix::Identity(2, 2)) / 2.0)(0, 0), 0.2, 1e-15);
}

TEST(ApplyLoss, InvalidArgumentsRejected) {
  EXPECT_THROW(apply_loss(vacuum_state(1), {1, 0.5}), InvalidArgument);
  EXPECT_THROW(apply_loss(vacuum_state(1), {0, 1.5}), InvalidArgument);
}

TEST(PartialTrace, KeepingEverythingIsIdentity) {
  const auto s = tensor(coherent_state(0.5), two_mode_squeezed_state(0.1));
  const ModeIndex all[] = {0, 1, 2};
  expect_state_near(partial_trace(s, all), s, 0.0);
}

TEST(PartialTrace, ProductReducesToFactor) {
  const auto a = tensor(coherent_state({0.1, 0.2}), thermal_state(0.3));
  const auto s = tensor(a, two_mode_squeezed_state(0.1));
  const ModeIndex keep[] = {0, 1};
  expect_state_near(partial_trace(s, keep), a, 0.0);
}

TEST(PartialTrace, EmptyKeepRejected) {
  EXPECT_THROW(partial_trace(vacuum_state(2), std::span<const ModeIndex>{}), InvalidArgument);
}

// --- properties on random states --------------------------------------------

class RandomStates : public ::testing::TestWithParam<int> {};

TEST_P(RandomStates, EveryTransformIsSymplectic) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t = u(rng);
  EXPECT_LT(beamsplitter(t, std::sqrt(1 - t * t)).symplectic_defect(), 1e-10);
  EXPECT_LT(phase_shifter(10 * u(rng)).symplectic_defect(), 1e-10);
  const ModeIndex m[] = {3, 1};
  const auto composite = embed(beamsplitter(t, std::sqrt(1 - t * t)), m, 5) *
                         embed(phase_shifter(u(rng)), std::span<const ModeIndex>(m, 1), 5);
  EXPECT_LT(composite.symplectic_defect(), 1e-10);
  EXPECT_NO_THROW(SymplecticTransform::from_matrix(composite.matrix()));
}

TEST_P(RandomStates, OperationsPreservePhysicality) {
  std::mt19937_64 rng(GetParam());
  const auto recipe = testing::random_recipe(rng, 4, 2.0);
  const auto s = testing::gaussian_from(recipe);
  EXPECT_TRUE(s.is_physical());
  for (double nu : s.symplectic_eigenvalues()) EXPECT_GE(nu, 1.0 - 1e-9);
  const ModeIndex keep[] = {2, 0};
  EXPECT_TRUE(partial_trace(s, keep).is_physical());
  EXPECT_TRUE(apply_loss(s, {3, 0.37}).is_physical());
}

TEST_P(RandomStates, LossSemigroup) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto s = testing::gaussian_from(testing::random_recipe(rng, 3, 1.0));
  const double e1 = u(rng), e2 = u(rng);
  expect_state_near(apply_loss(apply_loss(s, {1, e1}), {1, e2}), apply_loss(s, {1, e1 * e2}), 1e-12);
}

TEST_P(RandomStates, Composition) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto s = testing::gaussian_from(testing::random_recipe(rng, 3, 1.0));
  const ModeIndex a[] = {0, 2};
  const ModeIndex b[] = {1};
  const auto s1 = embed(beamsplitter(0.6, 0.8), a, 3);
  const auto s2 = embed(phase_shifter(6 * u(rng)), b, 3);
  expect_state_near(apply_transform(apply_transform(s, s1), s2), apply_transform(s, s2 * s1), 1e-12);
}

TEST_P(RandomStates, PureConstructorsHaveUnitDeterminant) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const double mu = u(rng);
  EXPECT_NEAR(coherent_state({u(rng), u(rng)}).cov().determinant(), 1.0, 1e-10);
  EXPECT_NEAR(two_mode_squeezed_state(mu).cov().determinant(), 1.0, 1e-10);
  EXPECT_NEAR(vacuum_state(4).cov().determinant(), 1.0, 1e-10);
  EXPECT_NEAR(thermal_state(mu).cov().determinant(), (1 + 2 * mu) * (1 + 2 * mu), 1e-10 * (1 + 2 * mu) * (1 + 2 * mu));
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomStates, ::testing::Range(1, 21));

TEST(SymplecticTransform, NonSymplecticMatrixRejected) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = 2.0;
  EXPECT_THROW(SymplecticTransform::from_matrix(m), InvalidArgument);
}

TEST(SymplecticTransform, SqueezerAccepted) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0 / 3.0;
  EXPECT_NO_THROW(SymplecticTransform::from_matrix(m));
}

TEST(GaussianState, UnphysicalCovarianceDetected) {
  GaussianState s(0.5 * Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_FALSE(s.is_physical());
}

TEST(GaussianState, BadShapesRejected) {
  EXPECT_THROW(GaussianState(Matrix::Identity(3, 3), Vector::Zero(3)), InvalidArgument);
  EXPECT_THROW(GaussianState(Matrix::Identity(2, 2), Vector::Zero(4)), InvalidArgument);
}

}  // namespace
}  // namespace qtele
