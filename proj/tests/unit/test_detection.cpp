#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qtele/detection.hpp"
#include "qtele/errors.hpp"
#include "qtele/experiments.hpp"
#include "qtele/fock.hpp"
#include "random_states.hpp"

namespace qtele {
namespace {

DetectionSpec groups(std::initializer_list<std::vector<ModeIndex>> gs) {
  DetectionSpec spec;
  int k = 0;
  for (const auto& g : gs) spec.on_groups.push_back({"G" + std::to_string(k++), g});
  return spec;
}

TEST(VacuumOverlap, VacuumIsOne) {
  const ModeIndex m[] = {0};
  EXPECT_NEAR(vacuum_overlap(vacuum_state(1), m), 1.0, 1e-15);
}

TEST(VacuumOverlap, CoherentIsPoissonZeroWeight) {
  const ModeIndex m[] = {0};
  const std::complex<double> alpha{0.3, -0.7};
  EXPECT_NEAR(vacuum_overlap(coherent_state(alpha), m), std::exp(-std::norm(alpha)), 1e-15);
}

TEST(VacuumOverlap, ThermalIsGeometricZeroWeight) {
  const ModeIndex m[] = {0};
  EXPECT_NEAR(vacuum_overlap(thermal_state(0.25), m), 1.0 / 1.25, 1e-15);
}

TEST(VacuumOverlap, UnphysicalInputRaises) {
  GaussianState bad(-3.0 * Matrix::Identity(2, 2), Vector::Zero(2));
  const ModeIndex m[] = {0};
  EXPECT_THROW(vacuum_overlap(bad, m), NumericalError);
}

TEST(Coincidence, VacuumNeverClicks) {
  EXPECT_NEAR(coincidence_probability(vacuum_state(4), groups({{0, 1}, {2}})), 0.0, 1e-15);
}

TEST(Coincidence, TwoGroupsMatchFourTermExpansion) {
  std::mt19937_64 rng(11);
  const auto s = testing::gaussian_from(testing::random_recipe(rng, 3, 0.5));
  const ModeIndex a[] = {0}, b[] = {2}, ab[] = {0, 2};
  const double expected = 1.0 - vacuum_overlap(s, a) - vacuum_overlap(s, b) + vacuum_overlap(s, ab);
  EXPECT_NEAR(coincidence_probability(s, groups({{0}, {2}})), expected, 1e-15);
}

TEST(Coincidence, HomThreeFoldMatchesEightTermExpansion) {
  const auto s = build_hom_state({1e-2, 5e-2, 0.7, 0.3, 0.6});
  const std::vector<ModeIndex> g1{0, 1, 2}, g2{3, 4, 5}, g3{6};
  auto p0 = [&](std::vector<ModeIndex> modes) { return modes.empty() ? 1.0 : vacuum_overlap(s, modes); };
  auto cat = [](std::vector<ModeIndex> a, const std::vector<ModeIndex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const double expected = 1.0 - p0(g1) - p0(g2) - p0(g3) + p0(cat(g1, g2)) + p0(cat(g1, g3)) + p0(cat(g2, g3)) -
                          p0(cat(cat(g1, g2), g3));
  DetectionSpec spec{{HomLayout::d1(), HomLayout::d2(), HomLayout::d3()}};
  EXPECT_NEAR(coincidence_probability(s, spec), expected, 1e-15);
}

TEST(Coincidence, SingleCoherentGroupClicks) {
  EXPECT_NEAR(coincidence_probability(coherent_state(0.5), groups({{0}})), 1.0 - std::exp(-0.25), 1e-15);
}

TEST(DetectionSpec, InvalidGroupsRejected) {
  EXPECT_THROW(groups({{0, 1}, {1}}).validate(3), InvalidArgument);
  EXPECT_THROW(groups({{}}).validate(3), InvalidArgument);
  EXPECT_THROW(groups({{3}}).validate(3), InvalidArgument);
  EXPECT_THROW(coincidence_probability(vacuum_state(2), groups({{0}, {0}})), InvalidArgument);
}

class RandomDetection : public ::testing::TestWithParam<int> {};

TEST_P(RandomDetection, AddingGroupNeverIncreasesProbability) {
  std::mt19937_64 rng(GetParam());
  const auto s = testing::gaussian_from(testing::random_recipe(rng, 4, 1.0));
  const double p1 = coincidence_probability(s, groups({{0, 1}}));
  const double p2 = coincidence_probability(s, groups({{0, 1}, {2}}));
  const double p3 = coincidence_probability(s, groups({{0, 1}, {2}, {3}}));
  EXPECT_LE(p2, p1 + 1e-15);
  EXPECT_LE(p3, p2 + 1e-15);
  EXPECT_GE(p3, 0.0);
}

TEST_P(RandomDetection, ClickAndVacuumAreComplementary) {
  std::mt19937_64 rng(GetParam());
  const auto s = testing::gaussian_from(testing::random_recipe(rng, 3, 1.0));
  const std::vector<ModeIndex> g{1, 2};
  EXPECT_NEAR(coincidence_probability(s, groups({g})) + vacuum_overlap(s, g), 1.0, 1e-12);
}

TEST_P(RandomDetection, AgreesWithFockOracle) {
  std::mt19937_64 rng(GetParam());
  const std::size_t n = 1 + static_cast<std::size_t>(GetParam() % 3);
  const auto recipe = testing::random_recipe(rng, n, 0.1);
  const int cutoff = std::max(fock::coherent_cutoff(std::norm(recipe.alpha), 5e-10),
                              fock::tmsv_cutoff(recipe.mu, 5e-10));
  const auto g = testing::gaussian_from(recipe);
  const auto f = testing::fock_from(recipe, cutoff);
  std::vector<DetectionSpec> specs{groups({{0}})};
  if (n >= 2) specs.push_back(groups({{0}, {1}}));
  if (n >= 3) specs.push_back(groups({{0, 2}, {1}}));
  if (n >= 3) specs.push_back(groups({{0}, {1}, {2}}));
  for (const auto& spec : specs) {
    EXPECT_NEAR(coincidence_probability(g, spec), fock::oracle_probability(f, spec), 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomDetection, ::testing::Range(1, 31));

}  // namespace
}  // namespace qtele
