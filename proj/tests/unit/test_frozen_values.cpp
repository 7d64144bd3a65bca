// Values computed independently and frozen here:
//   closed-form rows and optima: tests/oracles/closed_forms.py (mpmath, 50 digits)
//   teleportation rows and fidelity maxima: tests/oracles/gaussian_reference.py
//     (extended-precision section)
//   classical rows: tests/oracles/gaussian_reference.py (numpy)
//
// The probabilities here are differences of order-one terms, so a
// double-precision result carries an absolute error of a few 1e-16 no matter
// how it is computed (long double in the closed forms: a few 1e-19).
// Tolerances are that absolute floor, propagated into the ratios.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qtele/experiments.hpp"
#include "qtele/fit.hpp"

namespace qtele {
namespace {

struct HomRow {
  double alpha2, mu, zeta, eta_i, eta_s;
  double p2, p3, v2, v3;
};

constexpr HomRow kHomRows[] = {
    {0.001, 0.008, 0.8, 0.069, 0.0045, 5.0121150927156772e-7, 1.8441819619315179e-9, 0.26038541844066904,
     0.30419610437155767},
    {0.0022, 0.008, 0.9, 0.012, 0.0045, 1.2332541518435434e-6, 1.7666997037240887e-10, 0.064786945580300098,
     0.68852706637846161},
    {1e-06, 0.0001, 1.0, 1.0, 1.0, 4.9994975753668159e-9, 4.9992476004893036e-9, 0.0099009900253700752,
     0.0099014801976546613},
    {0.05, 0.05, 0.5, 0.1, 0.3, 0.00071117748522427178, 4.4012487291597921e-5, 0.040899084613733913,
     0.18042312435475048},
    {0.3, 0.02, 0.0, 0.7, 0.9, 0.021140157004002218, 0.0019184168228434585, 0.0, 0.0},
};

// Rounding floor of the long-double closed forms.
constexpr double kClosedAbs = 2e-18;

// |dV| <= (1 - V) (dp / p + dp0 / p0) <= 2 dp (1 - V) / p since p0 >= p.
double visibility_tol(double v, double p, double abs_err) { return 2.0 * abs_err * (1.0 - v) / p + 1e-15; }

class FrozenHom : public ::testing::TestWithParam<HomRow> {};

TEST_P(FrozenHom, ClosedForms) {
  const auto& r = GetParam();
  const HomParams p{r.alpha2, r.mu, r.zeta, r.eta_i, r.eta_s};
  EXPECT_NEAR(p_two_fold_closed(p), r.p2, kClosedAbs + 1e-15 * r.p2);
  EXPECT_NEAR(p_three_fold_closed(p), r.p3, kClosedAbs + 1e-15 * r.p3);
  EXPECT_NEAR(v_two_fold(p), r.v2, visibility_tol(r.v2, r.p2, kClosedAbs));
  EXPECT_NEAR(v_three_fold(p), r.v3, visibility_tol(r.v3, r.p3, kClosedAbs));
}

TEST_P(FrozenHom, Pipeline) {
  const auto& r = GetParam();
  const HomParams p{r.alpha2, r.mu, r.zeta, r.eta_i, r.eta_s};
  EXPECT_NEAR(p_two_fold_pipeline(p), r.p2, 1e-14 + 1e-7 * r.p2);
  EXPECT_NEAR(p_three_fold_pipeline(p), r.p3, 1e-14 + 1e-5 * r.p3);
}

INSTANTIATE_TEST_SUITE_P(Rows, FrozenHom, ::testing::ValuesIn(kHomRows));

TEST(FrozenOptima, TwoFoldArgmax) {
  EXPECT_NEAR(optimal_alpha2(VisibilityKind::kTwoFold, {0.0, 8e-3, 0.8, 0.069, 1.0}), 0.00078043049065419324,
              1e-6 * 0.00078043049065419324);
}

TEST(FrozenOptima, ThreeFoldArgmax) {
  EXPECT_NEAR(optimal_alpha2(VisibilityKind::kThreeFold, {0.0, 8e-3, 0.9, 0.012, 0.0045}), 0.0021633533831292129,
              1e-6 * 0.0021633533831292129);
}

TEST(FrozenOptima, IdealTwoFoldOnRidge) {
  const HomParams p{std::numbers::sqrt2 * 1e-4, 1e-4, 1.0, 1.0, 1.0};
  EXPECT_NEAR(v_two_fold(p), 0.41421356157304536, visibility_tol(0.41421356157304536, p_two_fold_closed(p), kClosedAbs));
}

TEST(FrozenOptima, IdealThreeFoldPeakAtSmallPairRate) {
  const double a = optimal_alpha2(VisibilityKind::kThreeFold, {0.0, 1e-5, 1.0, 1.0, 1.0});
  EXPECT_NEAR(v_three_fold({a, 1e-5, 1.0, 1.0, 1.0}), 0.99684605079167896, 1e-9);
}

// Rounding floor of the double-precision inclusion-exclusion sums.
constexpr double kDoubleAbs = 4e-15;

struct TeleportRow {
  TeleportParams params;
  double p6, p5;
};

TeleportParams make(double a2, double mu, double z, double ei, double es, double phi, Basis b, double eps,
                    double theta) {
  TeleportParams p;
  p.alpha2 = a2;
  p.mu = mu;
  p.zeta = z;
  p.eta_i = ei;
  p.eta_s = es;
  p.phi = phi;
  p.basis = b;
  p.epsilon = eps;
  p.theta_in = theta;
  return p;
}

TEST(FrozenTeleport, ConditionalProbabilities) {
  const TeleportRow rows[] = {
      {make(1e-3, 8e-3, 0.9, 1.2e-2, 4.5e-3, std::numbers::pi / 2, Basis::X, std::numbers::sqrt2 / 2, 0.0),
       2.1799853011662516e-10, 4.1861543361225766e-11},
      {make(2e-2, 3e-2, 0.5, 0.3, 0.6, 0.4, Basis::X, 0.6, 0.7), 4.3369317965608378e-5, 3.2256812592791208e-5},
      {make(5e-3, 1e-2, 1.0, 1.0, 1.0, 0.0, Basis::Z, 1.0, 0.0), 4.9319417565165265e-5, 2.4751559788121342e-5},
  };
  for (const auto& r : rows) {
    const auto probs = bsm_conditional_probs(r.params);
    EXPECT_NEAR(probs.p_d1d4d6, r.p6, kDoubleAbs);
    EXPECT_NEAR(probs.p_d1d4d5, r.p5, kDoubleAbs);
  }
}

double best_fidelity(double zeta) {
  // Golden-section search in log alpha2 around the known peak.
  auto f = [&](double la) {
    return *fidelity(make(std::exp(la), 8e-3, zeta, 1.2e-2, 4.5e-3, 0.0, Basis::X, std::numbers::sqrt2 / 2, 0.0))
                .value;
  };
  double lo = std::log(3e-4), hi = std::log(4e-3);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > 1e-4) {
    if (fc > fd) {
      hi = d, d = c, fd = fc, c = hi - g * (hi - lo), fc = f(c);
    } else {
      lo = c, c = d, fc = fd, d = lo + g * (hi - lo), fd = f(d);
    }
  }
  return std::max(fc, fd);
}

TEST(FrozenTeleport, FidelityMaxima) {
  // P6 + P5 is about 2.6e-10 at the peak, so kDoubleAbs moves F by ~1e-5.
  EXPECT_NEAR(best_fidelity(0.9), 0.839061235434907, 2e-5);
  EXPECT_NEAR(best_fidelity(1.0), 0.918637131768221, 2e-5);
}

TEST(FrozenClassical, PhaseAveragedInputs) {
  EXPECT_NEAR(hom_generalized(coherent_state(std::sqrt(1e-3)), coherent_state(std::sqrt(1e-3)), 1.0), 0.4999999895,
              1e-9);
  EXPECT_NEAR(hom_generalized(thermal_state(1e-3), thermal_state(1e-3), 1.0), 0.3333332777, 1e-9);
}

}  // namespace
}  // namespace qtele
