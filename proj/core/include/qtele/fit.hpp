#pragma once

// Weighted least-squares fits of the HOM / teleportation model to
// visibility and fidelity data, and the visibility-maximizing alpha2.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtele/experiments.hpp"
#include "qtele/optimize.hpp"

namespace qtele {

enum class DataKind { kTwoFold, kThreeFold, kFidelityX };

std::string_view to_string(DataKind kind);
/// "two_fold", "three_fold" or "fidelity_x"; anything else is a DataError.
DataKind parse_data_kind(std::string_view text);

struct DataPoint {
  double alpha2 = 0.0;
  double y = 0.0;
  double sigma = 0.0;
  DataKind kind = DataKind::kTwoFold;
};

/// sigma <- max(sigma, sqrt(y)) when enabled.
std::vector<DataPoint> floor_uncertainties(std::vector<DataPoint> data, bool enabled = true);

/// Model parameters shared by all data kinds. Two-fold points use
/// (zeta2, eta_i2, mu); three-fold and X-basis fidelity points use
/// (zeta3, eta_i3, eta_s, mu).
struct ModelParameters {
  double mu = 8.0e-3;
  double eta_s = 4.5e-3;
  double zeta2 = 0.80;
  double eta_i2 = 6.9e-2;
  double zeta3 = 0.90;
  double eta_i3 = 1.2e-2;

  /// Throws InvalidArgument for an unknown name.
  double& operator[](std::string_view name);
  double operator[](std::string_view name) const;
};

inline constexpr std::string_view kParameterNames[] = {"mu", "eta_s", "zeta2", "eta_i2", "zeta3", "eta_i3"};

/// Model prediction for one point. Fidelity uses the X-basis analysis phase
/// `phi` if given, otherwise the phase is optimized.
double model_value(DataKind kind, double alpha2, const ModelParameters& p, std::optional<double> phi = {});

/// Analysis phase maximizing the intended coincidence at `alpha2`.
double optimal_phase(double alpha2, const ModelParameters& p);

struct FreeParameter {
  std::string name;
  Bounds bounds;
};

struct FitProblem {
  std::vector<DataPoint> data;
  std::vector<FreeParameter> free;
  ModelParameters fixed;  ///< values of everything not listed in `free`
  std::uint64_t seed = 1;
  bool floor_sigma = true;
  DeConfig de;
  int bootstrap_samples = 200;
};

/// Sum of ((y - model) / sigma)^2 with the free parameters set from `x`
/// (in the order of problem.free). Sigmas are used as given; flooring
/// happens in fit().
double objective(std::span<const double> x, const FitProblem& problem);

enum class UncertaintyMethod { kCurvature, kBootstrap };

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> uncertainties;
  UncertaintyMethod method = UncertaintyMethod::kCurvature;
  double objective = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  double estimate(std::string_view name) const;
  double uncertainty(std::string_view name) const;
};

/// Differential evolution followed by parameter_uncertainty.
FitResult fit(const FitProblem& problem);

/// Parameter sigmas from the finite-difference Hessian H of the objective:
/// cov = s^2 * 2 H^{-1} with s^2 = chi2_min / (n - p), the residual variance
/// scaling of classical nonlinear regression. Falls back to a seeded
/// parametric bootstrap when H is not positive definite. `problem.data` must
/// already carry the sigmas used in the fit.
void parameter_uncertainty(const FitProblem& problem, FitResult& result);

/// Parametric bootstrap: resamples y around the best-fit model with the data
/// sigmas, refits each one with Nelder-Mead from the estimate and reports the
/// sample standard deviation. Resamples are drawn up front from the seed.
void bootstrap_uncertainty(const FitProblem& problem, FitResult& result);

/// The same curvature estimate for an arbitrary objective; `scale` is the
/// s^2 factor. Throws NumericalError if the Hessian is not positive definite.
std::vector<double> curvature_uncertainty(const Objective& f, std::span<const double> x,
                                          std::span<const Bounds> bounds, double scale);

/// Bounds used for physical parameters: positive and at most one.
inline constexpr Bounds kUnitBounds{1e-6, 1.0};

/// Free {zeta2, eta_i2}; mu fixed. Only two_fold points are accepted.
FitResult fit_two_fold(const std::vector<DataPoint>& data, double mu, std::uint64_t seed, bool floor_sigma = true);

/// Free {zeta3}; eta_i3, eta_s, mu fixed. Either dataset may be empty (a
/// warning is recorded) but not both.
FitResult fit_three_fold_joint(const std::vector<DataPoint>& v3, const std::vector<DataPoint>& fx, double eta_i3,
                               double eta_s, double mu, std::uint64_t seed, bool floor_sigma = true);

/// alpha2 maximizing V2 or V3 for the other parameters in `p`. Scans a log
/// grid on [1e-7, 1] for the first + to - sign change of dV / dln(alpha2)
/// and bisects to relative 1e-6. Throws NoBracket if there is none.
double optimal_alpha2(VisibilityKind kind, const HomParams& p);

}  // namespace qtele
