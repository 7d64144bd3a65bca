#include "qtele/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "qtele/errors.hpp"
#include "qtele/parallel.hpp"

namespace qtele {
namespace {

ModelParameters with_free(const FitProblem& problem, std::span<const double> x) {
  ModelParameters p = problem.fixed;
  for (std::size_t k = 0; k < problem.free.size(); ++k) p[problem.free[k].name] = x[k];
  return p;
}

// Geometric centre of the fidelity points, where the analysis phase is
// optimized once per parameter vector.
std::optional<double> fidelity_anchor(const std::vector<DataPoint>& data) {
  double log_sum = 0.0;
  int n = 0;
  for (const auto& d : data) {
    if (d.kind == DataKind::kFidelityX) {
      log_sum += std::log(d.alpha2);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return std::exp(log_sum / n);
}

double chi2(const std::vector<DataPoint>& data, const ModelParameters& p, std::optional<double> anchor) {
  std::optional<double> phi;
  if (anchor) phi = optimal_phase(*anchor, p);
  double s = 0.0;
  for (const auto& d : data) {
    const double r = (d.y - model_value(d.kind, d.alpha2, p, phi)) / d.sigma;
    s += r * r;
  }
  return s;
}

void check_problem(const FitProblem& problem) {
  if (problem.data.empty()) throw InvalidArgument("fit: empty dataset");
  if (problem.free.empty()) throw InvalidArgument("fit: no free parameters");
  ModelParameters probe;
  for (const auto& f : problem.free) {
    probe[f.name];  // validates the name
    if (!(f.bounds.lo > 0.0 && f.bounds.hi <= 1.0 && f.bounds.lo < f.bounds.hi)) {
      throw InvalidArgument("fit: bounds for " + f.name + " must lie in (0, 1]");
    }
  }
  for (const auto& d : problem.data) {
    if (!(d.alpha2 > 0.0) || !std::isfinite(d.alpha2)) throw DataError("alpha2 must be positive");
    if (!std::isfinite(d.y)) throw DataError("y must be finite");
  }
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

double sample_stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("fit result has no parameter " + std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::string_view to_string(DataKind kind) {
  switch (kind) {
    case DataKind::kTwoFold: return "two_fold";
    case DataKind::kThreeFold: return "three_fold";
    case DataKind::kFidelityX: return "fidelity_x";
  }
  return "?";
}

DataKind parse_data_kind(std::string_view text) {
  if (text == "two_fold") return DataKind::kTwoFold;
  if (text == "three_fold") return DataKind::kThreeFold;
  if (text == "fidelity_x") return DataKind::kFidelityX;
  throw DataError("unknown kind '" + std::string(text) + "' (expected two_fold, three_fold or fidelity_x)");
}

std::vector<DataPoint> floor_uncertainties(std::vector<DataPoint> data, bool enabled) {
  if (!enabled) return data;
  for (auto& d : data) {
    if (d.y > 0.0) d.sigma = std::max(d.sigma, std::sqrt(d.y));
  }
  return data;
}

double& ModelParameters::operator[](std::string_view name) {
  if (name == "mu") return mu;
  if (name == "eta_s") return eta_s;
  if (name == "zeta2") return zeta2;
  if (name == "eta_i2") return eta_i2;
  if (name == "zeta3") return zeta3;
  if (name == "eta_i3") return eta_i3;
  throw InvalidArgument("unknown model parameter '" + std::string(name) + "'");
}

double ModelParameters::operator[](std::string_view name) const {
  return const_cast<ModelParameters&>(*this)[name];
}

double optimal_phase(double alpha2, const ModelParameters& p) {
  const TeleportCircuit circuit(TeleportParams{alpha2, p.mu, p.zeta3, p.eta_i3, p.eta_s});
  auto intended = [&](double phi) { return circuit.probabilities(phi).p_d1d4d6; };
  // Coarse scan, then bisection on P(phi + pi/2) - P(phi - pi/2), which
  // changes sign at the peak. A direct search stalls on the flat top: the
  // three-fold terms cancel to ~1e-16 against a peak of ~1e-10.
  constexpr int kSteps = 32;
  const double step = 2.0 * std::numbers::pi / kSteps;
  int best = 0;
  double best_value = -1.0;
  for (int k = 0; k < kSteps; ++k) {
    const double v = intended(k * step);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  const double quarter = std::numbers::pi / 2.0;
  auto slope = [&](double phi) { return intended(phi + quarter) - intended(phi - quarter); };
  double a = (best - 1) * step, b = (best + 1) * step;
  if (!(slope(a) > 0.0 && slope(b) < 0.0)) return best * step;
  while (b - a > 1e-10) {
    const double m = 0.5 * (a + b);
    (slope(m) > 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

double model_value(DataKind kind, double alpha2, const ModelParameters& p, std::optional<double> phi) {
  switch (kind) {
    case DataKind::kTwoFold: return v_two_fold({alpha2, p.mu, p.zeta2, p.eta_i2, 1.0});
    case DataKind::kThreeFold: return v_three_fold({alpha2, p.mu, p.zeta3, p.eta_i3, p.eta_s});
    case DataKind::kFidelityX: {
      TeleportParams t{alpha2, p.mu, p.zeta3, p.eta_i3, p.eta_s};
      FidelityOptions opts;
      if (phi) {
        t.phi = *phi;
        opts.optimize_phi = false;
      }
      const auto f = fidelity(t, opts);
      if (!f.value) throw UndefinedValue("fidelity undefined: no BSM + signal coincidences");
      return *f.value;
    }
  }
  throw InvalidArgument("model_value: bad kind");
}

double objective(std::span<const double> x, const FitProblem& problem) {
  if (x.size() != problem.free.size()) throw InvalidArgument("objective: wrong number of parameters");
  return chi2(problem.data, with_free(problem, x), fidelity_anchor(problem.data));
}

double FitResult::estimate(std::string_view name) const { return estimates[index_of(names, name)]; }
double FitResult::uncertainty(std::string_view name) const { return uncertainties[index_of(names, name)]; }

FitResult fit(const FitProblem& input) {
  check_problem(input);
  FitProblem problem = input;
  problem.data = floor_uncertainties(std::move(problem.data), problem.floor_sigma);
  for (const auto& d : problem.data) {
    if (!(d.sigma > 0.0)) throw DataError("sigma must be positive");
  }
  std::vector<Bounds> bounds;
  FitResult result;
  for (const auto& f : problem.free) {
    bounds.push_back(f.bounds);
    result.names.push_back(f.name);
  }
  const auto de = differential_evolution([&](std::span<const double> x) { return objective(x, problem); }, bounds,
                                         problem.de, problem.seed);
  result.estimates = de.x;
  result.objective = de.value;
  result.iterations = de.iterations;
  result.evaluations = de.evaluations;
  result.converged = de.converged;
  if (!de.converged) result.warnings.push_back("differential evolution hit the generation limit");
  parameter_uncertainty(problem, result);
  return result;
}

std::vector<double> curvature_uncertainty(const Objective& f, std::span<const double> x,
                                          std::span<const Bounds> bounds, double scale) {
  const std::size_t n = x.size();
  if (bounds.size() != n) throw InvalidArgument("curvature_uncertainty: bounds size mismatch");
  std::vector<double> h(n), c(x.begin(), x.end());
  for (std::size_t k = 0; k < n; ++k) {
    const double width = bounds[k].hi - bounds[k].lo;
    h[k] = 1e-3 * std::max(std::abs(x[k]), 1e-3 * width);
    // Keep the stencil inside the box.
    c[k] = std::clamp(x[k], bounds[k].lo + h[k], bounds[k].hi - h[k]);
  }
  auto at = [&](std::size_t i, int si, std::size_t j, int sj) {
    std::vector<double> y = c;
    y[i] += si * h[i];
    y[j] += sj * h[j];
    return f(y);
  };
  const double f0 = f(c);
  Eigen::MatrixXd hess(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    hess(ii, ii) = (at(i, 1, i, 0) - 2.0 * f0 + at(i, -1, i, 0)) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      hess(ii, jj) = hess(jj, ii) =
          (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4.0 * h[i] * h[j]);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success || !hess.allFinite()) {
    throw NumericalError("objective curvature is not positive definite at the optimum");
  }
  const Eigen::MatrixXd cov = 2.0 * scale * llt.solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    if (!(v > 0.0) || !std::isfinite(v)) throw NumericalError("non-positive parameter variance");
    out[k] = std::sqrt(v);
  }
  return out;
}

void bootstrap_uncertainty(const FitProblem& problem, FitResult& result) {
  const int samples = std::max(2, problem.bootstrap_samples);
  std::vector<Bounds> bounds;
  for (const auto& f : problem.free) bounds.push_back(f.bounds);
  const auto best = with_free(problem, result.estimates);
  const auto anchor = fidelity_anchor(problem.data);
  std::optional<double> phi;
  if (anchor) phi = optimal_phase(*anchor, best);
  std::vector<double> predicted;
  for (const auto& d : problem.data) predicted.push_back(model_value(d.kind, d.alpha2, best, phi));

  // Draw every resample up front so the result does not depend on threading.
  std::mt19937_64 rng(problem.seed ^ 0x5bd1e995ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<DataPoint>> resamples(static_cast<std::size_t>(samples), problem.data);
  for (auto& rs : resamples) {
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i].y = predicted[i] + rs[i].sigma * normal(rng);
  }
  std::vector<std::vector<double>> refits(resamples.size());
  parallel_for(resamples.size(), [&](std::size_t s) {
    FitProblem sub = problem;
    sub.data = resamples[s];
    const auto r = nelder_mead([&](std::span<const double> x) { return objective(x, sub); }, result.estimates, bounds);
    refits[s] = r.x;
  });
  result.uncertainties.clear();
  for (std::size_t k = 0; k < problem.free.size(); ++k) {
    const double sd = sample_stddev(column(refits, k));
    result.uncertainties.push_back(sd > 0.0 ? sd : std::numeric_limits<double>::min());
  }
  result.method = UncertaintyMethod::kBootstrap;
}

void parameter_uncertainty(const FitProblem& problem, FitResult& result) {
  const std::size_t n = problem.data.size();
  const std::size_t p = problem.free.size();
  // A perfect fit carries no residual scale; fall back to the sigmas as given.
  const double scale = (n > p && result.objective > 0.0) ? result.objective / static_cast<double>(n - p) : 1.0;
  std::vector<Bounds> bounds;
  for (const auto& f : problem.free) bounds.push_back(f.bounds);
  try {
    result.uncertainties = curvature_uncertainty([&](std::span<const double> x) { return objective(x, problem); },
                                                 result.estimates, bounds, scale);
    result.method = UncertaintyMethod::kCurvature;
  } catch (const NumericalError&) {
    result.warnings.push_back("singular curvature; uncertainties from parametric bootstrap");
    bootstrap_uncertainty(problem, result);
  }
}

FitResult fit_two_fold(const std::vector<DataPoint>& data, double mu, std::uint64_t seed, bool floor_sigma) {
  if (data.empty()) throw InvalidArgument("fit_two_fold: empty dataset");
  for (const auto& d : data) {
    if (d.kind != DataKind::kTwoFold) throw InvalidArgument("fit_two_fold: only two_fold points are accepted");
  }
  FitProblem problem;
  problem.data = data;
  problem.free = {{"zeta2", kUnitBounds}, {"eta_i2", kUnitBounds}};
  problem.fixed.mu = mu;
  problem.seed = seed;
  problem.floor_sigma = floor_sigma;
  return fit(problem);
}

FitResult fit_three_fold_joint(const std::vector<DataPoint>& v3, const std::vector<DataPoint>& fx, double eta_i3,
                               double eta_s, double mu, std::uint64_t seed, bool floor_sigma) {
  if (v3.empty() && fx.empty()) throw InvalidArgument("fit_three_fold_joint: both datasets are empty");
  for (const auto& d : v3) {
    if (d.kind != DataKind::kThreeFold) throw InvalidArgument("fit_three_fold_joint: v3 data must be three_fold");
  }
  for (const auto& d : fx) {
    if (d.kind != DataKind::kFidelityX) throw InvalidArgument("fit_three_fold_joint: fx data must be fidelity_x");
  }
  FitProblem problem;
  problem.data = v3;
  problem.data.insert(problem.data.end(), fx.begin(), fx.end());
  problem.free = {{"zeta3", kUnitBounds}};
  problem.fixed.eta_i3 = eta_i3;
  problem.fixed.eta_s = eta_s;
  problem.fixed.mu = mu;
  problem.seed = seed;
  problem.floor_sigma = floor_sigma;
  auto result = fit(problem);
  if (v3.empty()) result.warnings.insert(result.warnings.begin(), "joint fit without three_fold data");
  if (fx.empty()) result.warnings.insert(result.warnings.begin(), "joint fit without fidelity_x data");
  return result;
}

double optimal_alpha2(VisibilityKind kind, const HomParams& base) {
  auto v = [&](double log_a) {
    HomParams p = base;
    p.alpha2 = std::exp(log_a);
    return kind == VisibilityKind::kTwoFold ? v_two_fold(p) : v_three_fold(p);
  };
  constexpr double kStep = 1e-3;
  auto slope = [&](double log_a) { return (v(log_a + kStep) - v(log_a - kStep)) / (2.0 * kStep); };
  const double lo = std::log(1e-7);
  const double hi = std::log(1.0);
  constexpr int kPoints = 141;  // 20 per decade
  double prev_x = lo;
  double prev_s = slope(lo);
  for (int i = 1; i < kPoints; ++i) {
    const double x = lo + (hi - lo) * i / (kPoints - 1);
    const double s = slope(x);
    if (prev_s > 0.0 && s <= 0.0) {
      double a = prev_x, b = x;
      while (b - a > 1e-6) {
        const double m = 0.5 * (a + b);
        (slope(m) > 0.0 ? a : b) = m;
      }
      return std::exp(0.5 * (a + b));
    }
    prev_x = x;
    prev_s = s;
  }
  throw NoBracket("visibility has no interior maximum for alpha2 in [1e-7, 1]");
}

}  // namespace qtele
