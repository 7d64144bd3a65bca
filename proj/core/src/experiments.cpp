#include "qtele/experiments.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "qtele/errors.hpp"
#include "qtele/parallel.hpp"

namespace qtele {
namespace {

using Real = long double;

// Inclusion-exclusion in double resolves probabilities only down to a few
// ulp of 1; ratios of smaller values are noise.
constexpr double kProbabilityResolution = 1e-14;

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must be in [0, 1]");
}

void check_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be finite and >= 0");
}

SymplecticTransform placed(const SymplecticTransform& s, std::initializer_list<ModeIndex> modes,
                           std::size_t n) {
  const std::vector<ModeIndex> m(modes);
  return embed(s, m, n);
}

SymplecticTransform mismatch_splitter(double zeta) {
  return beamsplitter(std::sqrt(zeta), std::sqrt(1.0 - zeta));
}

SymplecticTransform balanced_splitter() {
  return beamsplitter(std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0);
}

// Mismatch splitters followed by the 50:50 BSM splitters for one
// six-mode HOM block starting at `o`.
SymplecticTransform hom_block(std::size_t o, std::size_t n, double zeta) {
  const auto mm = mismatch_splitter(zeta);
  const auto bs = balanced_splitter();
  auto s = placed(mm, {o + 0, o + 2}, n);
  s = placed(mm, {o + 3, o + 4}, n) * s;
  s = placed(bs, {o + 0, o + 3}, n) * s;
  s = placed(bs, {o + 1, o + 4}, n) * s;
  s = placed(bs, {o + 2, o + 5}, n) * s;
  return s;
}

GaussianState with_displacement(const GaussianState& s, ModeIndex mode, std::complex<double> alpha) {
  Vector d = s.disp();
  const auto k = static_cast<Eigen::Index>(2 * mode);
  d(k) = std::numbers::sqrt2 * alpha.real();
  d(k + 1) = std::numbers::sqrt2 * alpha.imag();
  return GaussianState(s.cov(), std::move(d));
}

GaussianState lossy_pairs(std::initializer_list<std::pair<ModeIndex, ModeIndex>> pairs, std::size_t n,
                          double mu, double eta_i, double eta_s) {
  const auto tmsv = two_mode_squeezed_state(mu);
  Matrix cov = Matrix::Identity(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(2 * n));
  for (auto [idler, signal] : pairs) {
    const std::vector<ModeIndex> modes{idler, signal};
    const auto placed_pair = embed_state(tmsv, modes, n);
    // Pairs occupy disjoint modes, so their non-vacuum blocks simply add.
    cov += placed_pair.cov() - Matrix::Identity(cov.rows(), cov.cols());
  }
  GaussianState s(std::move(cov), Vector::Zero(static_cast<Eigen::Index>(2 * n)));
  for (auto [idler, signal] : pairs) {
    s = apply_loss(s, {idler, eta_i});
    s = apply_loss(s, {signal, eta_s});
  }
  return s;
}

double ratio_visibility(Real p_zeta, Real p_zero, Real resolution) {
  if (!(p_zero > resolution)) {
    throw UndefinedValue("visibility undefined: reference coincidence probability vanishes");
  }
  return static_cast<double>(1.0L - p_zeta / p_zero);
}

Real p2_closed(Real a, Real mu, Real zeta, Real eta_i) {
  const Real x = eta_i * mu;
  const Real h = 1.0L + x / 2.0L;
  return 1.0L + std::exp(-a) / (1.0L + x) -
         2.0L * std::exp(-(a / 2.0L) * (1.0L + (1.0L - zeta * zeta) * x / 2.0L) / h) / h;
}

Real p3_closed(Real a, Real mu, Real zeta, Real eta_s, Real eta_i, bool eta_s_in_denominator) {
  const Real x = eta_i * mu;
  const Real h = 1.0L + x / 2.0L;
  const Real g = 1.0L + (1.0L - eta_s) * eta_i * mu / 2.0L + eta_s * mu;
  const Real third_den =
      eta_s_in_denominator ? 1.0L + eta_s * (1.0L - eta_s) * mu + eta_s * mu : 1.0L + eta_i * (1.0L - eta_s) * mu + eta_s * mu;
  return eta_s * mu / (1.0L + eta_s * mu) -
         2.0L * std::exp(-(a / 2.0L) * (1.0L + (1.0L - zeta * zeta) * x / 2.0L) / h) / h +
         std::exp(-a) * (1.0L - eta_i) * eta_s * mu / ((1.0L + x) * third_den) +
         2.0L * std::exp(-(a / 2.0L) * (1.0L + (1.0L - zeta * zeta) * (1.0L - eta_s) * eta_i * mu / 2.0L + eta_s * mu) / g) / g;
}

}  // namespace

void HomParams::validate() const {
  check_nonneg(alpha2, "alpha2");
  check_nonneg(mu, "mu");
  check_unit(zeta, "zeta");
  check_unit(eta_i, "eta_i");
  check_unit(eta_s, "eta_s");
}

void TeleportParams::validate() const {
  hom().validate();
  check_unit(epsilon, "epsilon");
  if (!std::isfinite(phi) || !std::isfinite(theta_in)) throw InvalidArgument("phases must be finite");
}

GaussianState build_hom_state(const HomParams& p) {
  p.validate();
  constexpr std::size_t n = HomLayout::n_modes;
  auto s = lossy_pairs({{HomLayout::idler, HomLayout::signal}}, n, p.mu, p.eta_i, p.eta_s);
  s = with_displacement(s, HomLayout::coherent, std::sqrt(p.alpha2));
  return apply_transform(s, hom_block(0, n, p.zeta));
}

double p_two_fold_pipeline(const HomParams& p) {
  return coincidence_probability(build_hom_state(p), {{HomLayout::d1(), HomLayout::d2()}});
}

double p_three_fold_pipeline(const HomParams& p) {
  return coincidence_probability(build_hom_state(p),
                                 {{HomLayout::d1(), HomLayout::d2(), HomLayout::d3()}});
}

double p_two_fold_closed(const HomParams& p) {
  p.validate();
  return static_cast<double>(p2_closed(p.alpha2, p.mu, p.zeta, p.eta_i));
}

double p_two_fold_closed_rearranged(const HomParams& p) {
  p.validate();
  const Real a = p.alpha2;
  const Real x = static_cast<Real>(p.eta_i) * p.mu;
  const Real z2 = static_cast<Real>(p.zeta) * p.zeta;
  const Real v = 1.0L + std::exp(-a) / (1.0L + x) -
                 4.0L * std::exp(-a + a * (2.0L + (1.0L + z2) * x) / (4.0L + 2.0L * x)) / (2.0L + x);
  return static_cast<double>(v);
}

double p_three_fold_closed(const HomParams& p) {
  p.validate();
  return static_cast<double>(p3_closed(p.alpha2, p.mu, p.zeta, p.eta_s, p.eta_i, false));
}

double p_three_fold_closed_eta_s_denominator(const HomParams& p) {
  p.validate();
  return static_cast<double>(p3_closed(p.alpha2, p.mu, p.zeta, p.eta_s, p.eta_i, true));
}

double v_two_fold(const HomParams& p, Route route) {
  p.validate();
  if (route == Route::kPipeline) {
    auto ref = p;
    ref.zeta = 0.0;
    return ratio_visibility(p_two_fold_pipeline(p), p_two_fold_pipeline(ref), kProbabilityResolution);
  }
  return ratio_visibility(p2_closed(p.alpha2, p.mu, p.zeta, p.eta_i), p2_closed(p.alpha2, p.mu, 0.0L, p.eta_i), 0.0L);
}

double v_three_fold(const HomParams& p, Route route) {
  p.validate();
  if (route == Route::kPipeline) {
    auto ref = p;
    ref.zeta = 0.0;
    return ratio_visibility(p_three_fold_pipeline(p), p_three_fold_pipeline(ref), kProbabilityResolution);
  }
  return ratio_visibility(p3_closed(p.alpha2, p.mu, p.zeta, p.eta_s, p.eta_i, false),
                          p3_closed(p.alpha2, p.mu, 0.0L, p.eta_s, p.eta_i, false), 0.0L);
}

double v_two_fold_expanded(const HomParams& p) {
  p.validate();
  const Real a = p.alpha2;
  const Real x = static_cast<Real>(p.eta_i) * p.mu;
  const Real z2 = static_cast<Real>(p.zeta) * p.zeta;
  const Real den = 2.0L + x - 4.0L * std::exp(a / 2.0L) * (1.0L + x) + std::exp(a) * (1.0L + x) * (2.0L + x);
  if (den == 0.0L) throw UndefinedValue("visibility undefined: reference coincidence probability vanishes");
  const Real num =
      -4.0L * (std::exp(a / 2.0L) - std::exp(a * (2.0L + x * (1.0L + z2)) / (2.0L * (2.0L + x)))) * (1.0L + x);
  return static_cast<double>(num / den);
}

double hom_generalized(const GaussianState& input_a, const GaussianState& input_b, double zeta,
                       int phase_samples) {
  if (input_a.n_modes() != 1 || input_b.n_modes() != 1) {
    throw InvalidArgument("hom_generalized: inputs must be single-mode states");
  }
  check_unit(zeta, "zeta");
  if (phase_samples < 1) throw InvalidArgument("hom_generalized: phase_samples must be >= 1");
  constexpr std::size_t n = 6;
  const DetectionSpec spec{{HomLayout::d1(), HomLayout::d2()}};
  auto averaged = [&](double z) {
    const auto circuit = hom_block(0, n, z);
    double sum = 0.0;
    for (int k = 0; k < phase_samples; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / phase_samples;
      const auto rotated_b = apply_transform(input_b, phase_shifter(theta));
      const auto joint = embed_state(tensor(input_a, rotated_b), std::vector<ModeIndex>{0, 3}, n);
      sum += coincidence_probability(apply_transform(joint, circuit), spec);
    }
    return sum / phase_samples;
  };
  return ratio_visibility(averaged(zeta), averaged(0.0), kProbabilityResolution);
}

GaussianState build_teleport_state(const TeleportParams& p) {
  return TeleportCircuit(p).state_at(p.phi);
}

namespace {

GaussianState teleport_pre_analysis(const TeleportParams& p) {
  p.validate();
  constexpr std::size_t n = TeleportLayout::n_modes;
  using L = TeleportLayout;
  auto s = lossy_pairs({{L::early + 3, L::signal_early}, {L::late + 3, L::signal_late}}, n, p.mu,
                       p.eta_i, p.eta_s);
  // The equal-weight qubit carries alpha2 in each bin.
  const double amp = std::numbers::sqrt2 * std::sqrt(p.alpha2);
  const double late_weight = std::sqrt(std::max(0.0, 1.0 - p.epsilon * p.epsilon));
  s = with_displacement(s, L::early, amp * p.epsilon);
  s = with_displacement(s, L::late, std::polar(amp * late_weight, p.theta_in));
  return apply_transform(s, hom_block(L::late, n, p.zeta) * hom_block(L::early, n, p.zeta));
}

}  // namespace

TeleportCircuit::TeleportCircuit(const TeleportParams& p)
    : params_(p), pre_analysis_(teleport_pre_analysis(p)) {}

GaussianState TeleportCircuit::state_at(double phi) const {
  if (params_.basis == Basis::Z) return pre_analysis_;
  // Phase on the early signal, then the early/late 50:50; only the four
  // signal quadratures are touched.
  Matrix phase = Matrix::Identity(4, 4);
  phase.topLeftCorner(2, 2) = phase_shifter(phi).matrix();
  const Matrix s = balanced_splitter().matrix() * phase;
  constexpr auto k = static_cast<Eigen::Index>(2 * TeleportLayout::signal_early);
  Matrix cov = pre_analysis_.cov();
  cov.middleRows(k, 4) = (s * cov.middleRows(k, 4)).eval();
  cov.middleCols(k, 4) = (cov.middleCols(k, 4) * s.transpose()).eval();
  Vector d = pre_analysis_.disp();
  d.segment(k, 4) = (s * d.segment(k, 4)).eval();
  return GaussianState(std::move(cov), std::move(d));
}

BsmProbabilities TeleportCircuit::probabilities(double phi) const {
  using L = TeleportLayout;
  const auto s = state_at(phi);
  return {coincidence_probability(s, {{L::d1(), L::d4(), L::d6()}}),
          coincidence_probability(s, {{L::d1(), L::d4(), L::d5()}})};
}

BsmProbabilities bsm_conditional_probs(const TeleportParams& p) {
  return TeleportCircuit(p).probabilities(p.phi);
}

FidelityResult fidelity(const TeleportParams& p, const FidelityOptions& opts) {
  const TeleportCircuit circuit(p);
  FidelityResult out;
  out.phi = p.phi;
  if (p.basis == Basis::X && opts.optimize_phi) {
    if (opts.phi_steps < 1) throw InvalidArgument("fidelity: phi_steps must be >= 1");
    double best = -1.0;
    for (int k = 0; k < opts.phi_steps; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / opts.phi_steps;
      const auto probs = circuit.probabilities(phi);
      if (probs.p_d1d4d6 > best) {
        best = probs.p_d1d4d6;
        out.phi = phi;
        out.probs = probs;
      }
    }
  } else {
    out.probs = circuit.probabilities(p.phi);
  }
  const double total = out.probs.p_d1d4d6 + out.probs.p_d1d4d5;
  if (total > kProbabilityResolution) out.value = out.probs.p_d1d4d6 / total;
  return out;
}

VisibilitySurface visibility_surface(VisibilityKind kind, std::vector<double> alpha2_grid,
                                     std::vector<double> mu_grid, double zeta, double eta_i,
                                     double eta_s) {
  for (double v : alpha2_grid) {
    if (!(v > 0.0)) throw InvalidArgument("visibility_surface: alpha2 grid must be positive");
  }
  for (double v : mu_grid) {
    if (!(v > 0.0)) throw InvalidArgument("visibility_surface: mu grid must be positive");
  }
  VisibilitySurface out{std::move(alpha2_grid), std::move(mu_grid), {}};
  out.values.assign(out.alpha2.size() * out.mu.size(), 0.0);
  parallel_for(out.alpha2.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < out.mu.size(); ++j) {
      const HomParams p{out.alpha2[i], out.mu[j], zeta, eta_i, eta_s};
      out.values[i * out.mu.size() + j] =
          kind == VisibilityKind::kTwoFold ? v_two_fold(p) : v_three_fold(p);
    }
  });
  return out;
}

}  // namespace qtele
