#pragma once

// HOM and time-bin teleportation circuits.
//
// Each physical BSM detector sees three model modes: the interfering
// (indistinguishable) part and the two distinguishable parts split off by
// the virtual mismatch beamsplitters, each mixed with vacuum at the 50:50.
// The virtual splitter has amplitude transmittance sqrt(zeta), so the
// interference terms scale with zeta^2.

#include <array>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "qtele/detection.hpp"
#include "qtele/gaussian.hpp"

namespace qtele {

struct HomParams {
  double alpha2 = 0.0;  ///< |alpha|^2 of the coherent state in the occupied bin
  double mu = 0.0;      ///< TMSV mean pair number
  double zeta = 1.0;    ///< indistinguishability, intensity transmittance of the virtual splitter
  double eta_i = 1.0;   ///< idler transmission
  double eta_s = 1.0;   ///< signal transmission

  void validate() const;
};

enum class Basis { X, Z };

struct TeleportParams {
  double alpha2 = 0.0;
  double mu = 0.0;
  double zeta = 1.0;
  double eta_i = 1.0;
  double eta_s = 1.0;
  double phi = 0.0;  ///< analysis phase on the early signal mode (X basis)
  Basis basis = Basis::X;
  double epsilon = std::numbers::sqrt2 / 2.0;  ///< early-bin amplitude of the input qubit
  double theta_in = 0.0;                       ///< relative phase of the late bin

  void validate() const;
  HomParams hom() const { return {alpha2, mu, zeta, eta_i, eta_s}; }
};

/// Seven-mode HOM layout. D1 = {a1, a2, a3}, D2 = {b1, b2, b3}, D3 = {c}.
struct HomLayout {
  static constexpr std::size_t n_modes = 7;
  static constexpr ModeIndex coherent = 0;       // a1 after the circuit
  static constexpr ModeIndex bsm_vacuum_a = 1;   // a2
  static constexpr ModeIndex mismatch_coherent = 2;  // a3
  static constexpr ModeIndex idler = 3;          // b1
  static constexpr ModeIndex mismatch_idler = 4;     // b2
  static constexpr ModeIndex bsm_vacuum_b = 5;   // b3
  static constexpr ModeIndex signal = 6;         // c

  static DetectorGroup d1() { return {"D1", {0, 1, 2}}; }
  static DetectorGroup d2() { return {"D2", {3, 4, 5}}; }
  static DetectorGroup d3() { return {"D3", {6}}; }
};

/// Fourteen-mode teleportation layout: two copies of the HOM input modes
/// (early at offset 0, late at offset 6) followed by the early and late
/// signal modes. D1/D2 are the BSM detectors in the early bin, D3/D4 in the
/// late bin; D5/D6 sit on the early/late signal outputs.
struct TeleportLayout {
  static constexpr std::size_t n_modes = 14;
  static constexpr ModeIndex early = 0;
  static constexpr ModeIndex late = 6;
  static constexpr ModeIndex signal_early = 12;
  static constexpr ModeIndex signal_late = 13;

  static DetectorGroup d1() { return {"D1", {0, 1, 2}}; }    // a_e
  static DetectorGroup d2() { return {"D2", {3, 4, 5}}; }    // b_e
  static DetectorGroup d3() { return {"D3", {6, 7, 8}}; }    // a_l
  static DetectorGroup d4() { return {"D4", {9, 10, 11}}; }  // b_l
  static DetectorGroup d5() { return {"D5", {12}}; }         // c_e
  static DetectorGroup d6() { return {"D6", {13}}; }         // c_l
};

// --- HOM ------------------------------------------------------------------

GaussianState build_hom_state(const HomParams& p);

double p_two_fold_pipeline(const HomParams& p);
double p_three_fold_pipeline(const HomParams& p);

/// Closed forms, evaluated in extended precision.
double p_two_fold_closed(const HomParams& p);
double p_three_fold_closed(const HomParams& p);
/// The two-fold form with both exponentials merged (prefactor 4 / (2 + eta_i mu)).
double p_two_fold_closed_rearranged(const HomParams& p);
/// Three-fold variant with eta_s (1 - eta_s) mu in place of
/// eta_i (1 - eta_s) mu in the third denominator. Disagrees with the circuit
/// unless eta_i == eta_s; kept for comparison only.
double p_three_fold_closed_eta_s_denominator(const HomParams& p);

enum class Route { kClosed, kPipeline };

/// 1 - p(zeta) / p(zeta = 0). Throws UndefinedValue when p(0) vanishes.
double v_two_fold(const HomParams& p, Route route = Route::kClosed);
double v_three_fold(const HomParams& p, Route route = Route::kClosed);
/// The fully expanded two-fold visibility expression.
double v_two_fold_expanded(const HomParams& p);

/// Two-fold HOM visibility for arbitrary single-mode Gaussian inputs sent
/// through the same mismatch + 50:50 circuit. The coincidence rate is
/// averaged over `phase_samples` uniformly spaced relative phases of input b.
double hom_generalized(const GaussianState& input_a, const GaussianState& input_b, double zeta,
                       int phase_samples = 64);

// --- Teleportation --------------------------------------------------------

GaussianState build_teleport_state(const TeleportParams& p);

struct BsmProbabilities {
  double p_d1d4d6 = 0.0;  ///< intended outcome
  double p_d1d4d5 = 0.0;  ///< orthogonal outcome
};

/// Teleportation circuit with everything up to the analysis stage
/// evaluated once; probabilities for any analysis phase are then cheap.
class TeleportCircuit {
 public:
  explicit TeleportCircuit(const TeleportParams& p);

  const TeleportParams& params() const noexcept { return params_; }
  /// State after the analysis stage at phase `phi` (X) or unchanged (Z).
  GaussianState state_at(double phi) const;
  BsmProbabilities probabilities(double phi) const;

 private:
  TeleportParams params_;
  GaussianState pre_analysis_;
};

BsmProbabilities bsm_conditional_probs(const TeleportParams& p);

struct FidelityOptions {
  bool optimize_phi = true;  ///< X basis: scan phi, otherwise use params.phi
  int phi_steps = 360;       ///< grid 2 pi k / phi_steps
};

struct FidelityResult {
  std::optional<double> value;  ///< empty when both probabilities vanish
  double phi = 0.0;             ///< analysis phase used
  BsmProbabilities probs;
};

/// F = P_D1D4D6 / (P_D1D4D6 + P_D1D4D5). In the X basis with optimize_phi
/// the phase maximizing P_D1D4D6 on the grid is used.
FidelityResult fidelity(const TeleportParams& p, const FidelityOptions& opts = {});

// --- Surfaces -------------------------------------------------------------

enum class VisibilityKind { kTwoFold, kThreeFold };

struct VisibilitySurface {
  std::vector<double> alpha2;  ///< rows
  std::vector<double> mu;      ///< columns
  std::vector<double> values;  ///< row-major, alpha2.size() x mu.size()

  double at(std::size_t i_alpha, std::size_t j_mu) const { return values[i_alpha * mu.size() + j_mu]; }
};

/// Closed-form visibilities over an alpha2 x mu grid. Grid points must be
/// positive. Evaluated in parallel with deterministic layout.
VisibilitySurface visibility_surface(VisibilityKind kind, std::vector<double> alpha2_grid,
                                     std::vector<double> mu_grid, double zeta, double eta_i,
                                     double eta_s);

}  // namespace qtele
