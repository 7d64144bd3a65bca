#pragma once

// Threshold-detector statistics for Gaussian states.

#include <span>
#include <string>
#include <vector>

#include "qtele/gaussian.hpp"

namespace qtele {

/// One physical threshold detector; it sees every model mode in `modes`
/// and stays dark only if all of them are in vacuum.
struct DetectorGroup {
  std::string label;
  std::vector<ModeIndex> modes;
};

/// Groups that must all click. Every other mode is traced over.
struct DetectionSpec {
  std::vector<DetectorGroup> on_groups;

  /// Throws InvalidArgument for empty/overlapping groups or out-of-range modes.
  void validate(std::size_t n_modes) const;
};

/// Tr[rho (I_rest (x) |0><0|^{(x) n})] for the modes listed:
///   2^n / sqrt(det(gamma_y + I)) * exp(-d_y^T (gamma_y + I)^{-1} d_y).
/// Throws NumericalError if gamma_y + I is not positive definite.
double vacuum_overlap(const GaussianState& state, std::span<const ModeIndex> modes);

/// Probability that every on-group clicks, by inclusion-exclusion over the
/// 2^k subsets of groups. Round-off below 1e-12 outside [0, 1] is clamped;
/// anything larger raises NumericalError.
double coincidence_probability(const GaussianState& state, const DetectionSpec& spec);

}  // namespace qtele
