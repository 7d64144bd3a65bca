#pragma once

// HOM and teleportation circuits rebuilt in the truncated photon-number
// basis, for cross-checking the Gaussian pipeline.

#include <optional>

#include "qtele/experiments.hpp"
#include "qtele/fock.hpp"

namespace qtele {

struct OracleOptions {
  /// Per-source photon cutoff. Empty: the smallest cutoffs whose combined
  /// source deficit stays below deficit_budget.
  std::optional<int> cutoff;
  double deficit_budget = 1e-9;
};

struct OracleHomResult {
  double p_two_fold = 0.0;
  double p_three_fold = 0.0;
  double deficit = 0.0;
  int coherent_cutoff = 0;
  int tmsv_cutoff = 0;
};

struct OracleTeleportResult {
  BsmProbabilities probs;
  double deficit = 0.0;
  int coherent_cutoff = 0;
  int tmsv_cutoff = 0;
};

/// Seven-mode HOM state in the same layout as build_hom_state. The coherent
/// amplitude is passed separately so the teleportation bins can reuse it.
fock::TruncatedState oracle_hom_state(std::complex<double> alpha, const HomParams& p, int coherent_cutoff,
                                      int tmsv_cutoff);

/// Throws DeficitExceeded if the combined deficit reaches the budget.
OracleHomResult oracle_hom(const HomParams& p, const OracleOptions& opts = {});

/// Teleportation probabilities at the analysis phase p.phi.
///
/// The early block (modes 0-5 and signal 12) and the late block (6-11 and
/// 13) never interact before the analysis splitter, and D1 / D4 only see
/// their own block. So each block is built as a seven-mode HOM state,
/// projected onto its BSM click and traced down to its signal mode, giving
/// unnormalized one-mode operators S_e and S_l. The analysis phase and
/// splitter then act on S_e (x) S_l, where D5 / D6 are read out.
OracleTeleportResult oracle_teleport(const TeleportParams& p, const OracleOptions& opts = {});

/// Same quantity from the full fourteen-mode branch ensemble. Only
/// practical at small cutoffs; used to test the block decomposition.
OracleTeleportResult oracle_teleport_direct(const TeleportParams& p, const OracleOptions& opts = {});

}  // namespace qtele
