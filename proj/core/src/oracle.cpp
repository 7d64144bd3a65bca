#include "qtele/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qtele/errors.hpp"

namespace qtele {
namespace {

using fock::TruncatedState;

struct Cutoffs {
  int coherent = 0;
  int tmsv = 0;
  double deficit = 0.0;
};

// `coherent_sources` coherent states of at most max_alpha2 photons and
// `tmsv_sources` pair sources share the budget equally.
Cutoffs choose_cutoffs(double max_alpha2, double mu, int coherent_sources, int tmsv_sources,
                       const OracleOptions& opts) {
  if (!(opts.deficit_budget > 0.0)) throw InvalidArgument("oracle: deficit budget must be positive");
  Cutoffs c;
  if (opts.cutoff) {
    if (*opts.cutoff < 1) throw InvalidArgument("oracle: cutoff must be >= 1");
    c.coherent = c.tmsv = *opts.cutoff;
  } else {
    const double share = opts.deficit_budget / (coherent_sources + tmsv_sources);
    c.coherent = std::max(1, fock::coherent_cutoff(max_alpha2, share));
    c.tmsv = std::max(1, fock::tmsv_cutoff(mu, share));
  }
  double kept = 1.0;
  for (int i = 0; i < coherent_sources; ++i) kept *= 1.0 - fock::coherent_deficit(max_alpha2, c.coherent);
  for (int i = 0; i < tmsv_sources; ++i) kept *= 1.0 - fock::tmsv_deficit(mu, c.tmsv);
  c.deficit = 1.0 - kept;
  if (c.deficit >= opts.deficit_budget) {
    throw DeficitExceeded("oracle: truncation deficit " + std::to_string(c.deficit) + " exceeds budget " +
                          std::to_string(opts.deficit_budget));
  }
  return c;
}

TruncatedState splitter(const TruncatedState& s, ModeIndex a, ModeIndex b, double t) {
  return fock::oracle_beamsplitter(s, a, b, std::sqrt(t), std::sqrt(1.0 - t));
}

// Mismatch and 50:50 splitters of one HOM block at offset `o`.
TruncatedState hom_block(TruncatedState s, ModeIndex o, double zeta) {
  s = splitter(s, o + 0, o + 2, zeta);
  s = splitter(s, o + 3, o + 4, zeta);
  s = splitter(s, o + 0, o + 3, 0.5);
  s = splitter(s, o + 1, o + 4, 0.5);
  s = splitter(s, o + 2, o + 5, 0.5);
  return s;
}

DetectionSpec groups(std::initializer_list<DetectorGroup> g) { return DetectionSpec{std::vector<DetectorGroup>(g)}; }

// Bin amplitudes of the input qubit; the equal-weight qubit has alpha2
// photons in each bin.
std::complex<double> early_amplitude(const TeleportParams& p) {
  return std::numbers::sqrt2 * std::sqrt(p.alpha2) * p.epsilon;
}
std::complex<double> late_amplitude(const TeleportParams& p) {
  return std::polar(std::numbers::sqrt2 * std::sqrt(p.alpha2) * std::sqrt(std::max(0.0, 1.0 - p.epsilon * p.epsilon)),
                    p.theta_in);
}

double brightest_bin(const TeleportParams& p) {
  return std::max(std::norm(early_amplitude(p)), std::norm(late_amplitude(p)));
}

}  // namespace

TruncatedState oracle_hom_state(std::complex<double> alpha, const HomParams& p, int coherent_cutoff,
                                int tmsv_cutoff) {
  p.validate();
  using L = HomLayout;
  auto s = fock::tensor(fock::oracle_coherent(alpha, coherent_cutoff), fock::oracle_tmsv(p.mu, tmsv_cutoff));
  const std::vector<ModeIndex> sources{L::coherent, L::idler, L::signal};
  s = fock::embed(s, sources, L::n_modes);
  s = fock::oracle_loss(s, L::idler, p.eta_i);
  s = fock::oracle_loss(s, L::signal, p.eta_s);
  return hom_block(std::move(s), 0, p.zeta);
}

OracleHomResult oracle_hom(const HomParams& p, const OracleOptions& opts) {
  p.validate();
  const auto c = choose_cutoffs(p.alpha2, p.mu, 1, 1, opts);
  const auto s = oracle_hom_state(std::sqrt(p.alpha2), p, c.coherent, c.tmsv);
  using L = HomLayout;
  return {fock::oracle_probability(s, groups({L::d1(), L::d2()})),
          fock::oracle_probability(s, groups({L::d1(), L::d2(), L::d3()})), c.deficit, c.coherent, c.tmsv};
}

OracleTeleportResult oracle_teleport(const TeleportParams& p, const OracleOptions& opts) {
  p.validate();
  const auto c = choose_cutoffs(brightest_bin(p), p.mu, 2, 2, opts);
  using L = HomLayout;
  const std::vector<ModeIndex> keep{L::signal};
  // D1 is the a-side detector of the early block, D4 the b-side of the late one.
  const auto early = fock::conditioned_reduced_state(
      oracle_hom_state(early_amplitude(p), p.hom(), c.coherent, c.tmsv), groups({L::d1()}), keep);
  const auto late = fock::conditioned_reduced_state(
      oracle_hom_state(late_amplitude(p), p.hom(), c.coherent, c.tmsv), groups({L::d2()}), keep);
  auto signals = fock::DenseState::product(early, late);
  if (p.basis == Basis::X) {
    signals.apply_phase(0, p.phi);
    signals.apply_beamsplitter(0, 1, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0);
  }
  const DetectionSpec d5{{{"D5", {0}}}};
  const DetectionSpec d6{{{"D6", {1}}}};
  return {{signals.probability(d6), signals.probability(d5)}, c.deficit, c.coherent, c.tmsv};
}

OracleTeleportResult oracle_teleport_direct(const TeleportParams& p, const OracleOptions& opts) {
  p.validate();
  const auto c = choose_cutoffs(brightest_bin(p), p.mu, 2, 2, opts);
  using L = TeleportLayout;
  auto s = fock::tensor(fock::oracle_coherent(early_amplitude(p), c.coherent),
                        fock::oracle_coherent(late_amplitude(p), c.coherent));
  s = fock::tensor(s, fock::oracle_tmsv(p.mu, c.tmsv));
  s = fock::tensor(s, fock::oracle_tmsv(p.mu, c.tmsv));
  const std::vector<ModeIndex> sources{L::early, L::late, L::early + 3, L::signal_early, L::late + 3,
                                       L::signal_late};
  s = fock::embed(s, sources, L::n_modes);
  for (ModeIndex m : {L::early + 3, L::late + 3}) s = fock::oracle_loss(s, m, p.eta_i);
  for (ModeIndex m : {L::signal_early, L::signal_late}) s = fock::oracle_loss(s, m, p.eta_s);
  s = hom_block(std::move(s), L::early, p.zeta);
  s = hom_block(std::move(s), L::late, p.zeta);
  if (p.basis == Basis::X) {
    s = fock::oracle_phase(s, L::signal_early, p.phi);
    s = splitter(s, L::signal_early, L::signal_late, 0.5);
  }
  return {{fock::oracle_probability(s, groups({L::d1(), L::d4(), L::d6()})),
           fock::oracle_probability(s, groups({L::d1(), L::d4(), L::d5()}))},
          c.deficit,
          c.coherent,
          c.tmsv};
}

}  // namespace qtele
