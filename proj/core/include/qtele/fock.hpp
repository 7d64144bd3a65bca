#pragma once

// Brute-force photon-number-basis simulation used as an independent
// reference for the Gaussian pipeline.
//
// A TruncatedState is an ensemble of unnormalized pure branches stored
// sparsely over occupation-number keys. Only the sources are truncated:
// beamsplitters and phase shifts conserve total photon number, so they act
// exactly on the truncated support. Loss is modelled literally: a vacuum
// ancilla is appended, mixed on a beamsplitter and then traced out, each
// ancilla photon number giving one branch. The weight dropped at the
// sources is carried along as `deficit`.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "qtele/detection.hpp"
#include "qtele/gaussian.hpp"

namespace qtele::fock {

inline constexpr std::size_t kMaxModes = 16;
inline constexpr int kMaxOccupation = 255;

using Amplitude = std::complex<double>;
__extension__ typedef unsigned __int128 Key;  // 8 bits per mode

inline int occupation(Key key, ModeIndex mode) {
  return static_cast<int>((key >> (8 * mode)) & 0xffu);
}
inline Key with_occupation(Key key, ModeIndex mode, int n) {
  const Key mask = Key{0xffu} << (8 * mode);
  return (key & ~mask) | (Key(static_cast<unsigned>(n)) << (8 * mode));
}
Key make_key(std::span<const int> occupations);

struct KeyHash {
  std::size_t operator()(Key k) const noexcept {
    const auto lo = static_cast<std::uint64_t>(k);
    const auto hi = static_cast<std::uint64_t>(k >> 64);
    std::uint64_t h = lo * 0x9e3779b97f4a7c15ull ^ (hi + 0x7f4a7c159e3779b9ull + (lo << 6) + (lo >> 2));
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

using Branch = std::unordered_map<Key, Amplitude, KeyHash>;

double norm2(const Branch& b);

struct TruncatedState {
  std::size_t n_modes = 0;
  int cutoff = 0;  ///< largest per-source photon number kept at preparation
  std::vector<Branch> branches;
  double deficit = 0.0;  ///< source weight discarded by truncation

  /// Sum of branch norms; lies in [1 - deficit, 1].
  double trace() const;
};

/// Probability weight beyond `cutoff` photons.
double coherent_deficit(double alpha2, int cutoff);
double tmsv_deficit(double mu, int cutoff);
/// Smallest cutoff whose deficit is below `budget`; DeficitExceeded if none
/// up to kMaxSourceCutoff.
inline constexpr int kMaxSourceCutoff = 40;
int coherent_cutoff(double alpha2, double budget);
int tmsv_cutoff(double mu, double budget);

TruncatedState oracle_vacuum(std::size_t n_modes);
TruncatedState oracle_fock(int photons);
TruncatedState oracle_coherent(std::complex<double> alpha, int cutoff);
/// sqrt(1 - lambda^2) sum lambda^n |n, n>, lambda^2 = mu / (1 + mu), so
/// that the mean pair number is exactly mu.
TruncatedState oracle_tmsv(double mu, int cutoff);
/// Mixture of |n><n| with geometric weights.
TruncatedState oracle_thermal(double mu, int cutoff);

TruncatedState tensor(const TruncatedState& a, const TruncatedState& b);
/// Relabels the modes of `s` onto `modes` of an n_total-mode system whose
/// other modes are vacuum.
TruncatedState embed(const TruncatedState& s, std::span<const ModeIndex> modes, std::size_t n_total);

/// a^dag -> t a^dag + i r b^dag, b^dag -> i r a^dag + t b^dag (the same
/// convention as the symplectic beamsplitter).
TruncatedState oracle_beamsplitter(const TruncatedState& s, ModeIndex a, ModeIndex b, double t, double r);
TruncatedState oracle_phase(const TruncatedState& s, ModeIndex mode, double phi);
/// Ancilla + beamsplitter(sqrt(eta), sqrt(1 - eta)) + trace over the ancilla.
TruncatedState oracle_loss(const TruncatedState& s, ModeIndex mode, double eta);

double oracle_probability(const TruncatedState& s, const DetectionSpec& spec);

/// Tr_rest[(prod_g Pi_on(g)) rho] restricted to `keep`, as a matrix over the
/// occupations of the kept modes (basis as in DenseState with
/// max_total = the largest total found).
struct ReducedOperator {
  std::size_t n_modes = 0;
  int max_total = 0;
  Eigen::MatrixXcd rho;
};
ReducedOperator conditioned_reduced_state(const TruncatedState& s, const DetectionSpec& spec,
                                          std::span<const ModeIndex> keep);

/// Dense density operator over all occupations of n modes with total photon
/// number <= max_total. Used for small systems and as a cross-check of the
/// branch ensemble; loss here uses Kraus operators rather than an ancilla.
class DenseState {
 public:
  DenseState(std::size_t n_modes, int max_total);
  static DenseState from_truncated(const TruncatedState& s, int max_total);
  /// rho_a (x) rho_b with `a` on the leading modes.
  static DenseState product(const ReducedOperator& a, const ReducedOperator& b);

  std::size_t n_modes() const noexcept { return n_modes_; }
  int max_total() const noexcept { return max_total_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  const std::vector<std::vector<int>>& basis() const noexcept { return basis_; }
  const Eigen::MatrixXcd& rho() const noexcept { return rho_; }
  std::size_t index_of(std::span<const int> occupations) const;

  void apply_beamsplitter(ModeIndex a, ModeIndex b, double t, double r);
  void apply_phase(ModeIndex mode, double phi);
  void apply_loss(ModeIndex mode, double eta);

  double trace() const;
  double probability(const DetectionSpec& spec) const;
  ReducedOperator conditioned_reduced_state(const DetectionSpec& spec, std::span<const ModeIndex> keep) const;

 private:
  std::size_t n_modes_;
  int max_total_;
  std::vector<std::vector<int>> basis_;
  std::unordered_map<Key, std::size_t, KeyHash> index_;
  Eigen::MatrixXcd rho_;
};

/// Amplitudes of U|n, m> on |k, n + m - k>, k = 0..n+m.
std::vector<Amplitude> beamsplitter_row(int n, int m, double t, double r);

}  // namespace qtele::fock
