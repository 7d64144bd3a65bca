#pragma once

// Multimode Gaussian states in the quadrature picture.
//
// Conventions: quadratures are ordered mode-major (x1, p1, x2, p2, ...), the
// vacuum covariance is the identity, and a coherent state |alpha> has
// displacement sqrt(2) (Re alpha, Im alpha).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qtele {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ModeIndex = std::size_t;

class GaussianState {
 public:
  /// Takes ownership of a covariance/displacement pair. The covariance is
  /// symmetrized; shapes must be 2n x 2n and 2n with n >= 1.
  GaussianState(Matrix cov, Vector disp);

  std::size_t n_modes() const noexcept { return static_cast<std::size_t>(disp_.size() / 2); }
  const Matrix& cov() const noexcept { return cov_; }
  const Vector& disp() const noexcept { return disp_; }

  /// Sorted ascending, one per mode.
  std::vector<double> symplectic_eigenvalues() const;
  bool is_physical(double tol = 1e-9) const;

  /// <n> of a single mode: (tr gamma_k + |d_k|^2) / 4 - 1/2.
  double mean_photon_number(ModeIndex mode) const;

 private:
  Matrix cov_;
  Vector disp_;
};

class SymplecticTransform {
 public:
  /// Validates S Omega S^T = Omega to `tol` (max-norm).
  static SymplecticTransform from_matrix(Matrix m, double tol = 1e-10);
  static SymplecticTransform identity(std::size_t n_modes);

  std::size_t n_modes() const noexcept { return static_cast<std::size_t>(m_.rows() / 2); }
  const Matrix& matrix() const noexcept { return m_; }

  /// max |S Omega S^T - Omega|.
  double symplectic_defect() const;

  /// (a * b) applies b first, then a.
  friend SymplecticTransform operator*(const SymplecticTransform& a, const SymplecticTransform& b);

 private:
  explicit SymplecticTransform(Matrix m) : m_(std::move(m)) {}
  friend SymplecticTransform phase_shifter(double);
  friend SymplecticTransform beamsplitter(double, double);
  friend SymplecticTransform embed(const SymplecticTransform&, std::span<const ModeIndex>, std::size_t);

  Matrix m_;
};

struct LossSpec {
  ModeIndex mode = 0;
  double eta = 1.0;  ///< intensity transmission in [0, 1]
};

/// Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]].
Matrix symplectic_form(std::size_t n_modes);

GaussianState vacuum_state(std::size_t n_modes);
GaussianState coherent_state(std::complex<double> alpha);
GaussianState thermal_state(double mean_photons);
/// Modes (0, 1); off-diagonal blocks 2 sqrt(mu (1 + mu)) diag(1, -1).
GaussianState two_mode_squeezed_state(double mean_pairs);

GaussianState tensor(const GaussianState& a, const GaussianState& b);

/// Places a k-mode state on `modes` of an n_total-mode system whose other
/// modes are vacuum.
GaussianState embed_state(const GaussianState& s, std::span<const ModeIndex> modes,
                          std::size_t n_total);

/// a -> e^{i phi} a.
SymplecticTransform phase_shifter(double phi);
/// c = t a + i r b, d = i r a + t b. Requires t^2 + r^2 = 1.
SymplecticTransform beamsplitter(double t, double r);
/// Acts as `s` on `modes` (in order) and as identity elsewhere.
SymplecticTransform embed(const SymplecticTransform& s, std::span<const ModeIndex> modes,
                          std::size_t n_total);

GaussianState apply_transform(const GaussianState& state, const SymplecticTransform& s);
GaussianState apply_loss(const GaussianState& state, const LossSpec& loss);
/// Restriction to `keep`, in the listed order.
GaussianState partial_trace(const GaussianState& state, std::span<const ModeIndex> keep);

}  // namespace qtele
