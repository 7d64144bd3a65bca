#include "qtele/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qtele/errors.hpp"

namespace qtele {
namespace {

void check_modes(std::span<const ModeIndex> modes, std::size_t n_total, const char* what) {
  std::vector<bool> seen(n_total, false);
  for (auto m : modes) {
    if (m >= n_total) {
      throw InvalidArgument(std::string(what) + ": mode " + std::to_string(m) +
                            " out of range for " + std::to_string(n_total) + " modes");
    }
    if (seen[m]) {
      throw InvalidArgument(std::string(what) + ": duplicate mode " + std::to_string(m));
    }
    seen[m] = true;
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

GaussianState::GaussianState(Matrix cov, Vector disp) : cov_(std::move(cov)), disp_(std::move(disp)) {
  if (disp_.size() == 0 || disp_.size() % 2 != 0) {
    throw InvalidArgument("GaussianState: displacement length must be 2n with n >= 1");
  }
  if (cov_.rows() != disp_.size() || cov_.cols() != disp_.size()) {
    throw InvalidArgument("GaussianState: covariance must be 2n x 2n");
  }
  cov_ = symmetrized(cov_);
}

std::vector<double> GaussianState::symplectic_eigenvalues() const {
  // Eigenvalues of Omega*gamma come in pairs +-i nu.
  const Matrix og = symplectic_form(n_modes()) * cov_;
  Eigen::EigenSolver<Matrix> solver(og, false);
  std::vector<double> nu;
  nu.reserve(static_cast<std::size_t>(og.rows()));
  for (Eigen::Index i = 0; i < og.rows(); ++i) nu.push_back(std::abs(solver.eigenvalues()[i]));
  std::sort(nu.begin(), nu.end());
  std::vector<double> out;
  out.reserve(n_modes());
  for (std::size_t i = 0; i < nu.size(); i += 2) out.push_back(0.5 * (nu[i] + nu[i + 1]));
  return out;
}

bool GaussianState::is_physical(double tol) const {
  const auto nu = symplectic_eigenvalues();
  return nu.front() >= 1.0 - tol;
}

double GaussianState::mean_photon_number(ModeIndex mode) const {
  if (mode >= n_modes()) throw InvalidArgument("mean_photon_number: mode out of range");
  const auto k = static_cast<Eigen::Index>(2 * mode);
  const double tr = cov_(k, k) + cov_(k + 1, k + 1);
  const double d2 = disp_.segment(k, 2).squaredNorm();
  return 0.25 * tr + 0.5 * d2 - 0.5;
}

Matrix symplectic_form(std::size_t n_modes) {
  const auto n = static_cast<Eigen::Index>(2 * n_modes);
  Matrix omega = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

SymplecticTransform SymplecticTransform::from_matrix(Matrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw InvalidArgument("SymplecticTransform: matrix must be 2n x 2n");
  }
  SymplecticTransform s(std::move(m));
  if (s.symplectic_defect() > tol) {
    throw InvalidArgument("SymplecticTransform: matrix is not symplectic");
  }
  return s;
}

SymplecticTransform SymplecticTransform::identity(std::size_t n_modes) {
  if (n_modes == 0) throw InvalidArgument("SymplecticTransform: zero modes");
  const auto n = static_cast<Eigen::Index>(2 * n_modes);
  return SymplecticTransform(Matrix::Identity(n, n));
}

double SymplecticTransform::symplectic_defect() const {
  const Matrix omega = symplectic_form(n_modes());
  return (m_ * omega * m_.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticTransform operator*(const SymplecticTransform& a, const SymplecticTransform& b) {
  if (a.n_modes() != b.n_modes()) throw InvalidArgument("SymplecticTransform: mode count mismatch");
  return SymplecticTransform(a.m_ * b.m_);
}

GaussianState vacuum_state(std::size_t n_modes) {
  if (n_modes == 0) throw InvalidArgument("vacuum_state: n must be >= 1");
  const auto n = static_cast<Eigen::Index>(2 * n_modes);
  return GaussianState(Matrix::Identity(n, n), Vector::Zero(n));
}

GaussianState coherent_state(std::complex<double> alpha) {
  Vector d(2);
  d << std::sqrt(2.0) * alpha.real(), std::sqrt(2.0) * alpha.imag();
  return GaussianState(Matrix::Identity(2, 2), std::move(d));
}

GaussianState thermal_state(double mean_photons) {
  if (!(mean_photons >= 0.0)) throw InvalidArgument("thermal_state: mean photon number must be >= 0");
  return GaussianState((1.0 + 2.0 * mean_photons) * Matrix::Identity(2, 2), Vector::Zero(2));
}

GaussianState two_mode_squeezed_state(double mean_pairs) {
  if (!(mean_pairs >= 0.0)) throw InvalidArgument("two_mode_squeezed_state: mu must be >= 0");
  const double diag = 1.0 + 2.0 * mean_pairs;
  const double cross = 2.0 * std::sqrt(mean_pairs * (1.0 + mean_pairs));
  Matrix cov = diag * Matrix::Identity(4, 4);
  cov(0, 2) = cov(2, 0) = cross;
  cov(1, 3) = cov(3, 1) = -cross;
  return GaussianState(std::move(cov), Vector::Zero(4));
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const auto na = a.cov().rows();
  const auto nb = b.cov().rows();
  Matrix cov = Matrix::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  Vector d(na + nb);
  d << a.disp(), b.disp();
  return GaussianState(std::move(cov), std::move(d));
}

GaussianState embed_state(const GaussianState& s, std::span<const ModeIndex> modes,
                          std::size_t n_total) {
  if (modes.size() != s.n_modes()) throw InvalidArgument("embed_state: mode list size mismatch");
  check_modes(modes, n_total, "embed_state");
  const auto n = static_cast<Eigen::Index>(2 * n_total);
  Matrix cov = Matrix::Identity(n, n);
  Vector d = Vector::Zero(n);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto ri = static_cast<Eigen::Index>(2 * modes[i]);
    const auto si = static_cast<Eigen::Index>(2 * i);
    d.segment(ri, 2) = s.disp().segment(si, 2);
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const auto rj = static_cast<Eigen::Index>(2 * modes[j]);
      const auto sj = static_cast<Eigen::Index>(2 * j);
      cov.block(ri, rj, 2, 2) = s.cov().block(si, sj, 2, 2);
    }
  }
  return GaussianState(std::move(cov), std::move(d));
}

SymplecticTransform phase_shifter(double phi) {
  Matrix m(2, 2);
  m << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return SymplecticTransform(std::move(m));
}

SymplecticTransform beamsplitter(double t, double r) {
  if (std::abs(t * t + r * r - 1.0) > 1e-12) {
    throw InvalidArgument("beamsplitter: t^2 + r^2 must equal 1");
  }
  Matrix m(4, 4);
  // clang-format off
  m << t,  0,  0, -r,
       0,  t,  r,  0,
       0, -r,  t,  0,
       r,  0,  0,  t;
  // clang-format on
  return SymplecticTransform(std::move(m));
}

SymplecticTransform embed(const SymplecticTransform& s, std::span<const ModeIndex> modes,
                          std::size_t n_total) {
  if (modes.size() != s.n_modes()) throw InvalidArgument("embed: mode list size mismatch");
  check_modes(modes, n_total, "embed");
  const auto n = static_cast<Eigen::Index>(2 * n_total);
  Matrix m = Matrix::Identity(n, n);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      m.block(static_cast<Eigen::Index>(2 * modes[i]), static_cast<Eigen::Index>(2 * modes[j]), 2, 2) =
          s.matrix().block(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j), 2, 2);
    }
  }
  return SymplecticTransform(std::move(m));
}

GaussianState apply_transform(const GaussianState& state, const SymplecticTransform& s) {
  if (s.n_modes() != state.n_modes()) {
    throw InvalidArgument("apply_transform: transform acts on " + std::to_string(s.n_modes()) +
                          " modes, state has " + std::to_string(state.n_modes()));
  }
  const Matrix& m = s.matrix();
  return GaussianState(m * state.cov() * m.transpose(), m * state.disp());
}

GaussianState apply_loss(const GaussianState& state, const LossSpec& loss) {
  if (loss.mode >= state.n_modes()) throw InvalidArgument("apply_loss: mode out of range");
  if (!(loss.eta >= 0.0 && loss.eta <= 1.0)) throw InvalidArgument("apply_loss: eta must be in [0, 1]");
  const auto k = static_cast<Eigen::Index>(2 * loss.mode);
  const double s = std::sqrt(loss.eta);
  Matrix cov = state.cov();
  Vector d = state.disp();
  // Rows and columns of the lossy mode pick up sqrt(eta) each; the diagonal
  // block then gains (1 - eta) I.
  cov.middleRows(k, 2) *= s;
  cov.middleCols(k, 2) *= s;
  cov.block(k, k, 2, 2) += (1.0 - loss.eta) * Matrix::Identity(2, 2);
  d.segment(k, 2) *= s;
  return GaussianState(std::move(cov), std::move(d));
}

GaussianState partial_trace(const GaussianState& state, std::span<const ModeIndex> keep) {
  if (keep.empty()) throw InvalidArgument("partial_trace: keep set is empty");
  check_modes(keep, state.n_modes(), "partial_trace");
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * keep.size());
  for (auto m : keep) {
    idx.push_back(static_cast<Eigen::Index>(2 * m));
    idx.push_back(static_cast<Eigen::Index>(2 * m + 1));
  }
  return GaussianState(state.cov()(idx, idx), state.disp()(idx));
}

}  // namespace qtele
