#include "qtele/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qtele/errors.hpp"

namespace qtele {
namespace {

constexpr double kClampTolerance = 1e-12;

double clamp_probability(double p, const char* what) {
  if (p < -kClampTolerance || p > 1.0 + kClampTolerance || !std::isfinite(p)) {
    throw NumericalError(std::string(what) + ": probability " + std::to_string(p) +
                         " outside [0, 1]");
  }
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

void DetectionSpec::validate(std::size_t n_modes) const {
  std::vector<bool> used(n_modes, false);
  for (const auto& g : on_groups) {
    if (g.modes.empty()) throw InvalidArgument("DetectionSpec: group '" + g.label + "' is empty");
    for (auto m : g.modes) {
      if (m >= n_modes) {
        throw InvalidArgument("DetectionSpec: group '" + g.label + "' references mode " +
                              std::to_string(m) + " of a " + std::to_string(n_modes) + "-mode state");
      }
      if (used[m]) throw InvalidArgument("DetectionSpec: groups overlap on mode " + std::to_string(m));
      used[m] = true;
    }
  }
}

double vacuum_overlap(const GaussianState& state, std::span<const ModeIndex> modes) {
  if (modes.empty()) throw InvalidArgument("vacuum_overlap: empty mode set");
  const auto reduced = partial_trace(state, modes);
  const auto n = reduced.cov().rows();
  const Matrix shifted = reduced.cov() + Matrix::Identity(n, n);
  const Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("vacuum_overlap: gamma + I is not positive definite");
  }
  const Matrix& l = llt.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
  const double quad = reduced.disp().dot(llt.solve(reduced.disp()));
  const double log_p =
      static_cast<double>(modes.size()) * std::numbers::ln2 - 0.5 * log_det - quad;
  return clamp_probability(std::exp(log_p), "vacuum_overlap");
}

double coincidence_probability(const GaussianState& state, const DetectionSpec& spec) {
  spec.validate(state.n_modes());
  const std::size_t k = spec.on_groups.size();
  if (k >= 8 * sizeof(unsigned long)) throw InvalidArgument("coincidence_probability: too many groups");
  double p = 1.0;
  std::vector<ModeIndex> modes;
  for (unsigned long subset = 1; subset < (1ul << k); ++subset) {
    modes.clear();
    int parity = 0;
    for (std::size_t g = 0; g < k; ++g) {
      if (subset & (1ul << g)) {
        ++parity;
        modes.insert(modes.end(), spec.on_groups[g].modes.begin(), spec.on_groups[g].modes.end());
      }
    }
    const double term = vacuum_overlap(state, modes);
    p += (parity % 2 ? -term : term);
  }
  return clamp_probability(p, "coincidence_probability");
}

}  // namespace qtele
