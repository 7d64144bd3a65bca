#include "qtele/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qtele/errors.hpp"

namespace qtele::fock {
namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

Amplitude i_power(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_mode(const TruncatedState& s, ModeIndex m, const char* what) {
  if (m >= s.n_modes) throw InvalidArgument(std::string(what) + ": mode out of range");
}

bool all_groups_click(Key key, const DetectionSpec& spec) {
  for (const auto& g : spec.on_groups) {
    bool lit = false;
    for (auto m : g.modes) {
      if (occupation(key, m) > 0) {
        lit = true;
        break;
      }
    }
    if (!lit) return false;
  }
  return true;
}

// All occupation tuples of n modes with total <= max_total, in a fixed
// (graded lexicographic) order shared by DenseState and ReducedOperator.
std::vector<std::vector<int>> enumerate_basis(std::size_t n_modes, int max_total) {
  std::vector<std::vector<int>> out;
  std::vector<int> occ(n_modes, 0);
  for (int total = 0; total <= max_total; ++total) {
    // compositions of `total` into n_modes parts
    auto rec = [&](auto&& self, std::size_t mode, int remaining) -> void {
      if (mode + 1 == n_modes) {
        occ[mode] = remaining;
        out.push_back(occ);
        return;
      }
      for (int k = remaining; k >= 0; --k) {
        occ[mode] = k;
        self(self, mode + 1, remaining - k);
      }
    };
    if (n_modes == 0) break;
    rec(rec, 0, total);
  }
  return out;
}

TruncatedState single_mode_pure(std::vector<Amplitude> amps, double deficit, int cutoff) {
  TruncatedState s;
  s.n_modes = 1;
  s.cutoff = cutoff;
  s.deficit = deficit;
  Branch b;
  for (int n = 0; n < static_cast<int>(amps.size()); ++n) {
    if (amps[static_cast<std::size_t>(n)] != Amplitude{}) b[with_occupation(0, 0, n)] = amps[static_cast<std::size_t>(n)];
  }
  s.branches.push_back(std::move(b));
  return s;
}

}  // namespace

Key make_key(std::span<const int> occupations) {
  if (occupations.size() > kMaxModes) throw InvalidArgument("make_key: too many modes");
  Key k = 0;
  for (std::size_t m = 0; m < occupations.size(); ++m) {
    if (occupations[m] < 0 || occupations[m] > kMaxOccupation) throw InvalidArgument("make_key: occupation out of range");
    k = with_occupation(k, m, occupations[m]);
  }
  return k;
}

double norm2(const Branch& b) {
  double s = 0.0;
  for (const auto& [k, a] : b) s += std::norm(a);
  return s;
}

double TruncatedState::trace() const {
  double t = 0.0;
  for (const auto& b : branches) t += norm2(b);
  return t;
}

double coherent_deficit(double alpha2, int cutoff) {
  if (alpha2 == 0.0) return 0.0;
  // Poisson tail, summed directly to keep relative precision.
  double term = std::exp(-alpha2 + (cutoff + 1) * std::log(alpha2) - log_factorial(cutoff + 1));
  double tail = 0.0;
  for (int n = cutoff + 1; n < cutoff + 400 && term > 1e-30 * tail; ++n) {
    tail += term;
    term *= alpha2 / (n + 1);
  }
  return tail;
}

double tmsv_deficit(double mu, int cutoff) {
  if (mu == 0.0) return 0.0;
  return std::pow(mu / (1.0 + mu), cutoff + 1);
}

int coherent_cutoff(double alpha2, double budget) {
  for (int c = 0; c <= kMaxSourceCutoff; ++c) {
    if (coherent_deficit(alpha2, c) < budget) return c;
  }
  throw DeficitExceeded("coherent state with |alpha|^2 = " + std::to_string(alpha2) +
                        " needs more than " + std::to_string(kMaxSourceCutoff) + " photons");
}

int tmsv_cutoff(double mu, double budget) {
  for (int c = 0; c <= kMaxSourceCutoff; ++c) {
    if (tmsv_deficit(mu, c) < budget) return c;
  }
  throw DeficitExceeded("TMSV with mu = " + std::to_string(mu) + " needs more than " +
                        std::to_string(kMaxSourceCutoff) + " pairs");
}

TruncatedState oracle_vacuum(std::size_t n_modes) {
  if (n_modes == 0 || n_modes > kMaxModes) throw InvalidArgument("oracle_vacuum: bad mode count");
  TruncatedState s;
  s.n_modes = n_modes;
  s.branches.push_back(Branch{{Key{0}, Amplitude{1.0, 0.0}}});
  return s;
}

TruncatedState oracle_fock(int photons) {
  if (photons < 0 || photons > kMaxOccupation) throw InvalidArgument("oracle_fock: bad photon number");
  std::vector<Amplitude> amps(static_cast<std::size_t>(photons) + 1);
  amps.back() = 1.0;
  return single_mode_pure(std::move(amps), 0.0, photons);
}

TruncatedState oracle_coherent(std::complex<double> alpha, int cutoff) {
  if (cutoff < 1 || cutoff > kMaxOccupation) throw InvalidArgument("oracle_coherent: cutoff must be >= 1");
  const double a2 = std::norm(alpha);
  std::vector<Amplitude> amps(static_cast<std::size_t>(cutoff) + 1);
  Amplitude c = std::exp(-a2 / 2.0);
  for (int n = 0; n <= cutoff; ++n) {
    amps[static_cast<std::size_t>(n)] = c;
    c *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return single_mode_pure(std::move(amps), coherent_deficit(a2, cutoff), cutoff);
}

TruncatedState oracle_tmsv(double mu, int cutoff) {
  if (!(mu >= 0.0)) throw InvalidArgument("oracle_tmsv: mu must be >= 0");
  if (cutoff < 1 || cutoff > kMaxOccupation) throw InvalidArgument("oracle_tmsv: cutoff must be >= 1");
  const double lambda = std::sqrt(mu / (1.0 + mu));
  TruncatedState s;
  s.n_modes = 2;
  s.cutoff = cutoff;
  s.deficit = tmsv_deficit(mu, cutoff);
  Branch b;
  double c = std::sqrt(1.0 / (1.0 + mu));
  for (int n = 0; n <= cutoff && c != 0.0; ++n) {
    b[with_occupation(with_occupation(0, 0, n), 1, n)] = c;
    c *= lambda;
  }
  s.branches.push_back(std::move(b));
  return s;
}

TruncatedState oracle_thermal(double mu, int cutoff) {
  if (!(mu >= 0.0)) throw InvalidArgument("oracle_thermal: mu must be >= 0");
  if (cutoff < 1 || cutoff > kMaxOccupation) throw InvalidArgument("oracle_thermal: cutoff must be >= 1");
  TruncatedState s;
  s.n_modes = 1;
  s.cutoff = cutoff;
  s.deficit = tmsv_deficit(mu, cutoff);
  const double ratio = mu / (1.0 + mu);
  double w = 1.0 / (1.0 + mu);
  for (int n = 0; n <= cutoff && w != 0.0; ++n) {
    s.branches.push_back(Branch{{with_occupation(0, 0, n), Amplitude{std::sqrt(w), 0.0}}});
    w *= ratio;
  }
  return s;
}

TruncatedState tensor(const TruncatedState& a, const TruncatedState& b) {
  if (a.n_modes + b.n_modes > kMaxModes) throw InvalidArgument("tensor: too many modes");
  TruncatedState s;
  s.n_modes = a.n_modes + b.n_modes;
  s.cutoff = std::max(a.cutoff, b.cutoff);
  s.deficit = 1.0 - (1.0 - a.deficit) * (1.0 - b.deficit);
  const unsigned shift = static_cast<unsigned>(8 * a.n_modes);
  s.branches.reserve(a.branches.size() * b.branches.size());
  for (const auto& ba : a.branches) {
    for (const auto& bb : b.branches) {
      Branch out;
      out.reserve(ba.size() * bb.size());
      for (const auto& [ka, va] : ba) {
        for (const auto& [kb, vb] : bb) out[ka | (kb << shift)] = va * vb;
      }
      s.branches.push_back(std::move(out));
    }
  }
  return s;
}

TruncatedState embed(const TruncatedState& s, std::span<const ModeIndex> modes, std::size_t n_total) {
  if (modes.size() != s.n_modes) throw InvalidArgument("embed: mode list size mismatch");
  if (n_total > kMaxModes) throw InvalidArgument("embed: too many modes");
  std::vector<bool> seen(n_total, false);
  for (auto m : modes) {
    if (m >= n_total || seen[m]) throw InvalidArgument("embed: bad mode list");
    seen[m] = true;
  }
  TruncatedState out;
  out.n_modes = n_total;
  out.cutoff = s.cutoff;
  out.deficit = s.deficit;
  for (const auto& b : s.branches) {
    Branch nb;
    nb.reserve(b.size());
    for (const auto& [k, v] : b) {
      Key nk = 0;
      for (std::size_t i = 0; i < modes.size(); ++i) nk = with_occupation(nk, modes[i], occupation(k, i));
      nb[nk] = v;
    }
    out.branches.push_back(std::move(nb));
  }
  return out;
}

std::vector<Amplitude> beamsplitter_row(int n, int m, double t, double r) {
  const int total = n + m;
  std::vector<Amplitude> row(static_cast<std::size_t>(total) + 1, Amplitude{});
  const double norm = -0.5 * (log_factorial(n) + log_factorial(m));
  for (int j = 0; j <= n; ++j) {
    for (int l = 0; l <= m; ++l) {
      const int k = j + l;
      const int t_pow = j + (m - l);
      const int r_pow = (n - j) + l;
      const double mag = binomial(n, j) * binomial(m, l) * std::pow(t, t_pow) * std::pow(r, r_pow) *
                         std::exp(norm + 0.5 * (log_factorial(k) + log_factorial(total - k)));
      row[static_cast<std::size_t>(k)] += mag * i_power(r_pow);
    }
  }
  return row;
}

TruncatedState oracle_beamsplitter(const TruncatedState& s, ModeIndex a, ModeIndex b, double t, double r) {
  check_mode(s, a, "oracle_beamsplitter");
  check_mode(s, b, "oracle_beamsplitter");
  if (a == b) throw InvalidArgument("oracle_beamsplitter: modes must differ");
  if (std::abs(t * t + r * r - 1.0) > 1e-12) throw InvalidArgument("oracle_beamsplitter: t^2 + r^2 must equal 1");
  std::map<std::pair<int, int>, std::vector<Amplitude>> rows;
  TruncatedState out;
  out.n_modes = s.n_modes;
  out.cutoff = s.cutoff;
  out.deficit = s.deficit;
  out.branches.reserve(s.branches.size());
  for (const auto& br : s.branches) {
    Branch nb;
    nb.reserve(br.size() * 2);
    for (const auto& [k, v] : br) {
      const int n = occupation(k, a);
      const int m = occupation(k, b);
      auto it = rows.find({n, m});
      if (it == rows.end()) it = rows.emplace(std::pair{n, m}, beamsplitter_row(n, m, t, r)).first;
      const auto& row = it->second;
      for (int q = 0; q <= n + m; ++q) {
        const Amplitude c = row[static_cast<std::size_t>(q)];
        if (c == Amplitude{}) continue;
        nb[with_occupation(with_occupation(k, a, q), b, n + m - q)] += v * c;
      }
    }
    out.branches.push_back(std::move(nb));
  }
  return out;
}

TruncatedState oracle_phase(const TruncatedState& s, ModeIndex mode, double phi) {
  check_mode(s, mode, "oracle_phase");
  TruncatedState out = s;
  for (auto& br : out.branches) {
    for (auto& [k, v] : br) v *= std::polar(1.0, phi * occupation(k, mode));
  }
  return out;
}

TruncatedState oracle_loss(const TruncatedState& s, ModeIndex mode, double eta) {
  check_mode(s, mode, "oracle_loss");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("oracle_loss: eta must be in [0, 1]");
  if (s.n_modes + 1 > kMaxModes) throw InvalidArgument("oracle_loss: no room for the ancilla mode");
  if (eta == 1.0) return s;
  // Vacuum ancilla on the next free mode: its key bits are already zero.
  TruncatedState widened = s;
  const ModeIndex ancilla = s.n_modes;
  widened.n_modes = s.n_modes + 1;
  widened = oracle_beamsplitter(widened, mode, ancilla, std::sqrt(eta), std::sqrt(1.0 - eta));
  TruncatedState out;
  out.n_modes = s.n_modes;
  out.cutoff = s.cutoff;
  out.deficit = s.deficit;
  for (const auto& br : widened.branches) {
    std::map<int, Branch> by_lost;
    for (const auto& [k, v] : br) by_lost[occupation(k, ancilla)][with_occupation(k, ancilla, 0)] += v;
    for (auto& [lost, nb] : by_lost) {
      if (norm2(nb) > 0.0) out.branches.push_back(std::move(nb));
    }
  }
  return out;
}

double oracle_probability(const TruncatedState& s, const DetectionSpec& spec) {
  spec.validate(s.n_modes);
  double p = 0.0;
  for (const auto& br : s.branches) {
    for (const auto& [k, v] : br) {
      if (all_groups_click(k, spec)) p += std::norm(v);
    }
  }
  return p;
}

ReducedOperator conditioned_reduced_state(const TruncatedState& s, const DetectionSpec& spec,
                                          std::span<const ModeIndex> keep) {
  spec.validate(s.n_modes);
  for (auto m : keep) check_mode(s, m, "conditioned_reduced_state");
  int max_total = 0;
  for (const auto& br : s.branches) {
    for (const auto& [k, v] : br) {
      int t = 0;
      for (auto m : keep) t += occupation(k, m);
      max_total = std::max(max_total, t);
    }
  }
  const DenseState layout(keep.size(), max_total);
  ReducedOperator out{keep.size(), max_total, Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(layout.dim()), static_cast<Eigen::Index>(layout.dim()))};
  std::vector<int> occ(keep.size());
  for (const auto& br : s.branches) {
    // Group clicked amplitudes by the state of the traced modes.
    std::unordered_map<Key, std::vector<std::pair<std::size_t, Amplitude>>, KeyHash> groups;
    for (const auto& [k, v] : br) {
      if (!all_groups_click(k, spec)) continue;
      Key rest = k;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        occ[i] = occupation(k, keep[i]);
        rest = with_occupation(rest, keep[i], 0);
      }
      groups[rest].emplace_back(layout.index_of(occ), v);
    }
    for (const auto& [rest, entries] : groups) {
      for (const auto& [i, vi] : entries) {
        for (const auto& [j, vj] : entries) {
          out.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += vi * std::conj(vj);
        }
      }
    }
  }
  return out;
}

// --- DenseState -------------------------------------------------------------

DenseState::DenseState(std::size_t n_modes, int max_total)
    : n_modes_(n_modes), max_total_(max_total), basis_(enumerate_basis(n_modes, max_total)) {
  if (n_modes == 0 || n_modes > kMaxModes) throw InvalidArgument("DenseState: bad mode count");
  if (max_total < 0) throw InvalidArgument("DenseState: max_total must be >= 0");
  index_.reserve(basis_.size());
  for (std::size_t i = 0; i < basis_.size(); ++i) index_[make_key(basis_[i])] = i;
  const auto d = static_cast<Eigen::Index>(basis_.size());
  rho_ = Eigen::MatrixXcd::Zero(d, d);
}

std::size_t DenseState::index_of(std::span<const int> occupations) const {
  const auto it = index_.find(make_key(occupations));
  if (it == index_.end()) throw InvalidArgument("DenseState: occupation outside the truncated basis");
  return it->second;
}

DenseState DenseState::from_truncated(const TruncatedState& s, int max_total) {
  DenseState d(s.n_modes, max_total);
  for (const auto& br : s.branches) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d.dim()));
    for (const auto& [k, v] : br) {
      const auto it = d.index_.find(k);
      if (it == d.index_.end()) throw InvalidArgument("DenseState: state exceeds max_total photons");
      psi(static_cast<Eigen::Index>(it->second)) += v;
    }
    d.rho_ += psi * psi.adjoint();
  }
  return d;
}

DenseState DenseState::product(const ReducedOperator& a, const ReducedOperator& b) {
  DenseState out(a.n_modes + b.n_modes, a.max_total + b.max_total);
  const DenseState la(a.n_modes, a.max_total);
  const DenseState lb(b.n_modes, b.max_total);
  // Split each basis vector into its a/b parts; entries outside either
  // factor's support stay zero.
  std::vector<std::ptrdiff_t> ia(out.dim(), -1), ib(out.dim(), -1);
  for (std::size_t i = 0; i < out.dim(); ++i) {
    const auto& occ = out.basis_[i];
    const std::span<const int> pa(occ.data(), a.n_modes);
    const std::span<const int> pb(occ.data() + a.n_modes, b.n_modes);
    int ta = 0, tb = 0;
    for (int v : pa) ta += v;
    for (int v : pb) tb += v;
    if (ta <= a.max_total && tb <= b.max_total) {
      ia[i] = static_cast<std::ptrdiff_t>(la.index_of(pa));
      ib[i] = static_cast<std::ptrdiff_t>(lb.index_of(pb));
    }
  }
  for (std::size_t i = 0; i < out.dim(); ++i) {
    if (ia[i] < 0) continue;
    for (std::size_t j = 0; j < out.dim(); ++j) {
      if (ia[j] < 0) continue;
      out.rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a.rho(ia[i], ia[j]) * b.rho(ib[i], ib[j]);
    }
  }
  return out;
}

void DenseState::apply_beamsplitter(ModeIndex a, ModeIndex b, double t, double r) {
  if (a >= n_modes_ || b >= n_modes_ || a == b) throw InvalidArgument("DenseState: bad beamsplitter modes");
  if (std::abs(t * t + r * r - 1.0) > 1e-12) throw InvalidArgument("DenseState: t^2 + r^2 must equal 1");
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t c = 0; c < dim(); ++c) {
    auto occ = basis_[c];
    const int n = occ[a];
    const int m = occ[b];
    const auto row = beamsplitter_row(n, m, t, r);
    for (int q = 0; q <= n + m; ++q) {
      occ[a] = q;
      occ[b] = n + m - q;
      u(static_cast<Eigen::Index>(index_of(occ)), static_cast<Eigen::Index>(c)) += row[static_cast<std::size_t>(q)];
    }
  }
  rho_ = u * rho_ * u.adjoint();
}

void DenseState::apply_phase(ModeIndex mode, double phi) {
  if (mode >= n_modes_) throw InvalidArgument("DenseState: bad phase mode");
  Eigen::VectorXcd ph(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) ph(static_cast<Eigen::Index>(i)) = std::polar(1.0, phi * basis_[i][mode]);
  rho_ = ph.asDiagonal() * rho_ * ph.conjugate().asDiagonal();
}

void DenseState::apply_loss(ModeIndex mode, double eta) {
  if (mode >= n_modes_) throw InvalidArgument("DenseState: bad loss mode");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("DenseState: eta must be in [0, 1]");
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(d, d);
  for (int lost = 0; lost <= max_total_; ++lost) {
    Eigen::MatrixXcd kraus = Eigen::MatrixXcd::Zero(d, d);
    bool any = false;
    for (std::size_t c = 0; c < dim(); ++c) {
      auto occ = basis_[c];
      const int n = occ[mode];
      if (n < lost) continue;
      const double w = std::sqrt(binomial(n, lost) * std::pow(eta, n - lost) * std::pow(1.0 - eta, lost));
      if (w == 0.0) continue;
      occ[mode] = n - lost;
      kraus(static_cast<Eigen::Index>(index_of(occ)), static_cast<Eigen::Index>(c)) = w;
      any = true;
    }
    if (any) next += kraus * rho_ * kraus.adjoint();
  }
  rho_ = std::move(next);
}

double DenseState::trace() const { return rho_.trace().real(); }

double DenseState::probability(const DetectionSpec& spec) const {
  spec.validate(n_modes_);
  double p = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (all_groups_click(make_key(basis_[i]), spec)) {
      p += rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
  }
  return p;
}

ReducedOperator DenseState::conditioned_reduced_state(const DetectionSpec& spec,
                                                      std::span<const ModeIndex> keep) const {
  spec.validate(n_modes_);
  for (auto m : keep) {
    if (m >= n_modes_) throw InvalidArgument("DenseState: bad keep mode");
  }
  const DenseState layout(keep.size(), max_total_);
  ReducedOperator out{keep.size(), max_total_,
                      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(layout.dim()),
                                             static_cast<Eigen::Index>(layout.dim()))};
  auto rest_key = [&](const std::vector<int>& occ) {
    Key k = make_key(occ);
    for (auto m : keep) k = with_occupation(k, m, 0);
    return k;
  };
  std::vector<int> ki(keep.size()), kj(keep.size());
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!all_groups_click(make_key(basis_[i]), spec)) continue;
    const Key ri = rest_key(basis_[i]);
    for (std::size_t q = 0; q < keep.size(); ++q) ki[q] = basis_[i][keep[q]];
    for (std::size_t j = 0; j < dim(); ++j) {
      // The traced modes must agree; the click projector is diagonal in them.
      if (rest_key(basis_[j]) != ri) continue;
      for (std::size_t q = 0; q < keep.size(); ++q) kj[q] = basis_[j][keep[q]];
      out.rho(static_cast<Eigen::Index>(layout.index_of(ki)), static_cast<Eigen::Index>(layout.index_of(kj))) +=
          rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

}  // namespace qtele::fock
