#include "qtele/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qtele/errors.hpp"
#include "qtele/parallel.hpp"

namespace qtele {
namespace {

void check_bounds(std::span<const Bounds> bounds) {
  if (bounds.empty()) throw InvalidArgument("optimizer: empty bounds");
  for (const auto& b : bounds) {
    if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi)) {
      throw InvalidArgument("optimizer: each bound needs finite lo < hi");
    }
  }
}

void evaluate_all(const Objective& f, const std::vector<std::vector<double>>& xs, std::vector<double>& out,
                  bool parallel) {
  out.resize(xs.size());
  auto one = [&](std::size_t i) {
    const double v = f(xs[i]);
    out[i] = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  if (parallel) {
    parallel_for(xs.size(), one);
  } else {
    for (std::size_t i = 0; i < xs.size(); ++i) one(i);
  }
}

std::size_t argmin(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

void clamp_into(std::vector<double>& x, std::span<const Bounds> bounds) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], bounds[k].lo, bounds[k].hi);
}

}  // namespace

OptimizeResult differential_evolution(const Objective& f, std::span<const Bounds> bounds, const DeConfig& config,
                                      std::uint64_t seed, const DeObserver& observer) {
  check_bounds(bounds);
  const std::size_t dim = bounds.size();
  const std::size_t np =
      config.population > 0 ? static_cast<std::size_t>(config.population) : std::max<std::size_t>(20, 15 * dim);
  if (np < 4) throw InvalidArgument("differential_evolution: population must be >= 4");
  if (!(config.mutation > 0.0 && config.mutation <= 2.0)) throw InvalidArgument("differential_evolution: mutation must be in (0, 2]");
  if (!(config.crossover >= 0.0 && config.crossover <= 1.0)) throw InvalidArgument("differential_evolution: crossover must be in [0, 1]");
  if (config.max_generations < 0) throw InvalidArgument("differential_evolution: max_generations must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](std::size_t k) { return bounds[k].lo + unit(rng) * (bounds[k].hi - bounds[k].lo); };

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (auto& member : pop) {
    for (std::size_t k = 0; k < dim; ++k) member[k] = draw(k);
  }
  std::vector<double> values;
  evaluate_all(f, pop, values, config.parallel);

  OptimizeResult result;
  result.evaluations = static_cast<long>(np);
  if (observer) observer({0, pop, values});

  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);
  std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
  std::vector<double> trial_values;

  int gen = 0;
  bool converged = spread(values) < config.tolerance;
  while (!converged && gen < config.max_generations) {
    ++gen;
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r0, r1, r2;
      do r0 = pick(rng); while (r0 == i);
      do r1 = pick(rng); while (r1 == i || r1 == r0);
      do r2 = pick(rng); while (r2 == i || r2 == r0 || r2 == r1);
      const std::size_t forced = pick_dim(rng);
      auto& trial = trials[i];
      for (std::size_t k = 0; k < dim; ++k) {
        if (k == forced || unit(rng) < config.crossover) {
          double v = pop[r0][k] + config.mutation * (pop[r1][k] - pop[r2][k]);
          if (v < bounds[k].lo || v > bounds[k].hi) v = draw(k);
          trial[k] = v;
        } else {
          trial[k] = pop[i][k];
        }
      }
    }
    evaluate_all(f, trials, trial_values, config.parallel);
    result.evaluations += static_cast<long>(np);
    for (std::size_t i = 0; i < np; ++i) {
      if (trial_values[i] <= values[i]) {
        pop[i] = trials[i];
        values[i] = trial_values[i];
      }
    }
    if (observer) observer({gen, pop, values});
    converged = spread(values) < config.tolerance;
  }

  const std::size_t best = argmin(values);
  result.x = pop[best];
  result.value = values[best];
  result.iterations = gen;
  result.converged = converged;

  if (config.polish) {
    auto polished = nelder_mead(f, result.x, bounds);
    result.evaluations += polished.evaluations;
    if (polished.value <= result.value) {
      result.x = std::move(polished.x);
      result.value = polished.value;
    }
  }
  return result;
}

OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const Bounds> bounds,
                           const NelderMeadOptions& opts) {
  check_bounds(bounds);
  const std::size_t n = bounds.size();
  if (x0.size() != n) throw InvalidArgument("nelder_mead: start point has wrong dimension");
  clamp_into(x0, bounds);

  OptimizeResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> sim(n + 1, x0);
  for (std::size_t k = 0; k < n; ++k) {
    const double step = opts.initial_step * (bounds[k].hi - bounds[k].lo);
    // Step inwards when the start sits near the upper bound.
    sim[k + 1][k] += (x0[k] + step <= bounds[k].hi) ? step : -step;
    clamp_into(sim[k + 1], bounds);
  }
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(sim[i]);

  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (w[k] - c[k]);
    clamp_into(p, bounds);
    return p;
  };

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    {
      std::vector<std::vector<double>> s2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        s2[i] = std::move(sim[order[i]]);
        f2[i] = fs[order[i]];
      }
      sim = std::move(s2);
      fs = std::move(f2);
    }
    double xspan = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        xspan = std::max(xspan, std::abs(sim[i][k] - sim[0][k]) / (bounds[k].hi - bounds[k].lo));
      }
    }
    if (xspan <= opts.xtol || (fs[n] - fs[0]) <= opts.ftol * std::max(1.0, std::abs(fs[0]))) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += sim[i][k] / static_cast<double>(n);
    }
    const auto xr = point(centroid, sim[n], -1.0);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      const auto xe = point(centroid, sim[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        sim[n] = xe;
        fs[n] = fe;
      } else {
        sim[n] = xr;
        fs[n] = fr;
      }
      continue;
    }
    if (fr < fs[n - 1]) {
      sim[n] = xr;
      fs[n] = fr;
      continue;
    }
    const bool outside = fr < fs[n];
    const auto xc = point(centroid, outside ? xr : sim[n], 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[n])) {
      sim[n] = xc;
      fs[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      sim[i] = point(sim[0], sim[i], 0.5);
      fs[i] = eval(sim[i]);
    }
  }
  const std::size_t best = argmin(fs);
  result.x = sim[best];
  result.value = fs[best];
  result.iterations = it;
  return result;
}

}  // namespace qtele
