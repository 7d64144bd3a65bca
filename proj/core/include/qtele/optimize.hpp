#pragma once

// Box-constrained minimizers: differential evolution (rand/1/bin) with an
// optional Nelder-Mead polish.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qtele {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Must be safe to call concurrently from several threads.
using Objective = std::function<double(std::span<const double>)>;

struct DeConfig {
  int population = 0;  ///< 0: max(20, 15 * dim)
  double mutation = 0.8;
  double crossover = 0.9;
  int max_generations = 500;
  double tolerance = 1e-8;  ///< stop when max - min of the population objective falls below this
  bool polish = true;       ///< refine the best member with bounded Nelder-Mead
  bool parallel = true;
};

struct DeGeneration {
  int generation = 0;
  const std::vector<std::vector<double>>& members;
  const std::vector<double>& values;
};
using DeObserver = std::function<void(const DeGeneration&)>;

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;  ///< DE generations or Nelder-Mead iterations
  long evaluations = 0;
  bool converged = false;
};

/// Trial vectors are drawn sequentially from one mt19937_64 stream, then
/// evaluated (possibly in parallel) and selected, so the result depends only
/// on the seed. Mutant coordinates leaving the box are redrawn uniformly.
/// The observer sees the population after initialization and after every
/// generation.
OptimizeResult differential_evolution(const Objective& f, std::span<const Bounds> bounds, const DeConfig& config,
                                      std::uint64_t seed, const DeObserver& observer = {});

struct NelderMeadOptions {
  int max_iterations = 4000;
  double initial_step = 0.05;  ///< simplex size as a fraction of each bound width
  double xtol = 1e-12;         ///< relative simplex size
  double ftol = 1e-15;
};

/// Vertices are projected onto the box after every move.
OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const Bounds> bounds,
                           const NelderMeadOptions& opts = {});

}  // namespace qtele
