#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cagefit/circuit.hpp"
#include "cagefit/descent.hpp"
#include "cagefit/errors.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/sampling.hpp"

namespace cagefit {

struct GaConfig {
  int n_pop = 20;
  int n_pool = 15;   // mating pool: the fittest n_pool members survive
  int n_elite = 2;   // carried unchanged, fitness cached
  double crossover_fraction = 0.80;
  int max_generations = 30;
  std::uint64_t seed = 0;
  std::array<double, 8> init_lo = kInitLo;
  std::array<double, 8> init_hi = kInitHi;
  std::array<double, 8> mutation_sigma = kMutationSigma;
  double convergence_threshold = 1e-5;
};

/// fitness is quiet NaN until the member is evaluated.
struct GaMember {
  CircuitParams params{};
  double fitness = std::numeric_limits<double>::quiet_NaN();
};

struct Population {
  std::vector<GaMember> members;
  int generation = 0;
};

namespace detail {

inline void check_population_shape(int n_pop, int n_pool, int n_elite,
                                   double crossover_fraction,
                                   int max_generations) {
  if (n_pop < 1 || n_pool < 2 || n_pool > n_pop || n_elite < 0 ||
      n_elite >= n_pool) {
    throw ValidationError("population/pool/elite sizes are inconsistent");
  }
  if (!(crossover_fraction >= 0.0) || crossover_fraction > 1.0) {
    throw ValidationError("crossover fraction outside [0, 1]");
  }
  if (max_generations < 0) {
    throw ValidationError("generation count is negative");
  }
}

inline int crossover_count(double fraction, int n_children) {
  return std::clamp<int>(static_cast<int>(std::lround(fraction * n_children)),
                         0, n_children);
}

}  // namespace detail

inline void validate(const GaConfig& cfg) {
  detail::check_population_shape(cfg.n_pop, cfg.n_pool, cfg.n_elite,
                                 cfg.crossover_fraction, cfg.max_generations);
  for (std::size_t i = 0; i < cfg.init_lo.size(); ++i) {
    if (cfg.init_lo[i] > cfg.init_hi[i]) {
      throw ValidationError("initial sampling range inverted");
    }
  }
}

/// Fresh unevaluated population drawn from the configured ranges.
inline Population ga_init(const GaConfig& cfg, Rng& rng) {
  validate(cfg);
  Population pop;
  pop.members.resize(static_cast<std::size_t>(cfg.n_pop));
  for (GaMember& m : pop.members) {
    m.params = sample_params(rng, cfg.init_lo, cfg.init_hi);
  }
  return pop;
}

inline Population ga_init(const GaConfig& cfg) {
  Rng rng(cfg.seed);
  return ga_init(cfg, rng);
}

/// Fills in missing fitness values (squared residual error against the
/// targets) and sorts ascending. Finite cached values are left alone, so
/// elites are never re-evaluated.
inline void evaluate(Population& pop, const TargetVector& targets) {
  for (GaMember& m : pop.members) {
    if (std::isnan(m.fitness)) {
      m.fitness = residuals(m.params, targets).squared_error;
    }
  }
  std::stable_sort(pop.members.begin(), pop.members.end(),
                   [](const GaMember& a, const GaMember& b) {
                     return a.fitness < b.fitness;
                   });
}

/// One generation: members below the mating pool are discarded, elites are
/// copied unchanged, and the remaining slots are filled by blend crossover
/// (fresh alpha per parameter) and Gaussian mutation from uniformly chosen
/// pool parents. The returned population is evaluated and sorted.
inline Population ga_step(const Population& pop, const TargetVector& targets,
                          const GaConfig& cfg, Rng& rng) {
  validate(cfg);
  if (pop.members.size() != static_cast<std::size_t>(cfg.n_pop)) {
    throw ValidationError("population size does not match configuration");
  }
  const int n_children = cfg.n_pop - cfg.n_elite;
  const int n_cross =
      detail::crossover_count(cfg.crossover_fraction, n_children);
  std::uniform_int_distribution<std::size_t> pick(
      0, static_cast<std::size_t>(cfg.n_pool) - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Population next;
  next.generation = pop.generation + 1;
  next.members.reserve(pop.members.size());
  for (int e = 0; e < cfg.n_elite; ++e) {
    next.members.push_back(pop.members[static_cast<std::size_t>(e)]);
  }
  for (int c = 0; c < n_cross; ++c) {
    const std::size_t i1 = pick(rng);
    std::size_t i2 = pick(rng);
    while (i2 == i1) i2 = pick(rng);
    const std::array<double, 8> p1 = pop.members[i1].params.as_array();
    const std::array<double, 8> p2 = pop.members[i2].params.as_array();
    std::array<double, 8> child{};
    for (std::size_t k = 0; k < child.size(); ++k) {
      const double alpha = unit(rng);
      child[k] = alpha * p1[k] + (1.0 - alpha) * p2[k];
    }
    next.members.push_back({CircuitParams::from_array(child), nan});
  }
  for (int m = 0; m < n_children - n_cross; ++m) {
    const std::array<double, 8> parent =
        pop.members[pick(rng)].params.as_array();
    std::array<double, 8> child{};
    for (std::size_t k = 0; k < child.size(); ++k) {
      child[k] =
          std::max(parent[k] + cfg.mutation_sigma[k] * gauss(rng), kMinParam);
    }
    next.members.push_back({CircuitParams::from_array(child), nan});
  }
  evaluate(next, targets);
  return next;
}

/// Stateless form: the generation's randomness is derived from (seed,
/// generation index), so a run is reproducible from the config alone.
inline Population ga_step(const Population& pop, const TargetVector& targets,
                          const GaConfig& cfg) {
  Rng rng(derive_seed(cfg.seed,
                      static_cast<std::uint64_t>(pop.generation) + 1));
  return ga_step(pop, targets, cfg, rng);
}

inline SolveOutcome solve_ga(const TargetVector& targets,
                             const GaConfig& cfg) {
  Population pop = ga_init(cfg);
  evaluate(pop, targets);
  int generations = 0;
  while (pop.members.front().fitness >= cfg.convergence_threshold &&
         generations < cfg.max_generations) {
    pop = ga_step(pop, targets, cfg);
    ++generations;
  }
  const GaMember& best = pop.members.front();
  SolveOutcome out;
  out.params = best.params;
  out.squared_error = best.fitness;
  out.iterations = generations;
  out.converged = best.fitness < cfg.convergence_threshold;
  if (!out.converged) out.failure = FailureReason::MaxIterations;
  return out;
}

}  // namespace cagefit
