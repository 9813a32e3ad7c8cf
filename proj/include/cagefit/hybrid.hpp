#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cagefit/descent.hpp"
#include "cagefit/evolution.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/sampling.hpp"

namespace cagefit {

/// Outer-GA-over-inner-descent configuration. The GA searches (r_s, x_r2)
/// pairs; each member's fitness is the squared error of a descent solve with
/// that pair held fixed, which replaces the linear restrictions (k_r/k_x are
/// ignored here).
struct HybridConfig {
  int n_pop = 15;
  int n_pool = 10;
  int n_elite = 2;
  double crossover_fraction = 0.80;
  int max_generations = 10;
  DescentAlgorithm inner = DescentAlgorithm::DNR;
  // Inner-solve settings. A Sample guess is re-drawn from the run seed for
  // every inner solve, so each member descends from its own random start,
  // exactly as the plain algorithms start each run from a fresh estimate.
  DescentConfig inner_cfg{};
  std::uint64_t seed = 0;
  double pair_lo = 0.0;  // sampling range for both r_s and x_r2
  double pair_hi = 0.15;
  double mutation_sigma = 0.01;
  // When set, member zero starts as this solution's (r_s, x_r2) pair and its
  // inner solve is seeded at the solution itself. Guarantees the hybrid never
  // finishes worse than the solve that produced it.
  std::optional<CircuitParams> seed_solution;
  // Children seed their inner solve from the current best member's estimate
  // instead of the configured initial-guess policy.
  bool warm_start = false;
};

struct HybridMember {
  double r_s = 0;
  double x_r2 = 0;
  SolveOutcome inner_outcome{};
  double fitness = std::numeric_limits<double>::quiet_NaN();
};

/// Winning inner outcome plus the instrumentation needed to audit the
/// inner-solve budget (at most n_pop + max_generations * (n_pop - n_elite)).
struct HybridOutcome {
  SolveOutcome outcome{};
  int generations = 0;
  int inner_solves = 0;
};

/// Runs the hybrid estimator. Members are evaluated sequentially in index
/// order and the whole run stops at the first converged inner solve, so the
/// budget instrumentation counts every descent invocation. Elites keep their
/// cached outcome and are never re-solved.
inline HybridOutcome solve_hybrid(const TargetVector& targets,
                                  const HybridConfig& cfg) {
  detail::check_population_shape(cfg.n_pop, cfg.n_pool, cfg.n_elite,
                                 cfg.crossover_fraction, cfg.max_generations);
  if (cfg.pair_lo > cfg.pair_hi) {
    throw ValidationError("pair sampling range inverted");
  }
  Rng rng(cfg.seed);
  Rng guess_rng(derive_seed(cfg.seed, fnv1a64("inner-guess")));
  HybridOutcome result;

  const auto solve_member = [&](HybridMember& m,
                                const std::optional<CircuitParams>& guess) {
    DescentConfig inner = cfg.inner_cfg;
    if (guess) {
      inner.initial_guess = InitialGuessPolicy::explicit_guess(*guess);
    } else if (inner.initial_guess.kind == GuessKind::Sample) {
      inner.initial_guess.seed = guess_rng();
    }
    m.inner_outcome = solve_descent(
        cfg.inner, targets, inner, ParameterSpace::fixed_pair(m.r_s, m.x_r2));
    m.fitness = std::isfinite(m.inner_outcome.squared_error)
                    ? m.inner_outcome.squared_error
                    : 6.0;
    ++result.inner_solves;
    return m.inner_outcome.converged;
  };
  const auto by_fitness = [](const HybridMember& a, const HybridMember& b) {
    return a.fitness < b.fitness;
  };

  std::vector<HybridMember> members(static_cast<std::size_t>(cfg.n_pop));
  for (HybridMember& m : members) {
    m.r_s = sample_in_range(rng, cfg.pair_lo, cfg.pair_hi);
    m.x_r2 = sample_in_range(rng, cfg.pair_lo, cfg.pair_hi);
  }
  if (cfg.seed_solution) {
    members[0].r_s = cfg.seed_solution->r_s;
    members[0].x_r2 = cfg.seed_solution->x_r2;
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    std::optional<CircuitParams> guess;
    if (i == 0 && cfg.seed_solution) guess = cfg.seed_solution;
    if (solve_member(members[i], guess)) {
      result.outcome = members[i].inner_outcome;
      return result;
    }
  }
  std::stable_sort(members.begin(), members.end(), by_fitness);

  const int n_children = cfg.n_pop - cfg.n_elite;
  const int n_cross =
      detail::crossover_count(cfg.crossover_fraction, n_children);
  std::uniform_int_distribution<std::size_t> pick(
      0, static_cast<std::size_t>(cfg.n_pool) - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int gen = 1; gen <= cfg.max_generations; ++gen) {
    std::vector<HybridMember> next(members.begin(),
                                   members.begin() + cfg.n_elite);
    for (int c = 0; c < n_cross; ++c) {
      const std::size_t i1 = pick(rng);
      std::size_t i2 = pick(rng);
      while (i2 == i1) i2 = pick(rng);
      HybridMember child;
      const double a1 = unit(rng);
      child.r_s = a1 * members[i1].r_s + (1.0 - a1) * members[i2].r_s;
      const double a2 = unit(rng);
      child.x_r2 = a2 * members[i1].x_r2 + (1.0 - a2) * members[i2].x_r2;
      next.push_back(child);
    }
    for (int m = 0; m < n_children - n_cross; ++m) {
      const HybridMember& parent = members[pick(rng)];
      HybridMember child;
      child.r_s =
          std::max(parent.r_s + cfg.mutation_sigma * gauss(rng), kMinParam);
      child.x_r2 =
          std::max(parent.x_r2 + cfg.mutation_sigma * gauss(rng), kMinParam);
      next.push_back(child);
    }
    std::optional<CircuitParams> warm;
    if (cfg.warm_start) warm = members[0].inner_outcome.params;
    for (HybridMember& child : next) {
      if (!std::isnan(child.fitness)) continue;  // cached elite
      if (solve_member(child, warm)) {
        result.outcome = child.inner_outcome;
        result.generations = gen;
        return result;
      }
    }
    std::stable_sort(next.begin(), next.end(), by_fitness);
    members = std::move(next);
    result.generations = gen;
  }
  result.outcome = members.front().inner_outcome;
  return result;
}

}  // namespace cagefit
