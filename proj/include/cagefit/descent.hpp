#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

#include "cagefit/circuit.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/linalg.hpp"
#include "cagefit/sampling.hpp"

namespace cagefit {

/// Linear ties that remove two of the eight parameters from the search:
/// stator resistance follows the inner-cage resistance, outer-cage leakage
/// follows the stator leakage.
struct RestrictionConfig {
  double k_r = 1.0;  // r_s = k_r * r_r1
  double k_x = 0.5;  // x_r2 = k_x * x_s

  static constexpr RestrictionConfig standard() { return {1.0, 0.5}; }
  static constexpr RestrictionConfig alternate() { return {0.5, 1.0}; }
};

/// Maps between the six directly-searched parameters
/// (x_s, x_m, r_r1, x_r1, r_r2, r_c) and full parameter sets. Dependent
/// entries come from the linear restrictions, or in fixed-pair mode from
/// externally imposed values that the search never moves.
class ParameterSpace {
 public:
  static ParameterSpace restricted(const RestrictionConfig& r) {
    return ParameterSpace{false, r.k_r, r.k_x};
  }
  static ParameterSpace fixed_pair(double r_s, double x_r2) {
    return ParameterSpace{true, r_s, x_r2};
  }

  /// Recomputes the dependent entries of a raw parameter array in place.
  void rebind(std::array<double, 8>& raw) const {
    raw[0] = fixed_ ? a_ : a_ * raw[3];
    raw[6] = fixed_ ? b_ : b_ * raw[1];
  }

  CircuitParams assemble(const Vec6& free) const {
    std::array<double, 8> raw{};
    for (std::size_t j = 0; j < free.size(); ++j) raw[kFreeMask[j]] = free[j];
    rebind(raw);
    return CircuitParams::from_array(raw);
  }

  Vec6 extract(const CircuitParams& p) const {
    const std::array<double, 8> raw = p.as_array();
    Vec6 free{};
    for (std::size_t j = 0; j < free.size(); ++j) free[j] = raw[kFreeMask[j]];
    return free;
  }

 private:
  ParameterSpace(bool fixed, double a, double b)
      : fixed_(fixed), a_(a), b_(b) {}

  bool fixed_;
  double a_, b_;
};

/// Assembles a full parameter set from the six free parameters under the
/// linear restrictions.
inline CircuitParams apply_restrictions(const Vec6& free,
                                        const RestrictionConfig& cfg) {
  return ParameterSpace::restricted(cfg).assemble(free);
}

enum class DampingStrategy { GainRatio, ErrorTerm };

struct DampingConfig {
  double lambda0 = 1e-2;
  double beta = 3.0;   // damping increase factor
  double gamma = 3.0;  // damping decrease factor
  double rho1 = 0.25;  // gain-ratio thresholds; unused under ErrorTerm
  double rho2 = 0.75;
  DampingStrategy strategy = DampingStrategy::ErrorTerm;
};

enum class GuessKind { Sample, TypicalMachine, Explicit };

/// Where descent starts. Sampling draws one full genome from the standard
/// initial ranges (seeded, reproducible); the typical-machine preset is a
/// fixed mid-range motor for deterministic runs; Explicit supplies a point.
struct InitialGuessPolicy {
  GuessKind kind = GuessKind::Sample;
  std::uint64_t seed = 0;
  CircuitParams explicit_params{};

  static InitialGuessPolicy sample(std::uint64_t seed) {
    return {GuessKind::Sample, seed, {}};
  }
  static InitialGuessPolicy typical_machine() {
    return {GuessKind::TypicalMachine, 0, {}};
  }
  static InitialGuessPolicy explicit_guess(const CircuitParams& params) {
    return {GuessKind::Explicit, 0, params};
  }
};

struct DescentConfig {
  int max_iterations = 30;
  double convergence_threshold = 1e-5;  // on the squared error
  double h_n = 1.0;                     // Newton step scale
  double h = 1e-6;                      // finite-difference step
  RestrictionConfig restrictions{};
  DampingConfig damping{};
  InitialGuessPolicy initial_guess{};
};

enum class FailureReason { SingularJacobian, NonFinite, MaxIterations };

struct SolveOutcome {
  CircuitParams params{};
  double squared_error = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::optional<FailureReason> failure;
};

/// Snapshot after one solver iteration (iteration 0 is the initial point).
/// x is the free-parameter vector; lambda is the damping value after the
/// iteration's update, 0 for plain Newton.
struct IterateRecord {
  int iteration = 0;
  Vec6 x{};
  double squared_error = 0;
  double lambda = 0;
};
using IterateObserver = std::function<void(const IterateRecord&)>;

/// Outcome of a solver core running on a bare residual function, before the
/// free vector is assembled back into circuit parameters.
struct CoreOutcome {
  Vec6 x{};
  double squared_error = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::optional<FailureReason> failure;
};

namespace detail {

inline void clamp_min(Vec6& x) {
  for (double& v : x) v = std::max(v, kMinParam);
}

inline bool all_finite(const Vec6& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Forward-difference Jacobian reusing the caller's f(x). nullopt when any
/// entry comes out non-finite.
template <class Fn>
std::optional<Mat6> residual_jacobian(Fn& fn, const Vec6& x, const Vec6& f0,
                                      double h) {
  Mat6 jac{};
  for (std::size_t c = 0; c < 6; ++c) {
    Vec6 xp = x;
    xp[c] += h;
    const Vec6 fc = fn(xp);
    for (std::size_t r = 0; r < 6; ++r) {
      jac[r][c] = (fc[r] - f0[r]) / h;
      if (!std::isfinite(jac[r][c])) return std::nullopt;
    }
  }
  return jac;
}

inline void track_best(CoreOutcome& out, const Vec6& x, double err) {
  if (err < out.squared_error) {
    out.x = x;
    out.squared_error = err;
  }
}

}  // namespace detail

/// Plain Newton iteration x <- x - h_n * J^-1 F on a six-residual map.
/// Iterates are clamped to the positive orthant; the best point seen is
/// what comes back, not necessarily the last.
template <class Fn>
CoreOutcome newton_core(Fn fn, Vec6 x, const DescentConfig& cfg,
                        const IterateObserver& observe = {}) {
  detail::clamp_min(x);
  Vec6 f = fn(x);
  double err = dot(f, f);
  CoreOutcome out;
  detail::track_best(out, x, err);
  if (observe) observe({0, x, err, 0.0});
  if (err < cfg.convergence_threshold) {
    out.converged = true;
    return out;
  }
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto jac = detail::residual_jacobian(fn, x, f, cfg.h);
    if (!jac) {
      out.failure = FailureReason::NonFinite;
      return out;
    }
    const auto step = solve_checked(*jac, f);
    if (!step) {
      out.failure = FailureReason::SingularJacobian;
      return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= cfg.h_n * (*step)[i];
    detail::clamp_min(x);
    if (!detail::all_finite(x)) {
      out.failure = FailureReason::NonFinite;
      return out;
    }
    f = fn(x);
    err = dot(f, f);
    detail::track_best(out, x, err);
    out.iterations = it;
    if (observe) observe({it, x, err, 0.0});
    if (err < cfg.convergence_threshold) {
      out.converged = true;
      return out;
    }
  }
  out.failure = FailureReason::MaxIterations;
  return out;
}

/// Levenberg-Marquardt: (J^T J + lambda diag(J^T J)) d = -J^T F. Steps that
/// raise the error are rolled back; the Jacobian is only recomputed after an
/// accepted move. Damping follows either the gain-ratio rule or the plain
/// error-term rule.
template <class Fn>
CoreOutcome lm_core(Fn fn, Vec6 x, const DescentConfig& cfg,
                    const IterateObserver& observe = {}) {
  detail::clamp_min(x);
  Vec6 f = fn(x);
  double err = dot(f, f);
  CoreOutcome out;
  detail::track_best(out, x, err);
  double lambda = cfg.damping.lambda0;
  if (observe) observe({0, x, err, lambda});
  if (err < cfg.convergence_threshold) {
    out.converged = true;
    return out;
  }
  std::optional<Mat6> jac;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (!jac) {
      jac = detail::residual_jacobian(fn, x, f, cfg.h);
      if (!jac) {
        out.failure = FailureReason::NonFinite;
        return out;
      }
    }
    const Mat6 normal = normal_matrix(*jac);
    const Vec6 grad = transpose_apply(*jac, f);
    Mat6 damped = normal;
    Vec6 rhs{};
    for (std::size_t i = 0; i < 6; ++i) {
      damped[i][i] += lambda * normal[i][i];
      rhs[i] = -grad[i];
    }
    const auto step = solve_checked(damped, rhs);
    if (!step) {
      out.failure = FailureReason::SingularJacobian;
      return out;
    }
    Vec6 xn = x;
    for (std::size_t i = 0; i < 6; ++i) xn[i] += (*step)[i];
    detail::clamp_min(xn);
    if (!detail::all_finite(xn)) {
      out.failure = FailureReason::NonFinite;
      return out;
    }
    const Vec6 f_new = fn(xn);
    const double err_new = dot(f_new, f_new);
    const bool improved = err_new < err;
    if (cfg.damping.strategy == DampingStrategy::GainRatio) {
      // Predicted reduction of the damped model: 1/2 d^T (lambda d - J^T F),
      // positive for any step the damped solve produced.
      const double predicted =
          0.5 * (lambda * dot(*step, *step) - dot(*step, grad));
      const double rho = (err - err_new) / predicted;
      if (rho < cfg.damping.rho1) {
        lambda *= cfg.damping.beta;
      } else if (rho > cfg.damping.rho2) {
        lambda /= cfg.damping.gamma;
      }
    } else {
      if (improved) {
        lambda /= cfg.damping.gamma;
      } else {
        lambda *= cfg.damping.beta;
      }
    }
    if (improved) {
      x = xn;
      f = f_new;
      err = err_new;
      jac.reset();
      detail::track_best(out, x, err);
    }
    out.iterations = it;
    if (observe) observe({it, x, err, lambda});
    if (err < cfg.convergence_threshold) {
      out.converged = true;
      return out;
    }
  }
  out.failure = FailureReason::MaxIterations;
  return out;
}

/// Damped Newton: x <- x - h_n * (J + lambda I)^-1 F. Moves unconditionally
/// like plain Newton (no rollback); lambda follows the error-term rule, and
/// a singular damped matrix raises lambda and retries, five retries per
/// iteration. With lambda0 = 0 the iterate sequence reduces to newton_core's.
template <class Fn>
CoreOutcome dnr_core(Fn fn, Vec6 x, const DescentConfig& cfg,
                     const IterateObserver& observe = {}) {
  detail::clamp_min(x);
  Vec6 f = fn(x);
  double err = dot(f, f);
  CoreOutcome out;
  detail::track_best(out, x, err);
  double lambda = cfg.damping.lambda0;
  if (observe) observe({0, x, err, lambda});
  if (err < cfg.convergence_threshold) {
    out.converged = true;
    return out;
  }
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto jac = detail::residual_jacobian(fn, x, f, cfg.h);
    if (!jac) {
      out.failure = FailureReason::NonFinite;
      return out;
    }
    std::optional<Vec6> step;
    for (int attempt = 0; attempt <= 5 && !step; ++attempt) {
      Mat6 damped = *jac;
      for (std::size_t i = 0; i < 6; ++i) damped[i][i] += lambda;
      step = solve_checked(damped, f);
      if (!step) lambda *= cfg.damping.beta;
    }
    if (!step) {
      out.failure = FailureReason::SingularJacobian;
      return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= cfg.h_n * (*step)[i];
    detail::clamp_min(x);
    if (!detail::all_finite(x)) {
      out.failure = FailureReason::NonFinite;
      return out;
    }
    f = fn(x);
    const double err_new = dot(f, f);
    if (err_new < err) {
      lambda /= cfg.damping.gamma;
    } else {
      lambda *= cfg.damping.beta;
    }
    err = err_new;
    detail::track_best(out, x, err);
    out.iterations = it;
    if (observe) observe({it, x, err, lambda});
    if (err < cfg.convergence_threshold) {
      out.converged = true;
      return out;
    }
  }
  out.failure = FailureReason::MaxIterations;
  return out;
}

namespace detail {

inline Vec6 initial_free(const DescentConfig& cfg, const ParameterSpace& space) {
  switch (cfg.initial_guess.kind) {
    case GuessKind::TypicalMachine:
      return {0.08, 2.5, 0.03, 0.15, 0.08, 30.0};
    case GuessKind::Explicit:
      return space.extract(cfg.initial_guess.explicit_params);
    case GuessKind::Sample:
    default: {
      Rng rng(cfg.initial_guess.seed);
      return space.extract(sample_params(rng));
    }
  }
}

inline auto residual_fn(const TargetVector& targets,
                        const ParameterSpace& space) {
  return [targets, space](const Vec6& x) {
    return residuals(space.assemble(x), targets).f;
  };
}

inline SolveOutcome to_outcome(const CoreOutcome& core,
                               const ParameterSpace& space) {
  return {space.assemble(core.x), core.squared_error, core.iterations,
          core.converged, core.failure};
}

}  // namespace detail

inline SolveOutcome solve_nr(const TargetVector& targets,
                             const DescentConfig& cfg,
                             const ParameterSpace& space,
                             const IterateObserver& observe = {}) {
  return detail::to_outcome(
      newton_core(detail::residual_fn(targets, space),
                  detail::initial_free(cfg, space), cfg, observe),
      space);
}

inline SolveOutcome solve_nr(const TargetVector& targets,
                             const DescentConfig& cfg) {
  return solve_nr(targets, cfg, ParameterSpace::restricted(cfg.restrictions));
}

inline SolveOutcome solve_lm(const TargetVector& targets,
                             const DescentConfig& cfg,
                             const ParameterSpace& space,
                             const IterateObserver& observe = {}) {
  return detail::to_outcome(
      lm_core(detail::residual_fn(targets, space),
              detail::initial_free(cfg, space), cfg, observe),
      space);
}

inline SolveOutcome solve_lm(const TargetVector& targets,
                             const DescentConfig& cfg) {
  return solve_lm(targets, cfg, ParameterSpace::restricted(cfg.restrictions));
}

inline SolveOutcome solve_dnr(const TargetVector& targets,
                              const DescentConfig& cfg,
                              const ParameterSpace& space,
                              const IterateObserver& observe = {}) {
  return detail::to_outcome(
      dnr_core(detail::residual_fn(targets, space),
               detail::initial_free(cfg, space), cfg, observe),
      space);
}

inline SolveOutcome solve_dnr(const TargetVector& targets,
                              const DescentConfig& cfg) {
  return solve_dnr(targets, cfg, ParameterSpace::restricted(cfg.restrictions));
}

enum class DescentAlgorithm { NR, LM, DNR };

inline SolveOutcome solve_descent(DescentAlgorithm algorithm,
                                  const TargetVector& targets,
                                  const DescentConfig& cfg,
                                  const ParameterSpace& space,
                                  const IterateObserver& observe = {}) {
  switch (algorithm) {
    case DescentAlgorithm::NR:
      return solve_nr(targets, cfg, space, observe);
    case DescentAlgorithm::LM:
      return solve_lm(targets, cfg, space, observe);
    case DescentAlgorithm::DNR:
    default:
      return solve_dnr(targets, cfg, space, observe);
  }
}

inline SolveOutcome solve_descent(DescentAlgorithm algorithm,
                                  const TargetVector& targets,
                                  const DescentConfig& cfg) {
  return solve_descent(algorithm, targets, cfg,
                       ParameterSpace::restricted(cfg.restrictions));
}

}  // namespace cagefit
