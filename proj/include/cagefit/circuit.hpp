#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string_view>
#include <utility>

#include "cagefit/errors.hpp"

namespace cagefit {

using Complex = std::complex<double>;

/// The eight slip-invariant parameters of the double-cage equivalent
/// circuit, all in per unit. Branch 1 is the inner (running) cage,
/// branch 2 the outer (starting) cage; r_c is the core-loss shunt.
struct CircuitParams {
  double r_s = 0;   // stator resistance
  double x_s = 0;   // stator leakage reactance
  double x_m = 0;   // magnetizing reactance
  double r_r1 = 0;  // inner-cage resistance
  double x_r1 = 0;  // inner-cage leakage reactance
  double r_r2 = 0;  // outer-cage resistance
  double x_r2 = 0;  // outer-cage leakage reactance
  double r_c = 0;   // core-loss shunt resistance

  static constexpr std::size_t kCount = 8;
  static constexpr std::array<std::string_view, kCount> kNames = {
      "r_s", "x_s", "x_m", "r_r1", "x_r1", "r_r2", "x_r2", "r_c"};

  std::array<double, kCount> as_array() const {
    return {r_s, x_s, x_m, r_r1, x_r1, r_r2, x_r2, r_c};
  }
  static CircuitParams from_array(const std::array<double, kCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }

  bool all_positive() const {
    for (double v : as_array())
      if (!(v > 0)) return false;
    return true;
  }

  /// Deep-bar ordering: the outer cage has the higher resistance and the
  /// lower leakage reactance. Queryable, never enforced by the solvers.
  bool feasible() const { return x_r1 > x_r2 && r_r2 > r_r1; }

  friend bool operator==(const CircuitParams&, const CircuitParams&) = default;
};

/// Steady-state electrical quantities at one slip, voltage 1.0 pu unless
/// stated otherwise. Torque uses the synchronous-watt convention
/// (torque == airgap power), so torque * (1 - s) == p_mech bit-exactly.
struct OperatingPoint {
  double slip = 0;
  Complex z_in{};
  Complex i_s{};        // stator current phasor
  double i_stator = 0;  // its magnitude
  double p_in = 0;
  double q_in = 0;
  double p_airgap = 0;
  double rotor_cu1 = 0;  // copper loss, inner cage
  double rotor_cu2 = 0;  // copper loss, outer cage
  double stator_cu = 0;
  double core_loss = 0;
  double torque = 0;
  double p_mech = 0;
  double efficiency = 0;
};

struct BreakdownPoint {
  double s_max = 0;
  double t_b = 0;
  /// Set when the bracketing sweep found two separated local maxima whose
  /// refined torques differ by more than 1e-6 pu. The global maximum is
  /// returned regardless.
  bool multimodal_warning = false;
};

namespace detail {

inline void check_slip(double slip) {
  if (!(slip > 0.0) || slip > 1.0)
    throw DomainError("slip must lie in (0, 1]");
}

struct Branches {
  Complex z_s, z_r1, z_r2;
  double x_m, r_c;
};

inline Branches branches(const CircuitParams& p, double slip) {
  return {Complex{p.r_s, p.x_s}, Complex{p.r_r1 / slip, p.x_r1},
          Complex{p.r_r2 / slip, p.x_r2}, p.x_m, p.r_c};
}

/// Shunt node impedance: core, magnetizing and both cages in parallel,
/// composed as an admittance sum so no intermediate product can overflow.
inline Complex shunt_impedance(const Branches& b) {
  const Complex y = 1.0 / Complex{b.r_c, 0.0} + 1.0 / Complex{0.0, b.x_m} +
                    1.0 / b.z_r1 + 1.0 / b.z_r2;
  return 1.0 / y;
}

}  // namespace detail

inline Complex input_impedance(const CircuitParams& params, double slip) {
  detail::check_slip(slip);
  const auto b = detail::branches(params, slip);
  return b.z_s + detail::shunt_impedance(b);
}

inline OperatingPoint operating_point(const CircuitParams& params, double slip,
                                      double voltage = 1.0) {
  detail::check_slip(slip);
  const auto b = detail::branches(params, slip);
  const Complex z_sh = detail::shunt_impedance(b);
  const Complex z_in = b.z_s + z_sh;
  if (std::abs(z_in) < 1e-12)
    throw DegenerateError("input impedance below 1e-12 pu");

  OperatingPoint op;
  op.slip = slip;
  op.z_in = z_in;
  const Complex v{voltage, 0.0};
  op.i_s = v / z_in;
  op.i_stator = std::abs(op.i_s);
  const Complex s_in = v * std::conj(op.i_s);
  op.p_in = s_in.real();
  op.q_in = s_in.imag();

  const Complex v_m = op.i_s * z_sh;
  op.stator_cu = std::norm(op.i_s) * params.r_s;
  op.core_loss = std::norm(v_m) / params.r_c;
  op.rotor_cu1 = std::norm(v_m / b.z_r1) * params.r_r1;
  op.rotor_cu2 = std::norm(v_m / b.z_r2) * params.r_r2;
  op.p_airgap = op.rotor_cu1 / slip + op.rotor_cu2 / slip;
  op.torque = op.p_airgap;
  op.p_mech = op.p_airgap * (1.0 - slip);
  op.efficiency = op.p_mech / op.p_in;  // IEEE quiet NaN when 0/0
  return op;
}

namespace detail {

// Mirrors operating_point's expression order exactly so breakdown torques
// and operating-point torques are bit-comparable at equal slip.
inline double torque_at(const CircuitParams& p, double slip) {
  const auto b = branches(p, slip);
  const Complex z_sh = shunt_impedance(b);
  const Complex i_s = Complex{1.0, 0.0} / (b.z_s + z_sh);
  const Complex v_m = i_s * z_sh;
  return std::norm(v_m / b.z_r1) * p.r_r1 / slip +
         std::norm(v_m / b.z_r2) * p.r_r2 / slip;
}

/// Golden-section maximization of fn on [lo, hi] to |hi - lo| < tol.
/// Returns the best point actually evaluated, so the reported maximum is
/// never below any probe value.
template <class Fn>
std::pair<double, double> golden_max(Fn&& fn, double lo, double hi,
                                     double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  std::pair<double, double> best =
      f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
      if (f2 > best.second) best = {x2, f2};
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
      if (f1 > best.second) best = {x1, f1};
    }
  }
  return best;
}

}  // namespace detail

/// Locates the torque maximum: 200-point log-spaced sweep of s in [1e-4, 1]
/// to bracket, then golden-section refinement to |interval| < 1e-9.
/// Double-cage curves can carry two humps; all grid-local maxima are
/// refined and the best one returned.
inline BreakdownPoint breakdown_torque(const CircuitParams& params) {
  constexpr int kSweep = 200;
  std::array<double, kSweep> s{}, t{};
  for (int i = 0; i < kSweep; ++i) {
    s[i] = std::pow(10.0, -4.0 + 4.0 * i / (kSweep - 1));
    t[i] = detail::torque_at(params, s[i]);
  }

  const auto torque = [&](double slip) {
    return detail::torque_at(params, slip);
  };
  const auto refine = [&](int k) {
    const double lo = s[std::max(k - 1, 0)];
    const double hi = s[std::min(k + 1, kSweep - 1)];
    auto [sm, tm] = detail::golden_max(torque, lo, hi, 1e-9);
    // The grid point that seeded the bracket also counts as a probe.
    if (t[k] > tm) {
      sm = s[k];
      tm = t[k];
    }
    return std::pair{sm, tm};
  };

  BreakdownPoint best{0, -1, false};
  double second = -1;
  int maxima = 0;
  for (int i = 0; i < kSweep; ++i) {
    const bool up = i == 0 || t[i] > t[i - 1];
    const bool down = i == kSweep - 1 || t[i] > t[i + 1];
    if (!(up && down)) continue;
    ++maxima;
    const auto [sm, tm] = refine(i);
    if (tm > best.t_b) {
      second = best.t_b;
      best.s_max = sm;
      best.t_b = tm;
    } else if (tm > second) {
      second = tm;
    }
  }
  best.multimodal_warning = maxima > 1 && best.t_b - second > 1e-6;
  return best;
}

}  // namespace cagefit
