#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "cagefit/circuit.hpp"
#include "cagefit/errors.hpp"
#include "cagefit/linalg.hpp"

namespace cagefit {

/// Manufacturer performance data as printed on the plate. SI units; the
/// per-unit conversion lives in to_targets.
struct NameplateData {
  double u_n = 0;     // nominal line voltage, V
  double freq = 0;    // supply frequency, Hz
  double n_fl = 0;    // rated speed, rpm
  double i_s_fl = 0;  // rated stator current, A
  double p_m_fl = 0;  // rated mechanical power, W
  double pf_fl = 0;   // full-load power factor
  double eff_fl = 0;  // full-load efficiency
  double t_b_ratio = 0;
  double t_lr_ratio = 0;
  double i_lr_ratio = 0;
  std::optional<double> t_n;  // rated torque, N*m; redundant and ignored
  std::optional<int> poles;   // inferred from speed/frequency when absent
};

/// The six fitted magnitudes in per unit, plus the full-load slip they are
/// evaluated at. q_fl may be exactly 0 at unity power factor; everything
/// else stays positive for a valid plate.
struct TargetVector {
  double p_m_fl = 0;
  double q_fl = 0;
  double t_b = 0;
  double t_lr = 0;
  double i_lr = 0;
  double eff_fl = 0;
  double s_f = 0;
  // |1 - p_in_pu/pf_fl|: how far the plate's current/pf/eff triple is from
  // internally consistent. Diagnostic only; never fed to the solvers.
  double consistency = 0;

  bool operator==(const TargetVector&) const = default;
};

struct ResidualVector {
  std::array<double, 6> f{};
  double squared_error = 0;
  // Bit i set when f[i] came out non-finite and was replaced by 1.0.
  unsigned sentinel_mask = 0;

  bool any_sentinel() const { return sentinel_mask != 0; }
};

/// Even pole count whose synchronous speed sits immediately above the rated
/// speed. Equality (rated speed on a synchronous grid point) is rejected
/// later by the n_fl < n_sync check.
inline int infer_poles(double freq, double n_fl) {
  return 2 * static_cast<int>(std::floor(60.0 * freq / n_fl));
}

inline double synchronous_speed(double freq, int poles) {
  return 120.0 * freq / poles;
}

/// Converts a nameplate to per-unit targets.
///
/// Bases: S_base = sqrt(3)*u_n*i_s_fl and V_base = u_n, which pins rated
/// current at exactly 1 pu so the locked-rotor current target is the plate
/// ratio itself. Torques are in synchronous watts, matching the circuit's
/// convention: t_n = p_m_fl_pu/(1 - s_f).
inline TargetVector to_targets(const NameplateData& plate) {
  const auto fail = [](const std::string& why) {
    throw ValidationError("nameplate: " + why);
  };
  if (!(plate.u_n > 0) || !(plate.freq > 0) || !(plate.n_fl > 0) ||
      !(plate.i_s_fl > 0) || !(plate.p_m_fl > 0)) {
    fail("voltage, frequency, speed, current and power must be positive");
  }
  if (!(plate.pf_fl > 0) || plate.pf_fl > 1.0) fail("power factor outside (0, 1]");
  if (!(plate.eff_fl > 0) || plate.eff_fl > 1.0) fail("efficiency outside (0, 1]");
  if (!(plate.t_b_ratio > 0) || !(plate.t_lr_ratio > 0) ||
      !(plate.i_lr_ratio > 0)) {
    fail("torque and current ratios must be positive");
  }
  const int poles =
      plate.poles ? *plate.poles : infer_poles(plate.freq, plate.n_fl);
  if (poles < 2) fail("pole count below 2");
  const double n_sync = synchronous_speed(plate.freq, poles);
  if (plate.n_fl >= n_sync) fail("rated speed at or above synchronous speed");

  TargetVector t;
  t.s_f = (n_sync - plate.n_fl) / n_sync;
  const double s_base = std::sqrt(3.0) * plate.u_n * plate.i_s_fl;
  t.p_m_fl = plate.p_m_fl / s_base;
  const double p_in = t.p_m_fl / plate.eff_fl;
  t.q_fl = p_in * std::tan(std::acos(plate.pf_fl));
  const double t_n = t.p_m_fl / (1.0 - t.s_f);
  t.t_b = plate.t_b_ratio * t_n;
  t.t_lr = plate.t_lr_ratio * t_n;
  t.i_lr = plate.i_lr_ratio;
  t.eff_fl = plate.eff_fl;
  t.consistency = std::abs(1.0 - p_in / plate.pf_fl);
  return t;
}

/// Runs the circuit forward and reads the six target magnitudes off the
/// model itself. Targets built this way zero the residuals at `params`.
inline TargetVector targets_from_model(const CircuitParams& params,
                                       double s_f) {
  const OperatingPoint fl = operating_point(params, s_f);
  const OperatingPoint lr = operating_point(params, 1.0);
  const BreakdownPoint bp = breakdown_torque(params);
  TargetVector t;
  t.p_m_fl = fl.p_mech;
  t.q_fl = fl.q_in;
  t.t_b = bp.t_b;
  t.t_lr = lr.torque;
  t.i_lr = lr.i_stator;
  t.eff_fl = fl.efficiency;
  t.s_f = s_f;
  t.consistency = 0;
  return t;
}

/// Six target-normalized residuals: (target - model)/target for full-load
/// mechanical power, full-load reactive power, breakdown torque,
/// locked-rotor torque, locked-rotor current and full-load efficiency.
/// A non-finite entry (zero target, degenerate model value) is replaced by
/// 1.0 and flagged, which caps the squared error of a worthless model at 6.
inline ResidualVector residuals(const CircuitParams& params,
                                const TargetVector& targets) {
  const OperatingPoint fl = operating_point(params, targets.s_f);
  const OperatingPoint lr = operating_point(params, 1.0);
  const BreakdownPoint bp = breakdown_torque(params);

  ResidualVector r;
  r.f[0] = (targets.p_m_fl - fl.p_mech) / targets.p_m_fl;
  r.f[1] = (targets.q_fl - fl.q_in) / targets.q_fl;
  r.f[2] = (targets.t_b - bp.t_b) / targets.t_b;
  r.f[3] = (targets.t_lr - lr.torque) / targets.t_lr;
  r.f[4] = (targets.i_lr - lr.i_stator) / targets.i_lr;
  r.f[5] = (targets.eff_fl - fl.efficiency) / targets.eff_fl;
  for (std::size_t i = 0; i < r.f.size(); ++i) {
    if (!std::isfinite(r.f[i])) {
      r.f[i] = 1.0;
      r.sentinel_mask |= 1u << i;
    }
    r.squared_error += r.f[i] * r.f[i];
  }
  return r;
}

/// Indices (in CircuitParams::as_array order) of the six parameters the
/// descent solvers move directly; r_s and x_r2 are recovered from the
/// linear restrictions.
inline constexpr std::array<std::size_t, 6> kFreeMask{1, 2, 3, 4, 5, 7};

/// Forward-difference Jacobian of the residuals over the six free
/// parameters. `rebind` runs on every perturbed raw parameter array before
/// evaluation so dependent entries track their drivers; pass a no-op to
/// differentiate the masked parameters alone. `f0` is the residual at the
/// unperturbed (rebound) point, reusable from the caller's own evaluation.
template <class Rebind>
Mat6 jacobian(const CircuitParams& params, const TargetVector& targets,
              const std::array<std::size_t, 6>& free_mask, double h,
              Rebind&& rebind, const std::array<double, 6>& f0) {
  Mat6 jac{};
  const std::array<double, 8> base = params.as_array();
  for (std::size_t j = 0; j < 6; ++j) {
    std::array<double, 8> bumped = base;
    bumped[free_mask[j]] += h;
    rebind(bumped);
    const ResidualVector fj =
        residuals(CircuitParams::from_array(bumped), targets);
    for (std::size_t i = 0; i < 6; ++i) {
      jac[i][j] = (fj.f[i] - f0[i]) / h;
      if (!std::isfinite(jac[i][j])) {
        throw NonFiniteError("jacobian entry is not finite");
      }
    }
  }
  return jac;
}

template <class Rebind>
Mat6 jacobian(const CircuitParams& params, const TargetVector& targets,
              const std::array<std::size_t, 6>& free_mask, double h,
              Rebind&& rebind) {
  std::array<double, 8> base = params.as_array();
  rebind(base);
  const ResidualVector f0 =
      residuals(CircuitParams::from_array(base), targets);
  return jacobian(CircuitParams::from_array(base), targets, free_mask, h,
                  rebind, f0.f);
}

inline Mat6 jacobian(const CircuitParams& params, const TargetVector& targets,
                     const std::array<std::size_t, 6>& free_mask = kFreeMask,
                     double h = 1e-6) {
  return jacobian(params, targets, free_mask, h,
                  [](std::array<double, 8>&) {});
}

}  // namespace cagefit
