#pragma once

#include <string>

namespace kpnp {

enum class ScheduleKind { beck, chambolle, log1p, geometric, constant };

/// Extrapolation coefficients alpha_k, k >= 1.
///
///   beck        (t_k - 1) / t_{k+1},  t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
///   chambolle   (k - 1) / (k + a), default a = 3
///   log1p       1 - 1 / ln(k + 1)      (negative for k = 1)
///   geometric   1 - 0.5^k
///   constant    c; c = 0 gives the non-accelerated iteration
struct MomentumSchedule {
  ScheduleKind kind = ScheduleKind::beck;
  double param = 0.0;

  static MomentumSchedule beck() { return {ScheduleKind::beck, 0.0}; }
  static MomentumSchedule chambolle(double a = 3.0) { return {ScheduleKind::chambolle, a}; }
  static MomentumSchedule log1p() { return {ScheduleKind::log1p, 0.0}; }
  static MomentumSchedule geometric() { return {ScheduleKind::geometric, 0.0}; }
  static MomentumSchedule constant(double c) { return {ScheduleKind::constant, c}; }

  /// Parses "beck", "chambolle", "chambolle(3)", "log1p", "geometric",
  /// "constant(0)". Throws ConfigError.
  static MomentumSchedule parse(const std::string& text);

  /// Canonical text form, accepted by parse(); also used in file names.
  std::string name() const;
};

/// alpha_k for a single k >= 1. O(k) for beck; solvers use MomentumSequence.
double alpha(const MomentumSchedule& schedule, int k);

/// Stateful alpha_1, alpha_2, ... generator.
class MomentumSequence {
 public:
  explicit MomentumSequence(MomentumSchedule schedule) : schedule_(schedule) {}
  /// Returns alpha_k and advances k.
  double next();
  int k() const noexcept { return k_; }

 private:
  MomentumSchedule schedule_;
  int k_ = 0;
  double t_ = 1.0;  // t_k for beck
};

}  // namespace kpnp
