#include "kpnp/momentum.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "kpnp/errors.hpp"

namespace kpnp {
namespace {

double parse_argument(const std::string& text, std::size_t open) {
  const std::size_t close = text.find(')', open);
  if (close == std::string::npos || close + 1 != text.size())
    throw ConfigError("schedule: malformed argument in '" + text + "'");
  const std::string arg = text.substr(open + 1, close - open - 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("schedule: bad number '" + arg + "' in '" + text + "'");
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

MomentumSchedule MomentumSchedule::parse(const std::string& text) {
  const std::size_t open = text.find('(');
  const std::string head = text.substr(0, open);
  if (head == "beck" && open == std::string::npos) return beck();
  if (head == "log1p" && open == std::string::npos) return log1p();
  if (head == "geometric" && open == std::string::npos) return geometric();
  if (head == "chambolle") {
    if (open == std::string::npos) return chambolle();
    const double a = parse_argument(text, open);
    if (!(a > 0.0)) throw ConfigError("schedule: chambolle parameter must be positive");
    return chambolle(a);
  }
  if (head == "constant" && open != std::string::npos) return constant(parse_argument(text, open));
  throw ConfigError("schedule: unknown schedule '" + text + "'");
}

std::string MomentumSchedule::name() const {
  switch (kind) {
    case ScheduleKind::beck: return "beck";
    case ScheduleKind::chambolle: return "chambolle(" + format_number(param) + ")";
    case ScheduleKind::log1p: return "log1p";
    case ScheduleKind::geometric: return "geometric";
    case ScheduleKind::constant: return "constant(" + format_number(param) + ")";
  }
  return "?";
}

double MomentumSequence::next() {
  ++k_;
  const double k = static_cast<double>(k_);
  switch (schedule_.kind) {
    case ScheduleKind::beck: {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_ * t_));
      const double a = (t_ - 1.0) / t_next;
      t_ = t_next;
      return a;
    }
    case ScheduleKind::chambolle: return (k - 1.0) / (k + schedule_.param);
    case ScheduleKind::log1p: return 1.0 - 1.0 / std::log(k + 1.0);
    case ScheduleKind::geometric: return 1.0 - std::pow(0.5, k);
    case ScheduleKind::constant: return schedule_.param;
  }
  return 0.0;
}

double alpha(const MomentumSchedule& schedule, int k) {
  if (k < 1) throw ParameterError("alpha: k must be >= 1");
  MomentumSequence seq(schedule);
  double a = 0.0;
  for (int i = 0; i < k; ++i) a = seq.next();
  return a;
}

}  // namespace kpnp
