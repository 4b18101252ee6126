#pragma once

#include <cmath>
#include <stdexcept>

namespace owcsim {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kHalfPi = 0.5 * kPi;

/// Canonicalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) {
    throw std::invalid_argument("wrap_angle: non-finite input");
  }
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) {
    r += kTwoPi;
  }
  return r;
}

/// Wrap-aware difference a - b, canonicalized to (-pi, pi].
inline double angle_diff(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("angle_diff: non-finite input");
  }
  return wrap_angle(a - b);
}

inline double clamp(double v, double lo, double hi) {
  return std::max(lo, std::min(hi, v));
}

}  // namespace owcsim
