#pragma once

#include <algorithm>

namespace singhom {

// Truncation at height k: max(-k, min(s, k)).
inline double tk(double s, double k) { return std::max(-k, std::min(s, k)); }

// Remainder above height k: s - T_k(s).
inline double gk(double s, double k) { return s - tk(s, k); }

// Piecewise linear cutoff: 1 on [0, delta], 2 - s/delta on [delta, 2 delta], 0 beyond.
inline double z_delta(double s, double delta) {
  if (s <= delta) return 1.0;
  if (s >= 2.0 * delta) return 0.0;
  return 2.0 - s / delta;
}

// Antiderivative of z_delta from 0; constant 3 delta / 2 beyond 2 delta.
inline double y_delta(double s, double delta) {
  if (s <= delta) return s;
  if (s >= 2.0 * delta) return 1.5 * delta;
  return delta + 2.0 * (s - delta) - (s * s - delta * delta) / (2.0 * delta);
}

}  // namespace singhom
