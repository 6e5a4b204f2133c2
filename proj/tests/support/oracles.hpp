#pragma once

// Independent reference values used by the unit and acceptance tests. Nothing
// here calls into the library.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// -u'' = u^-gamma on (0, 1), u(0) = u(1) = 0. The solution is symmetric with
// peak m at x = 1/2, and the first integral u'^2 / 2 + G(u) = G(m) with
// G' = s^-gamma gives the distance from the peak to the level u as
// int_u^m ds / sqrt(2 (G(m) - G(s))). The peak is found by bisection on the
// half-width 1/2, the profile by bisection on the distance.
class SingularProfile {
 public:
  explicit SingularProfile(double gamma) : gamma_(gamma) {
    double lo = 1e-6, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (distance(0.0, mid) < 0.5 ? lo : hi) = mid;
    }
    peak_ = 0.5 * (lo + hi);
  }

  double peak() const { return peak_; }

  double operator()(double x) const {
    const double d = 0.5 - std::min(x, 1.0 - x);
    if (d <= 0.0) return peak_;
    if (d >= 0.5) return 0.0;
    double lo = 0.0, hi = peak_;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (distance(mid, peak_) > d ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  double G(double s) const { return gamma_ == 1.0 ? std::log(s) : std::pow(s, 1.0 - gamma_) / (1.0 - gamma_); }

  double distance(double u, double m) const {
    boost::math::quadrature::tanh_sinh<double> q;
    auto f = [&](double s) {
      const double d = 2.0 * (G(m) - G(s));
      return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    };
    return q.integrate(f, u, m);
  }

  double gamma_;
  double peak_ = 0.0;
};

// Lattice points (i h, j h), 0 <= i, j < n, within distance r of (cx, cy).
inline std::size_t lattice_points_in_disk(int n, double h, double cx, double cy, double r) {
  std::size_t count = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double dx = i * h - cx, dy = j * h - cy;
      if (dx * dx + dy * dy <= r * r) ++count;
    }
  return count;
}

// Dense Gaussian elimination, used to cross-check CG on small systems.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

// -Lap u + mu u = 1 on the unit square with u = 0 on the boundary, by its
// double sine series over odd modes.
inline double absorption_square(double mu, double x, double y, int modes = 2000) {
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int j = 1; j < 2 * modes; j += 2)
    for (int k = 1; k < 2 * modes; k += 2)
      s += 16.0 / (pi * pi * j * k) * std::sin(j * pi * x) * std::sin(k * pi * y) / (pi * pi * (j * j + k * k) + mu);
  return s;
}

// Annulus capacity in the plane.
inline double annulus_capacity(double R, double r) { return 2.0 * std::numbers::pi / std::log(R / r); }

}  // namespace oracle
