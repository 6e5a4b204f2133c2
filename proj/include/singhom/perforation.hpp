#pragma once

#include <optional>
#include <string>

namespace singhom {

enum class HoleStrategy { resolved, collapsed };

std::string to_string(HoleStrategy s);
HoleStrategy hole_strategy_from_string(const std::string& s);

// Hole radius of the critical scaling family: C0 * eps^(N/(N-2)) for N >= 3,
// exp(-C0 / eps^2) for N = 2.
double radius_law(double epsilon, int dim, double C0);

// Two-dimensional radius with the cell-size prefactor, eps * exp(-C0 / eps^2).
// The logarithmic capacity of the hole relative to its cell is then exactly
// C0 / eps^2, so the per-cell capacity density equals pi / (2 C0) at every eps.
double prescribed_mu_radius(double epsilon, double C0);

// C0 = pi / (2 mu) in two dimensions.
double c0_for_mu(double mu);

struct StrangeTerm {
  enum class Provenance { formula, discrete_capacity };
  double mu = 0.0;
  Provenance provenance = Provenance::formula;
};

// mu = S_{N-1} (N-2) / 2^N * C0^(N-2) for N = 3, mu = (2 pi / 4) / C0 for N = 2.
StrangeTerm strange_term_formula(int dim, double C0);

struct PerforationSpec {
  double epsilon = 0.0;
  int dim = 2;
  double C0 = 0.0;
  std::optional<double> target_mu;
  double radius = 0.0;
  HoleStrategy strategy = HoleStrategy::resolved;

  // Radius from the critical law.
  static PerforationSpec from_c0(double epsilon, int dim, double C0,
                                 HoleStrategy strategy = HoleStrategy::resolved);
  // Prescribed strange term: C0 = pi / (2 mu) and r = prescribed_mu_radius.
  static PerforationSpec from_mu(double epsilon, double mu,
                                 HoleStrategy strategy = HoleStrategy::resolved);

  // Throws std::invalid_argument on dim < 2, r >= eps, or an inconsistent C0.
  void validate() const;
};

}  // namespace singhom
