#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "singhom/perforation.hpp"

namespace singhom {

std::string to_string(HoleStrategy s) { return s == HoleStrategy::resolved ? "resolved" : "collapsed"; }

HoleStrategy hole_strategy_from_string(const std::string& s) {
  if (s == "resolved") return HoleStrategy::resolved;
  if (s == "collapsed") return HoleStrategy::collapsed;
  throw std::invalid_argument("unknown hole strategy '" + s + "' (expected resolved or collapsed)");
}

double radius_law(double epsilon, int dim, double C0) {
  if (dim < 2) throw std::invalid_argument("radius_law: dim must be >= 2");
  if (!(epsilon > 0.0) || !(C0 > 0.0)) throw std::invalid_argument("radius_law: need epsilon > 0 and C0 > 0");
  if (dim == 2) return std::exp(-C0 / (epsilon * epsilon));
  return C0 * std::pow(epsilon, dim / (dim - 2.0));
}

double prescribed_mu_radius(double epsilon, double C0) {
  if (!(epsilon > 0.0) || !(C0 > 0.0)) throw std::invalid_argument("prescribed_mu_radius: need epsilon > 0 and C0 > 0");
  return epsilon * std::exp(-C0 / (epsilon * epsilon));
}

double c0_for_mu(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("c0_for_mu: mu must be positive");
  return std::numbers::pi / (2.0 * mu);
}

StrangeTerm strange_term_formula(int dim, double C0) {
  if (dim < 2) throw std::invalid_argument("strange_term_formula: dim must be >= 2");
  if (!(C0 > 0.0)) throw std::invalid_argument("strange_term_formula: C0 must be positive");
  StrangeTerm t;
  t.provenance = StrangeTerm::Provenance::formula;
  if (dim == 2) {
    t.mu = 2.0 * std::numbers::pi / 4.0 / C0;
  } else {
    const double N = dim;
    const double sphere = 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);  // |S^{N-1}|
    t.mu = sphere * (N - 2.0) / std::pow(2.0, N) * std::pow(C0, N - 2.0);
  }
  return t;
}

PerforationSpec PerforationSpec::from_c0(double epsilon, int dim, double C0, HoleStrategy strategy) {
  PerforationSpec s;
  s.epsilon = epsilon;
  s.dim = dim;
  s.C0 = C0;
  s.radius = radius_law(epsilon, dim, C0);
  s.strategy = strategy;
  return s;
}

PerforationSpec PerforationSpec::from_mu(double epsilon, double mu, HoleStrategy strategy) {
  PerforationSpec s;
  s.epsilon = epsilon;
  s.dim = 2;
  s.C0 = c0_for_mu(mu);
  s.target_mu = mu;
  s.radius = prescribed_mu_radius(epsilon, s.C0);
  s.strategy = strategy;
  return s;
}

void PerforationSpec::validate() const {
  std::ostringstream msg;
  if (dim < 2) {
    msg << "perforation: dim = " << dim << " but holes need dim >= 2";
  } else if (!(epsilon > 0.0)) {
    msg << "perforation: epsilon must be positive";
  } else if (!(C0 > 0.0)) {
    msg << "perforation: C0 must be positive";
  } else if (!(radius > 0.0) || !std::isfinite(radius)) {
    msg << "perforation: radius must be positive and finite (r = " << radius << ")";
  } else if (!(radius < epsilon)) {
    msg << "perforation: r = " << radius << " must be < epsilon = " << epsilon;
  } else if (target_mu) {
    if (dim != 2)
      msg << "perforation: a prescribed mu is only supported for dim 2";
    else if (!(*target_mu > 0.0))
      msg << "perforation: target mu must be positive";
    else if (std::abs(C0 - c0_for_mu(*target_mu)) > 1e-12 * C0)
      msg << "perforation: C0 = " << C0 << " inconsistent with target mu = " << *target_mu << " (expected pi/(2 mu))";
  }
  const auto text = msg.str();
  if (!text.empty()) throw std::invalid_argument(text);
}

}  // namespace singhom
