#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "singhom/mesh.hpp"

namespace singhom {

// The scalar factor g of F(x, s) = f(x) g(s) + l(x).
class ScalarMap {
 public:
  enum class Kind { power, oscillating, eigen_trunc, table };

  // s^-gamma
  static ScalarMap power(double gamma);
  // s^-gamma (2 + sin(1/s))
  static ScalarMap oscillating(double gamma);
  // lambda T_k(s)
  static ScalarMap eigen_trunc(double lambda, double k);
  // Piecewise linear interpolation of (s, g) samples, constant beyond the
  // ends. The user supplies the growth exponent gamma of the envelope.
  static ScalarMap table(std::vector<double> s, std::vector<double> g, double gamma);

  Kind kind() const { return kind_; }
  std::string name() const;
  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }
  double k() const { return k_; }
  const std::vector<double>& table_s() const { return ts_; }
  const std::vector<double>& table_g() const { return tg_; }

  // s >= 0; may return +infinity at s = 0.
  double operator()(double s) const;
  // g'(s) for s > 0 (one-sided where g has kinks).
  double derivative(double s) const;
  // c such that g(s) <= c (s^-gamma + 1) for all s > 0.
  double envelope_constant() const;
  // Known monotonicity constant: smallest lambda with g(s) - lambda s
  // nonincreasing, or nullopt when not known in closed form.
  std::optional<double> known_lambda_mono() const;

 private:
  Kind kind_ = Kind::power;
  double gamma_ = 1.0;
  double lambda_ = 0.0;
  double k_ = 0.0;
  std::vector<double> ts_;
  std::vector<double> tg_;
};

ScalarMap::Kind scalar_map_kind_from_string(const std::string& name);

// F(x, s) = f(x) g(s) + l(x) with growth envelope h(x) (s^-gamma + 1).
class Nonlinearity {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  // h defaults to f * envelope_constant(g) + l; lambda_mono defaults to the
  // closed-form value of g when f is nonnegative, else +infinity.
  Nonlinearity(ScalarMap g, FieldFunction f, FieldFunction l, std::optional<FieldFunction> h = std::nullopt,
               std::optional<double> lambda_mono = std::nullopt);

  static Nonlinearity zero(MeshPtr mesh);

  const ScalarMap& g() const { return g_; }
  const FieldFunction& f() const { return f_; }
  const FieldFunction& l() const { return l_; }
  const FieldFunction& h() const { return h_; }
  double gamma() const { return g_.gamma(); }
  double lambda_mono() const { return lambda_mono_; }
  std::size_t size() const { return f_.size(); }

  // F(x_i, s) for s >= 0. A zero f(x_i) switches the singular part off, so
  // F(x_i, 0) = l(x_i) there.
  double operator()(std::size_t node, double s) const;
  // min(F(x_i, max(s, 0)), n): always finite.
  double truncated(std::size_t node, double s, double n) const;
  // d/ds of truncated(node, s, n); zero where the cap is active or s <= 0.
  double truncated_derivative(std::size_t node, double s, double n) const;

  // Same nonlinearity with f scaled by a.
  Nonlinearity with_f_scaled(double a) const;
  Nonlinearity with_lambda_mono(double lambda) const;
  Nonlinearity rebind(MeshPtr mesh) const;

  // Checks 0 < gamma <= 1, f, l, h >= 0, the sampled envelope bound and, if
  // lambda_mono is finite, the sampled almost-monotonicity. Throws
  // std::invalid_argument naming the violated condition.
  void validate() const;

 private:
  ScalarMap g_;
  FieldFunction f_;
  FieldFunction l_;
  FieldFunction h_;
  double lambda_mono_ = kInfinity;
};

// Nodal values min(F(x, u^+), n).
FieldFunction truncated_rhs(const Nonlinearity& F, const FieldFunction& u, double n);

// Logarithmic grid with `count` points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

}  // namespace singhom
