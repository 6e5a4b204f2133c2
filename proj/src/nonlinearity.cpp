#include "singhom/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "singhom/cutoff.hpp"

namespace singhom {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " violates 0 < gamma <= 1";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ScalarMap ScalarMap::power(double gamma) {
  check_gamma(gamma);
  ScalarMap g;
  g.kind_ = Kind::power;
  g.gamma_ = gamma;
  return g;
}

ScalarMap ScalarMap::oscillating(double gamma) {
  check_gamma(gamma);
  ScalarMap g;
  g.kind_ = Kind::oscillating;
  g.gamma_ = gamma;
  return g;
}

ScalarMap ScalarMap::eigen_trunc(double lambda, double k) {
  if (!(lambda >= 0.0) || !(k > 0.0)) throw std::invalid_argument("eigen_trunc: need lambda >= 0 and k > 0");
  ScalarMap g;
  g.kind_ = Kind::eigen_trunc;
  g.gamma_ = 1.0;
  g.lambda_ = lambda;
  g.k_ = k;
  return g;
}

ScalarMap ScalarMap::table(std::vector<double> s, std::vector<double> gv, double gamma) {
  check_gamma(gamma);
  if (s.size() != gv.size() || s.size() < 2) throw std::invalid_argument("table: need >= 2 matching (s, g) samples");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) throw std::invalid_argument("table: s samples must be positive");
    if (i > 0 && !(s[i] > s[i - 1])) throw std::invalid_argument("table: s samples must be increasing");
    if (!(gv[i] >= 0.0) || !std::isfinite(gv[i])) throw std::invalid_argument("table: g samples must be finite and >= 0");
  }
  ScalarMap g;
  g.kind_ = Kind::table;
  g.gamma_ = gamma;
  g.ts_ = std::move(s);
  g.tg_ = std::move(gv);
  return g;
}

ScalarMap::Kind scalar_map_kind_from_string(const std::string& name) {
  if (name == "power") return ScalarMap::Kind::power;
  if (name == "oscillating") return ScalarMap::Kind::oscillating;
  if (name == "eigen_trunc") return ScalarMap::Kind::eigen_trunc;
  if (name == "table") return ScalarMap::Kind::table;
  throw std::invalid_argument("unknown g '" + name + "' (expected power, oscillating, eigen_trunc or table)");
}

std::string ScalarMap::name() const {
  switch (kind_) {
    case Kind::power:
      return "power";
    case Kind::oscillating:
      return "oscillating";
    case Kind::eigen_trunc:
      return "eigen_trunc";
    case Kind::table:
      return "table";
  }
  return "unknown";
}

double ScalarMap::operator()(double s) const {
  switch (kind_) {
    case Kind::power:
      return s <= 0.0 ? std::numeric_limits<double>::infinity() : std::pow(s, -gamma_);
    case Kind::oscillating:
      return s <= 0.0 ? std::numeric_limits<double>::infinity() : std::pow(s, -gamma_) * (2.0 + std::sin(1.0 / s));
    case Kind::eigen_trunc:
      return lambda_ * tk(s, k_);
    case Kind::table: {
      if (s <= ts_.front()) return tg_.front();
      if (s >= ts_.back()) return tg_.back();
      const auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - ts_.begin());
      const double w = (s - ts_[i - 1]) / (ts_[i] - ts_[i - 1]);
      return (1.0 - w) * tg_[i - 1] + w * tg_[i];
    }
  }
  return 0.0;
}

double ScalarMap::derivative(double s) const {
  if (!(s > 0.0)) return 0.0;
  switch (kind_) {
    case Kind::power:
      return -gamma_ * std::pow(s, -gamma_ - 1.0);
    case Kind::oscillating:
      return -gamma_ * std::pow(s, -gamma_ - 1.0) * (2.0 + std::sin(1.0 / s)) -
             std::pow(s, -gamma_ - 2.0) * std::cos(1.0 / s);
    case Kind::eigen_trunc:
      return s < k_ ? lambda_ : 0.0;
    case Kind::table: {
      if (s <= ts_.front() || s >= ts_.back()) return 0.0;
      const auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - ts_.begin());
      return (tg_[i] - tg_[i - 1]) / (ts_[i] - ts_[i - 1]);
    }
  }
  return 0.0;
}

double ScalarMap::envelope_constant() const {
  switch (kind_) {
    case Kind::power:
      return 1.0;
    case Kind::oscillating:
      return 3.0;
    case Kind::eigen_trunc:
      return lambda_ * k_;
    case Kind::table:
      // Piecewise linear with constant ends: bounded by its largest sample.
      return *std::max_element(tg_.begin(), tg_.end());
  }
  return 0.0;
}

std::optional<double> ScalarMap::known_lambda_mono() const {
  switch (kind_) {
    case Kind::power:
      return 0.0;
    case Kind::eigen_trunc:
      return lambda_;
    case Kind::table: {
      double lam = 0.0;
      for (std::size_t i = 1; i < ts_.size(); ++i)
        lam = std::max(lam, (tg_[i] - tg_[i - 1]) / (ts_[i] - ts_[i - 1]));
      return lam;
    }
    case Kind::oscillating:
      return std::nullopt;
  }
  return std::nullopt;
}

Nonlinearity::Nonlinearity(ScalarMap g, FieldFunction f, FieldFunction l, std::optional<FieldFunction> h,
                           std::optional<double> lambda_mono)
    : g_(std::move(g)), f_(std::move(f)), l_(std::move(l)) {
  if (f_.size() != l_.size()) throw std::invalid_argument("Nonlinearity: f and l sizes differ");
  if (h) {
    if (h->size() != f_.size()) throw std::invalid_argument("Nonlinearity: h size differs from f");
    h_ = std::move(*h);
  } else {
    h_ = f_;
    const double c = g_.envelope_constant();
    for (std::size_t i = 0; i < h_.size(); ++i) h_[i] = std::max(c * f_[i], 0.0) + std::max(l_[i], 0.0);
    // F <= c f s^-gamma + l <= max(c f, l) (s^-gamma + 1); the sum is a valid, simpler envelope.
  }
  if (lambda_mono) {
    lambda_mono_ = *lambda_mono;
  } else {
    const auto known = g_.known_lambda_mono();
    const double fmax = f_.max();
    lambda_mono_ = known && f_.min() >= 0.0 ? *known * fmax : kInfinity;
  }
}

Nonlinearity Nonlinearity::zero(MeshPtr mesh) {
  auto z = FieldFunction::zeros(std::move(mesh));
  return Nonlinearity(ScalarMap::power(1.0), z, z, z, 0.0);
}

double Nonlinearity::operator()(std::size_t node, double s) const {
  const double fi = f_[node];
  const double singular = fi == 0.0 ? 0.0 : fi * g_(s);
  return singular + l_[node];
}

double Nonlinearity::truncated(std::size_t node, double s, double n) const {
  return std::min((*this)(node, std::max(s, 0.0)), n);
}

double Nonlinearity::truncated_derivative(std::size_t node, double s, double n) const {
  if (!(s > 0.0) || f_[node] == 0.0) return 0.0;
  if ((*this)(node, s) >= n) return 0.0;
  return f_[node] * g_.derivative(s);
}

Nonlinearity Nonlinearity::with_f_scaled(double a) const {
  return Nonlinearity(g_, a * f_, l_, std::nullopt,
                      std::isfinite(lambda_mono_) ? std::optional<double>(a * lambda_mono_) : std::nullopt);
}

Nonlinearity Nonlinearity::with_lambda_mono(double lambda) const {
  Nonlinearity copy = *this;
  copy.lambda_mono_ = lambda;
  return copy;
}

Nonlinearity Nonlinearity::rebind(MeshPtr mesh) const {
  Nonlinearity copy = *this;
  copy.f_ = f_.rebind(mesh);
  copy.l_ = l_.rebind(mesh);
  copy.h_ = h_.rebind(std::move(mesh));
  return copy;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("log_grid: need 0 < lo < hi, count >= 2");
  std::vector<double> s(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) s[i] = std::exp(a + (b - a) * static_cast<double>(i) / (count - 1));
  s.front() = lo;
  s.back() = hi;
  return s;
}

void Nonlinearity::validate() const {
  check_gamma(gamma());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(f_[i] >= 0.0)) throw std::invalid_argument("f must be >= 0 (node " + std::to_string(i) + ")");
    if (!(l_[i] >= 0.0)) throw std::invalid_argument("l must be >= 0 (node " + std::to_string(i) + ")");
    if (!(h_[i] >= 0.0)) throw std::invalid_argument("h must be >= 0 (node " + std::to_string(i) + ")");
  }
  if (std::isnan(lambda_mono_) || lambda_mono_ < 0.0) throw std::invalid_argument("lambda_mono must be >= 0");

  // Distinct (f, l, h) triples; fields are usually piecewise constant.
  std::set<std::tuple<double, double, double>> seen;
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < size(); ++i)
    if (seen.insert({f_[i], l_[i], h_[i]}).second) reps.push_back(i);

  const auto envelope_grid = log_grid(1e-8, 1e3, 221);
  const double g_exp = gamma();
  for (std::size_t i : reps) {
    for (double s : envelope_grid) {
      const double F = (*this)(i, s);
      const double bound = h_[i] * (std::pow(s, -g_exp) + 1.0);
      if (F > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "envelope violated: F(x, s) = " << F << " > h(x)(s^-gamma + 1) = " << bound << " at node " << i
            << ", s = " << s;
        throw std::invalid_argument(msg.str());
      }
    }
  }

  if (std::isfinite(lambda_mono_)) {
    auto mono_grid = log_grid(1e-6, 1e3, 60);
    mono_grid.insert(mono_grid.begin(), 0.0);
    for (std::size_t i : reps) {
      for (std::size_t a = 0; a < mono_grid.size(); ++a) {
        const double t = mono_grid[a];
        const double Ft = (*this)(i, t) - lambda_mono_ * t;
        for (std::size_t b = a + 1; b < mono_grid.size(); ++b) {
          const double s = mono_grid[b];
          const double Fs = (*this)(i, s) - lambda_mono_ * s;
          if (Fs > Ft + 1e-12) {
            std::ostringstream msg;
            msg << "almost-monotonicity violated for lambda = " << lambda_mono_ << ": F(x,s) - lambda s = " << Fs
                << " > F(x,t) - lambda t = " << Ft << " at node " << i << ", t = " << t << ", s = " << s;
            throw std::invalid_argument(msg.str());
          }
        }
      }
    }
  }
}

FieldFunction truncated_rhs(const Nonlinearity& F, const FieldFunction& u, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("truncated_rhs: level n must be positive");
  FieldFunction out = u;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = F.truncated(i, u[i], n);
  return out;
}

}  // namespace singhom
