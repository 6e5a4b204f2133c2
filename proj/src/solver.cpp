#include "singhom/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace singhom {

Problem::Problem(MeshPtr mesh, Coefficient A, Nonlinearity F, double mu)
    : mesh_(std::move(mesh)), A_(std::move(A)), F_(std::move(F)), mu_(mu), dofs_(DofMap::free_nodes(mesh_)) {
  if (!(mu_ >= 0.0)) throw std::invalid_argument("Problem: mu must be >= 0");
  if (F_.size() != mesh_->num_nodes()) throw std::invalid_argument("Problem: nonlinearity size differs from mesh");
  op_ = assemble_stiffness(*mesh_, A_, dofs_);
  weights_ = lumped_mass(*mesh_, dofs_);
  if (mu_ > 0.0) op_ = op_.plus(mu_, SparseOperator::diagonal(dofs_, weights_));
  h1_ = assemble_stiffness(*mesh_, Coefficient::constant(*mesh_, Mat2::identity()), dofs_);
}

double Problem::h1(const std::vector<double>& x) const { return std::sqrt(std::max(0.0, h1_.quadratic_form(x))); }

double Problem::h1_distance(const std::vector<double>& a, const std::vector<double>& b) const {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return h1(d);
}

std::vector<double> Problem::load(const std::vector<double>& x, double n) const {
  std::vector<double> b(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) b[d] = weights_[d] * F_.truncated(dofs_.node(d), x[d], n);
  return b;
}

void Problem::picard_shift(const std::vector<double>& x, double n, std::vector<double>& shift) const {
  shift.resize(x.size());
  for (std::size_t d = 0; d < x.size(); ++d)
    shift[d] = weights_[d] * std::max(0.0, -F_.truncated_derivative(dofs_.node(d), x[d], n));
}

double Problem::energy_identity_residual(const std::vector<double>& x, double n) const {
  const double lhs = op_.quadratic_form(x);
  double rhs = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) rhs += weights_[d] * F_.truncated(dofs_.node(d), x[d], n) * x[d];
  if (lhs == 0.0) return rhs == 0.0 ? 0.0 : std::abs(rhs);
  return std::abs(lhs - rhs) / lhs;
}

namespace {

// Smallest x >= lo with phi(x) >= 0 reached by stepping outward from x0,
// refined by bisection. phi(x) = a x - c - m F_n(x) is the nodal equation;
// a sign change from - to + is a root where the Picard map is attracting.
double nodal_root(const Problem& problem, std::size_t dof, double a, double c, double n, double x0) {
  const auto& F = problem.nonlinearity();
  const int node = problem.dofs().node(dof);
  const double m = problem.weights()[dof];
  auto phi = [&](double x) { return a * x - c - m * F.truncated(node, x, n); };
  double lo, hi;
  const double step0 = std::max(1e-3 * std::abs(x0), 1e-300);
  if (phi(x0) < 0.0) {
    lo = x0;
    double step = step0;
    hi = x0 + step;
    while (phi(hi) < 0.0) {
      lo = hi;
      step *= 2.0;
      hi = x0 + step;
    }
  } else {
    hi = x0;
    double step = step0;
    lo = std::max(0.0, x0 - step);
    while (lo > 0.0 && phi(lo) >= 0.0) {
      hi = lo;
      step *= 2.0;
      lo = std::max(0.0, x0 - step);
    }
    if (phi(lo) >= 0.0) return lo;
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

// At nodes where m F_n' exceeds half the diagonal the damped Picard map
// contracts very slowly (nodally it is repelling). There the nodal value is
// replaced by the nearest attracting root of its own equation, neighbours
// frozen; this cuts the iteration count several-fold on steep oscillating F.
void relax_steep_nodes(const Problem& problem, double n, const std::vector<double>& diag, std::vector<double>& v) {
  const auto& F = problem.nonlinearity();
  const auto& w = problem.weights();
  std::vector<std::size_t> steep;
  for (std::size_t d = 0; d < v.size(); ++d)
    if (w[d] * F.truncated_derivative(problem.dofs().node(d), v[d], n) > 0.5 * diag[d]) steep.push_back(d);
  if (steep.empty()) return;
  const auto y = problem.op() * v;
  std::vector<double> fixed(steep.size());
  for (std::size_t k = 0; k < steep.size(); ++k) {
    const std::size_t d = steep[k];
    fixed[k] = nodal_root(problem, d, diag[d], diag[d] * v[d] - y[d], n, v[d]);
  }
  for (std::size_t k = 0; k < steep.size(); ++k) v[steep[k]] = fixed[k];
}

}  // namespace

LevelResult solve_level(const Problem& problem, double n, const SolverConfig& cfg, const FieldFunction* initial) {
  if (!(n > 0.0)) throw std::invalid_argument("solve_level: level n must be positive");
  const auto& dofs = problem.dofs();
  std::vector<double> u = initial ? dofs.restrict(*initial) : std::vector<double>(dofs.size(), 0.0);

  LevelResult out;
  out.level = n;
  double theta = std::clamp(cfg.theta, 1e-6, 1.0);
  double prev_res = std::numeric_limits<double>::infinity();
  std::deque<double> recent;
  std::vector<double> v;
  CgOptions cg;
  cg.tol = cfg.cg_tol;
  cg.maxit = cfg.cg_maxit;
  cg.label = "picard";
  cg.sink = cfg.cg_sink;

  std::vector<double> shift(u.size(), 0.0);
  const auto diag = problem.op().diagonal_entries();
  for (int it = 1; it <= cfg.max_inner; ++it) {
    auto b = problem.load(u, n);
    problem.picard_shift(u, n, shift);
    for (std::size_t d = 0; d < b.size(); ++d) b[d] += shift[d] * u[d];
    cg.shift = &shift;
    cg.x0 = v.empty() ? &u : &v;
    auto solved = solve_cg(problem.op(), b, cg);
    out.cg_iterations += solved.stats.iterations;
    v = std::move(solved.x);
    relax_steep_nodes(problem, n, diag, v);

    const double res = problem.h1_distance(v, u);
    const double scale = problem.h1(v);
    out.iterations = it;
    out.residual = res;
    recent.push_back(res);
    if (recent.size() > 10) recent.pop_front();

    if (res <= cfg.inner_tol * scale + cfg.inner_abs_tol) {
      // v = T(u) is the accepted iterate: it is the image of a nonnegative
      // load and so inherits the discrete maximum principle.
      out.converged = true;
      out.theta = theta;
      out.u = dofs.prolong(v);
      return out;
    }
    // Rounding-level growth must not count, or noise alone drives theta to its floor.
    if (res > prev_res * (1.0 + 1e-3))
      theta = std::max(0.5 * theta, 1e-6);
    else
      theta = std::min(1.0, 1.2 * theta);
    prev_res = res;
    for (std::size_t d = 0; d < u.size(); ++d) u[d] = (1.0 - theta) * u[d] + theta * v[d];
  }
  out.converged = false;
  out.theta = theta;
  const auto [lo, hi] = std::minmax_element(recent.begin(), recent.end());
  out.oscillation = recent.empty() ? 0.0 : *hi - *lo;
  out.u = dofs.prolong(v.empty() ? u : v);
  return out;
}

LevelResult solve_level(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, double n,
                        const SolverConfig& cfg) {
  return solve_level(Problem(mesh, A, F), n, cfg);
}

std::string to_string(SolveStatus s) { return s == SolveStatus::converged ? "converged" : "stagnated"; }

SolveReport solve_singular(const Problem& problem, const SolverConfig& cfg, const FieldFunction* initial,
                           bool keep_levels) {
  SolveReport rep;
  const auto& dofs = problem.dofs();
  double n = cfg.first_level;
  if (!(n > 0.0)) throw std::invalid_argument("solve_singular: first_level must be positive");

  auto run_level = [&](double level, const FieldFunction* start) {
    auto res = solve_level(problem, level, cfg, start);
    rep.inner_iters += res.iterations;
    rep.cg_iters += res.cg_iterations;
    ++rep.outer_iters;
    if (!res.converged) {
      std::ostringstream msg;
      msg << "solve_singular: level n = " << level << " did not converge after " << res.iterations
          << " iterations (residual " << res.residual << ", oscillation amplitude " << res.oscillation << ")";
      throw SolverError(msg.str(), std::move(res));
    }
    return res;
  };

  auto prev = run_level(n, initial);
  auto prev_x = dofs.restrict(prev.u);
  rep.levels.push_back(n);
  rep.history.push_back(0.0);
  rep.level_h1.push_back(problem.h1(prev_x));
  if (keep_levels) rep.level_fields.push_back(prev.u);

  rep.status = SolveStatus::stagnated;
  for (int level = 1; level < cfg.max_levels; ++level) {
    n *= 2.0;
    auto cur = run_level(n, &prev.u);
    auto cur_x = dofs.restrict(cur.u);
    const double gap = problem.h1_distance(cur_x, prev_x);
    const double prev_norm = problem.h1(prev_x);
    rep.levels.push_back(n);
    rep.history.push_back(gap);
    rep.level_h1.push_back(problem.h1(cur_x));
    if (keep_levels) rep.level_fields.push_back(cur.u);
    rep.cauchy_gap = gap;
    prev = std::move(cur);
    prev_x = std::move(cur_x);
    if (gap <= cfg.outer_tol * prev_norm + cfg.outer_abs_tol) {
      rep.status = SolveStatus::converged;
      break;
    }
  }
  rep.n_final = n;
  rep.u = prev.u;
  rep.linf = rep.u.max_abs();
  rep.energy_identity_residual = problem.energy_identity_residual(prev_x, n);
  return rep;
}

SolveReport solve_singular(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, const SolverConfig& cfg) {
  return solve_singular(Problem(mesh, A, F), cfg);
}

}  // namespace singhom
