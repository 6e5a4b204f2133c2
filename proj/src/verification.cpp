#include "singhom/verification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace singhom {

Eigenpair dirichlet_eigenpair(const MeshPtr& mesh, const Coefficient& A, bool lumped) {
  const auto dofs = DofMap::free_nodes(mesh);
  const auto K = assemble_stiffness(*mesh, A.symmetrized(), dofs);
  const auto M = lumped ? SparseOperator::diagonal(dofs, lumped_mass(*mesh, dofs)) : assemble_mass(*mesh, dofs);
  return first_eigenpair(K, M);
}

namespace {

double max_quotient(const Nonlinearity& F, std::size_t node, const std::vector<double>& s) {
  double lam = 0.0;
  double prev = F(node, s[0]);
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double cur = F(node, s[k]);
    lam = std::max(lam, (cur - prev) / (s[k] - s[k - 1]));
    prev = cur;
  }
  return lam;
}

std::vector<std::size_t> distinct_nodes(const Nonlinearity& F) {
  std::set<std::pair<double, double>> seen;
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < F.size(); ++i)
    if (seen.insert({F.f()[i], F.l()[i]}).second) reps.push_back(i);
  return reps;
}

std::string at_n(const std::string& name, double n) {
  std::ostringstream os;
  os << name << "@n=" << n;
  return os.str();
}

}  // namespace

double estimate_lambda_mono(const Nonlinearity& F, const std::vector<double>& s_grid) {
  if (s_grid.size() < 2) throw std::invalid_argument("estimate_lambda_mono: grid needs >= 2 points");
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    if (!(s_grid[k] > 0.0)) throw std::invalid_argument("estimate_lambda_mono: grid must lie in (0, inf)");
    if (k > 0 && !(s_grid[k] > s_grid[k - 1])) throw std::invalid_argument("estimate_lambda_mono: grid must increase");
  }
  const auto below = log_grid(s_grid.front() / 100.0, s_grid.front(), 21);
  double lam = 0.0;
  double lam_below = 0.0;
  for (std::size_t i : distinct_nodes(F)) {
    lam = std::max(lam, max_quotient(F, i, s_grid));
    lam_below = std::max(lam_below, max_quotient(F, i, below));
  }
  if (!std::isfinite(lam) || lam_below > 10.0 * lam + 1e-12) return Nonlinearity::kInfinity;
  return lam;
}

double estimate_lambda_mono(const Nonlinearity& F) { return estimate_lambda_mono(F, log_grid(1e-6, 1e3, 200)); }

ExperimentOutcome comparison_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F1,
                                        const Nonlinearity& F2, const SolverConfig& cfg) {
  if (F1.size() != F2.size()) throw std::invalid_argument("comparison: F1 and F2 sizes differ");
  const auto grid = log_grid(1e-6, 1e3, 200);
  std::set<std::tuple<double, double, double, double>> seen;
  for (std::size_t i = 0; i < F1.size(); ++i) {
    if (!seen.insert({F1.f()[i], F1.l()[i], F2.f()[i], F2.l()[i]}).second) continue;
    for (double s : grid) {
      const double a = F1(i, s);
      const double b = F2(i, s);
      if (a > b + 1e-12 * std::abs(b)) {
        std::ostringstream msg;
        msg << "comparison: F1 <= F2 fails at node " << i << ", s = " << s << " (F1 = " << a << ", F2 = " << b << ")";
        throw std::invalid_argument(msg.str());
      }
    }
  }
  const double lambda1 = dirichlet_eigenpair(mesh, A).lambda;
  const double lam = std::min(F1.lambda_mono(), F2.lambda_mono());
  if (!(lam <= kLambdaMargin * lambda1)) {
    std::ostringstream msg;
    msg << "comparison: neither lambda_mono (" << F1.lambda_mono() << ", " << F2.lambda_mono() << ") is <= "
        << kLambdaMargin << " * lambda_1 = " << kLambdaMargin * lambda1;
    throw std::invalid_argument(msg.str());
  }

  ExperimentOutcome out;
  out.name = "comparison";
  out.set("lambda1", lambda1);
  out.set("lambda_mono_1", F1.lambda_mono());
  out.set("lambda_mono_2", F2.lambda_mono());
  const auto r1 = solve_singular(mesh, A, F1, cfg);
  const auto r2 = solve_singular(mesh, A, F2, cfg);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r1.u.size(); ++i) worst = std::max(worst, r1.u[i] - r2.u[i]);
  const double scale = r2.u.max_abs();
  out.set("max_u1_minus_u2", worst);
  out.set("u2_linf", scale);
  out.set("tolerance", 1e-8 * scale);
  out.set("converged", r1.converged() && r2.converged() ? 1.0 : 0.0);
  out.pass = r1.converged() && r2.converged() && worst <= 1e-8 * scale;
  return out;
}

ExperimentOutcome uniqueness_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F,
                                        int n_starts, const SolverConfig& cfg, std::uint64_t seed) {
  if (n_starts < 1) throw std::invalid_argument("uniqueness: n_starts must be >= 1");
  const double lambda1 = dirichlet_eigenpair(mesh, A).lambda;
  if (!(F.lambda_mono() <= kLambdaMargin * lambda1)) {
    std::ostringstream msg;
    msg << "uniqueness: lambda_mono = " << F.lambda_mono() << " exceeds " << kLambdaMargin
        << " * lambda_1 = " << kLambdaMargin * lambda1;
    throw std::invalid_argument(msg.str());
  }
  ExperimentOutcome out;
  out.name = "uniqueness";
  out.set("lambda1", lambda1);
  out.set("lambda_mono", F.lambda_mono());
  out.set("seed", static_cast<double>(seed));

  const double big = 10.0;
  const Problem problem(mesh, A, F);
  std::vector<FieldFunction> sols;
  for (int s = 0; s < n_starts; ++s) {
    FieldFunction start = FieldFunction::zeros(mesh);
    if (s == 1) {
      start = FieldFunction::constant(mesh, big);
    } else if (s >= 2) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(s));
      std::uniform_real_distribution<double> dist(0.0, big);
      for (double& v : start.values) v = dist(rng);
    }
    start = apply_dirichlet(std::move(start));
    try {
      auto rep = solve_singular(problem, cfg, &start);
      if (!rep.converged()) {
        out.notes.push_back("start " + std::to_string(s) + " stagnated");
        out.pass = false;
        return out;
      }
      sols.push_back(std::move(rep.u));
    } catch (const SolverError& e) {
      out.notes.push_back("start " + std::to_string(s) + ": " + e.what());
      out.pass = false;
      return out;
    }
  }
  double spread = 0.0;
  double norm = 0.0;
  for (std::size_t a = 0; a < sols.size(); ++a) {
    norm = std::max(norm, h1_seminorm(sols[a]));
    for (std::size_t b = a + 1; b < sols.size(); ++b) spread = std::max(spread, h1_seminorm(sols[a] - sols[b]));
  }
  out.set("max_pairwise_h1", spread);
  out.set("max_h1", norm);
  out.set("tolerance", 10.0 * cfg.outer_tol);
  out.pass = spread <= 10.0 * cfg.outer_tol;
  return out;
}

ExperimentOutcome nonuniqueness_experiment(const MeshPtr& mesh, const Coefficient& A, double k,
                                           const SolverConfig& cfg, const NonuniquenessOptions& opts) {
  if (!A.symmetric()) throw std::invalid_argument("nonuniqueness: coefficient must be symmetric");
  if (!(k > 0.0)) throw std::invalid_argument("nonuniqueness: k must be positive");
  const auto eig = dirichlet_eigenpair(mesh, A, true);
  const FieldFunction& phi = eig.phi;
  const double pmax = phi.max();
  const double t_max = k / pmax;
  auto zero = FieldFunction::zeros(mesh);
  const Nonlinearity F(ScalarMap::eigen_trunc(eig.lambda, k), FieldFunction::constant(mesh, 1.0), zero, std::nullopt,
                       eig.lambda);
  const Problem problem(mesh, A, F);
  const auto& w = problem.weights();
  const auto& dofs = problem.dofs();
  const auto px = dofs.restrict(phi);
  // Above lambda_1 k the cap never acts.
  const double level = 2.0 * eig.lambda * k;

  ExperimentOutcome out;
  out.name = "nonuniqueness";
  out.set("lambda1", eig.lambda);
  out.set("k", k);
  out.set("t_max", t_max);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<FieldFunction> on_ray;
  for (std::size_t s = 0; s < opts.start_fractions.size(); ++s) {
    const double t0 = opts.start_fractions[s] * t_max;
    FieldFunction start = t0 * phi;
    for (std::size_t i = 0; i < start.size(); ++i) start[i] += opts.perturbation * k * dist(rng);
    start = apply_dirichlet(std::move(start));
    const auto res = solve_level(problem, level, cfg, &start);

    const auto x = dofs.restrict(res.u);
    double t = 0.0, uu = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      t += w[d] * x[d] * px[d];
      uu += w[d] * x[d] * x[d];
    }
    double off = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) off += w[d] * (x[d] - t * px[d]) * (x[d] - t * px[d]);
    const double ray = uu > 0.0 ? std::sqrt(off / uu) : 0.0;
    const std::string tag = "start" + std::to_string(s);
    out.set(tag + ".t0", t0);
    out.set(tag + ".t", t);
    out.set(tag + ".ray_distance", ray);
    out.set(tag + ".linf", res.u.max_abs());
    out.set(tag + ".residual", res.residual);
    out.set(tag + ".converged", res.converged ? 1.0 : 0.0);
    if (res.converged && ray <= opts.ray_tol && t <= t_max * (1.0 + 1e-9)) on_ray.push_back(res.u);
  }
  double sep = 0.0;
  for (std::size_t a = 0; a < on_ray.size(); ++a)
    for (std::size_t b = a + 1; b < on_ray.size(); ++b) sep = std::max(sep, (on_ray[a] - on_ray[b]).max_abs());
  out.set("solutions_on_ray", static_cast<double>(on_ray.size()));
  out.set("max_separation_linf", sep);
  out.set("required_separation", opts.separation * k);
  out.pass = on_ray.size() >= 2 && sep >= opts.separation * k;
  if (!out.pass && on_ray.size() >= 2) out.notes.push_back("all starts drifted to one member of the family");
  return out;
}

ExperimentOutcome stability_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F,
                                       const SolverConfig& cfg, const StabilityOptions& opts) {
  ExperimentOutcome out;
  out.name = "stability";
  const Problem problem(mesh, A, F);
  const auto ref = solve_singular(problem, cfg, nullptr, true);
  const double ref_norm = h1_seminorm(ref.u);
  out.set("n_final", ref.n_final);
  out.set("cauchy_gap", ref.cauchy_gap);
  out.set("cauchy_gap_relative", ref_norm > 0.0 ? ref.cauchy_gap / ref_norm : 0.0);
  out.set("h1_inf", ref_norm);
  out.set("energy_identity_residual", ref.energy_identity_residual);
  out.set("converged", ref.converged() ? 1.0 : 0.0);

  auto levels = opts.levels.empty() ? ref.levels : opts.levels;
  if (!std::is_sorted(levels.begin(), levels.end())) throw std::invalid_argument("stability: levels must increase");

  std::vector<double> errors;
  for (double n : levels) {
    FieldFunction un;
    const auto hit = std::find(ref.levels.begin(), ref.levels.end(), n);
    if (hit != ref.levels.end()) {
      un = ref.level_fields[static_cast<std::size_t>(hit - ref.levels.begin())];
    } else {
      // Warm start from the closest reference level below n.
      const FieldFunction* start = nullptr;
      for (std::size_t k = 0; k < ref.levels.size() && ref.levels[k] < n; ++k) start = &ref.level_fields[k];
      auto res = solve_level(problem, n, cfg, start);
      if (!res.converged) {
        out.notes.push_back(at_n("level did not converge", n));
        out.pass = false;
        return out;
      }
      un = std::move(res.u);
    }
    const double e = h1_seminorm(un - ref.u);
    out.set(at_n("e", n), e);
    errors.push_back(e);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < errors.size(); ++k)
    monotone = monotone && errors[k] <= (1.0 + opts.slack) * errors[k - 1] + 1e-14 * ref_norm;
  const double last = errors.empty() ? 0.0 : errors.back();
  out.set("e_monotone", monotone ? 1.0 : 0.0);
  out.set("e_last_relative", ref_norm > 0.0 ? last / ref_norm : last);
  out.pass = ref.converged() && monotone && (ref_norm > 0.0 ? last / ref_norm : last) <= opts.stab_tol;
  return out;
}

}  // namespace singhom
