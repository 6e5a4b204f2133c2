#include "singhom/homogenization.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace singhom {

CapacityResult discrete_capacity(double R_outer, double r_inner, double mesh_h, double cg_tol) {
  if (!(r_inner > 0.0) || !(R_outer > r_inner))
    throw std::invalid_argument("discrete_capacity: need 0 < r_inner < R_outer");
  if (!(mesh_h > 0.0) || mesh_h > r_inner / 2.0) {
    std::ostringstream msg;
    msg << "discrete_capacity: inner radius " << r_inner << " not resolved by h = " << mesh_h << " (need h <= r/2)";
    throw std::invalid_argument(msg.str());
  }
  // Even number of intervals so that the center is a node.
  int cells = static_cast<int>(std::ceil(2.0 * R_outer / mesh_h - 1e-9));
  if (cells % 2) ++cells;
  auto mesh = build_rectangle_mesh(2.0 * R_outer, 2.0 * R_outer, cells + 1, cells + 1);

  std::vector<bool> free(mesh->num_nodes(), false);
  FieldFunction lift = FieldFunction::zeros(mesh);
  for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
    const Point& p = mesh->node(i);
    const double d = std::hypot(p.x - R_outer, p.y - R_outer);
    if (d >= R_outer || mesh->node_class(i) == NodeClass::outer_boundary)
      lift[i] = 1.0;
    else if (d > r_inner)
      free[i] = true;
  }
  const auto A = Coefficient::isotropic(*mesh, 1.0);
  const auto dofs = DofMap::from_mask(mesh, free);
  const auto K = assemble_stiffness(*mesh, A, dofs);
  auto rhs = dofs.restrict(FieldFunction(mesh, apply_stiffness(*mesh, A, lift.values)));
  for (double& b : rhs) b = -b;
  CgOptions cg;
  cg.tol = cg_tol;
  cg.maxit = 20 * static_cast<int>(std::sqrt(static_cast<double>(dofs.size()))) + 100;
  cg.label = "capacity";
  const auto solved = solve_cg(K, rhs, cg);
  const FieldFunction w = dofs.prolong(solved.x) + lift;

  CapacityResult out;
  out.capacity = energy(w, A);
  out.annulus_oracle = 2.0 * std::numbers::pi / std::log(R_outer / r_inner);
  out.unknowns = dofs.size();
  out.cg_iterations = solved.stats.iterations;
  return out;
}

StrangeTerm capacity_density(const PerforationSpec& spec, double mesh_h) {
  spec.validate();
  if (spec.dim != 2) throw std::invalid_argument("capacity_density: only dim 2 is supported");
  const auto cap = discrete_capacity(spec.epsilon, spec.radius, mesh_h);
  StrangeTerm t;
  t.mu = cap.capacity / (4.0 * spec.epsilon * spec.epsilon);
  t.provenance = StrangeTerm::Provenance::discrete_capacity;
  return t;
}

FieldFunction corrector_field(const Perforation& perf, const PerforationSpec& spec) {
  spec.validate();
  if (spec.dim != 2) throw std::invalid_argument("corrector_field: only dim 2 is supported");
  if (spec.strategy != HoleStrategy::resolved)
    throw std::invalid_argument("corrector_field: needs resolved holes");
  const double r = spec.radius;
  const double rho = spec.epsilon;
  // Annuli of radius rho around centers 2 eps apart are disjoint iff rho <= eps < eps sqrt(2).
  if (!(r < rho)) throw std::invalid_argument("corrector_field: annuli overlap (need r < rho)");

  const Mesh& mesh = *perf.mesh;
  const double period = 2.0 * spec.epsilon;
  const int cx = static_cast<int>(std::floor(mesh.width() / period + 1e-9));
  const int cy = static_cast<int>(std::floor(mesh.height() / period + 1e-9));
  const double log_ratio = std::log(rho / r);

  FieldFunction w = FieldFunction::constant(perf.mesh, 1.0);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.node_class(i) == NodeClass::hole) {
      w[i] = 0.0;
      continue;
    }
    const Point& p = mesh.node(i);
    // A disk of radius rho <= eps stays inside its own cell.
    const int ci = static_cast<int>(std::floor(p.x / period));
    const int cj = static_cast<int>(std::floor(p.y / period));
    if (ci < 0 || cj < 0 || ci >= cx || cj >= cy) continue;
    const double d = std::hypot(p.x - (2 * ci + 1) * spec.epsilon, p.y - (2 * cj + 1) * spec.epsilon);
    if (d < rho) w[i] = std::clamp(std::log(std::max(d, r) / r) / log_ratio, 0.0, 1.0);
  }
  return w;
}

SolveReport solve_limit_problem(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, const StrangeTerm& mu,
                                const SolverConfig& cfg) {
  if (!(mu.mu >= 0.0)) throw std::invalid_argument("solve_limit_problem: mu must be >= 0");
  return solve_singular(Problem(mesh, A, F, mu.mu), cfg);
}

namespace {

std::string eps_key(const std::string& name, double eps) {
  std::ostringstream os;
  os << name << "@eps=" << eps;
  return os.str();
}

HomogenizationRow sweep_row(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, const FieldFunction& u0,
                            const FieldFunction& u_no_mu, double mu, const Perforation& perf,
                            const PerforationSpec& spec, const SolverConfig& cfg) {
  HomogenizationRow row;
  row.epsilon = spec.epsilon;
  row.r = spec.radius;
  row.n_holes = perf.hole_count();
  row.min_radius_grid = perf.min_resolved_radius_grid;
  row.max_radius_grid = perf.max_resolved_radius_grid;

  const auto rep = solve_singular(Problem(perf.mesh, A, F.rebind(perf.mesh), 0.0), cfg);
  ExtensionCheck chk;
  const FieldFunction ue = extend_by_zero(rep.u, &chk).rebind(mesh);
  row.extension_gap = chk.h1semi_full == 0.0 ? 0.0
                                             : std::abs(chk.h1semi_full - chk.h1semi_perforated) / chk.h1semi_full;

  const FieldFunction w = corrector_field(perf, spec).rebind(mesh);
  row.eL2 = l2_norm(ue - u0);
  row.eH1_plain = h1_seminorm(ue - u0);
  row.eH1_corr = h1_seminorm(ue - hadamard(w, u0));
  row.energy_eps = energy(ue, A);
  row.energy_limit = energy(u0, A);
  row.defect = row.energy_eps - row.energy_limit;
  row.mu_times_mass = mu * mass_product(u0, u0);
  row.eL2_no_mu = l2_norm(ue - u_no_mu);
  row.u_eps = ue;
  row.corrector = w;
  for (const auto& hole : perf.holes) row.hole_nodes.insert(row.hole_nodes.end(), hole.nodes.begin(), hole.nodes.end());
  std::sort(row.hole_nodes.begin(), row.hole_nodes.end());
  return row;
}

}  // namespace

HomogenizationResult homogenization_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F,
                                               const std::vector<PerforationSpec>& specs, const SolverConfig& cfg,
                                               const HomogenizationOptions& opts) {
  HomogenizationResult res;
  res.outcome.name = "homogenization";
  res.symmetric_coefficient = A.symmetric();

  std::optional<double> mu;
  for (const auto& s : specs) {
    s.validate();
    const double m = s.target_mu.value_or(strange_term_formula(s.dim, s.C0).mu);
    if (mu && std::abs(m - *mu) > 1e-12 * *mu) {
      std::ostringstream msg;
      msg << "homogenization: perforations disagree on mu (" << *mu << " vs " << m << ")";
      throw std::invalid_argument(msg.str());
    }
    mu = m;
  }
  res.mu.mu = mu.value_or(0.0);
  res.mu.provenance = StrangeTerm::Provenance::formula;

  res.u0 = solve_limit_problem(mesh, A, F, res.mu, cfg).u;
  res.u_no_mu = res.mu.mu == 0.0 ? res.u0 : solve_singular(Problem(mesh, A, F, 0.0), cfg).u;

  auto sorted = specs;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PerforationSpec& a, const PerforationSpec& b) { return a.epsilon > b.epsilon; });

  std::vector<std::pair<Perforation, PerforationSpec>> jobs;
  for (const auto& s : sorted) {
    try {
      jobs.emplace_back(perforate(mesh, s), s);
    } catch (const std::invalid_argument& e) {
      res.outcome.notes.push_back(eps_key("dropped", s.epsilon) + ": " + e.what());
    }
  }

  auto run = [&](std::size_t k) {
    return sweep_row(mesh, A, F, res.u0, res.u_no_mu, res.mu.mu, jobs[k].first, jobs[k].second, cfg);
  };
  if (opts.threads > 1 && jobs.size() > 1) {
    // Batches of `threads` solves; rows stay in sweep order.
    for (std::size_t start = 0; start < jobs.size(); start += static_cast<std::size_t>(opts.threads)) {
      std::vector<std::future<HomogenizationRow>> batch;
      const std::size_t stop = std::min(jobs.size(), start + static_cast<std::size_t>(opts.threads));
      for (std::size_t k = start; k < stop; ++k) batch.push_back(std::async(std::launch::async, run, k));
      for (auto& f : batch) res.rows.push_back(f.get());
    }
  } else {
    for (std::size_t k = 0; k < jobs.size(); ++k) res.rows.push_back(run(k));
  }

  auto& out = res.outcome;
  out.set("mu", res.mu.mu);
  out.set("n_eps", static_cast<double>(res.rows.size()));
  out.set("u0_linf", res.u0.max_abs());
  for (const auto& row : res.rows) {
    out.set(eps_key("r", row.epsilon), row.r);
    out.set(eps_key("n_holes", row.epsilon), static_cast<double>(row.n_holes));
    out.set(eps_key("eL2", row.epsilon), row.eL2);
    out.set(eps_key("eL2_no_mu", row.epsilon), row.eL2_no_mu);
    out.set(eps_key("eH1_plain", row.epsilon), row.eH1_plain);
    out.set(eps_key("eH1_corr", row.epsilon), row.eH1_corr);
    out.set(eps_key("defect", row.epsilon), row.defect);
    out.set(eps_key("mu_times_mass", row.epsilon), row.mu_times_mass);
    out.set(eps_key("extension_gap", row.epsilon), row.extension_gap);
  }
  if (res.rows.size() < 2) {
    out.notes.push_back("sweep needs at least two resolvable epsilons");
    out.pass = false;
    return res;
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < res.rows.size(); ++k) decreasing = decreasing && res.rows[k].eL2 < res.rows[k - 1].eL2;
  const auto& fine = res.rows.back();
  const double defect_ratio = fine.mu_times_mass > 0.0 ? fine.defect / fine.mu_times_mass : 0.0;
  out.set("eL2_decreasing", decreasing ? 1.0 : 0.0);
  out.set("defect_ratio", defect_ratio);
  out.set("defect_tol", opts.defect_tol);
  out.set("beats_no_mu", fine.eL2 < fine.eL2_no_mu ? 1.0 : 0.0);
  out.pass = decreasing && fine.mu_times_mass > 0.0 && std::abs(defect_ratio - 1.0) <= opts.defect_tol &&
             fine.eL2 < fine.eL2_no_mu;
  return res;
}

ExperimentOutcome corrector_experiment(const HomogenizationResult& sweep) {
  if (!sweep.symmetric_coefficient) throw std::invalid_argument("corrector_experiment: coefficient must be symmetric");
  ExperimentOutcome out;
  out.name = "corrector";
  out.set("u0_linf", sweep.u0.max_abs());
  bool beats = !sweep.rows.empty();
  bool decreasing = sweep.rows.size() >= 2;
  bool in_range = true;
  bool zeros_on_holes = true;
  for (std::size_t k = 0; k < sweep.rows.size(); ++k) {
    const auto& row = sweep.rows[k];
    out.set(eps_key("eH1_corr", row.epsilon), row.eH1_corr);
    out.set(eps_key("eH1_plain", row.epsilon), row.eH1_plain);
    out.set(eps_key("w_min", row.epsilon), row.corrector.min());
    out.set(eps_key("w_max", row.epsilon), row.corrector.max());
    beats = beats && row.eH1_corr < row.eH1_plain;
    in_range = in_range && row.corrector.min() >= 0.0 && row.corrector.max() <= 1.0;
    for (std::size_t i = 0; i < row.corrector.size(); ++i) {
      const bool hole = std::binary_search(row.hole_nodes.begin(), row.hole_nodes.end(), static_cast<int>(i));
      zeros_on_holes = zeros_on_holes && (row.corrector[i] == 0.0) == hole;
    }
    if (k > 0) decreasing = decreasing && row.eH1_corr < sweep.rows[k - 1].eH1_corr;
  }
  out.set("corrector_beats_plain", beats ? 1.0 : 0.0);
  out.set("corrector_decreasing", decreasing ? 1.0 : 0.0);
  out.set("w_in_unit_interval", in_range ? 1.0 : 0.0);
  out.set("w_zero_exactly_on_holes", zeros_on_holes ? 1.0 : 0.0);
  out.pass = beats && decreasing && in_range && zeros_on_holes;
  return out;
}

}  // namespace singhom
