// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is 0 only if every selected criterion passes.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "singhom/certificates.hpp"
#include "singhom/homogenization.hpp"
#include "singhom/verification.hpp"

using namespace singhom;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  // Records a sub-check; the detail line lists every one.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Nonlinearity constant_nl(const MeshPtr& m, ScalarMap g, double f, double l) {
  return Nonlinearity(std::move(g), FieldFunction::constant(m, f), FieldFunction::constant(m, l));
}

Coefficient identity(const MeshPtr& m) { return Coefficient::isotropic(*m, 1.0); }

void linear_oracle(Verdict& v) {
  auto iv = build_interval_mesh(1.0, 257);
  const auto r1 = solve_singular(iv, identity(iv), constant_nl(iv, ScalarMap::power(1.0), 0.0, 1.0), SolverConfig{});
  const double rel = std::abs(r1.linf / 0.125 - 1.0);
  v.check(rel <= 1e-3, "1-D max|u| rel err " + fmt("%.2e", rel) + " <= 1e-3");

  auto sq = build_rectangle_mesh(1.0, 1.0, 65, 65);
  std::vector<double> load(sq->num_nodes()), exact(sq->num_nodes());
  for (std::size_t i = 0; i < load.size(); ++i) {
    exact[i] = std::sin(pi * sq->node(i).x) * std::sin(pi * sq->node(i).y);
    load[i] = 2 * pi * pi * exact[i];
  }
  Nonlinearity F(ScalarMap::power(1.0), FieldFunction::zeros(sq), FieldFunction(sq, load));
  const auto r2 = solve_singular(sq, identity(sq), F, SolverConfig{});
  double err = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(r2.u[i] - exact[i]));
  v.check(err <= 2e-3, "2-D sin sin Linf err " + fmt("%.2e", err) + " <= 2e-3");
}

void eigen_oracle(Verdict& v) {
  auto sq = build_rectangle_mesh(1.0, 1.0, 65, 65);
  const auto e = first_eigenpair(assemble_stiffness(sq, identity(sq)), assemble_mass(sq));
  const double rel = std::abs(e.lambda / (2 * pi * pi) - 1.0);
  v.check(rel <= 0.01, "lambda1 " + fmt("%.5f", e.lambda) + " vs 2pi^2, rel err " + fmt("%.2e", rel) + " <= 1e-2");
}

void shooting_oracle(Verdict& v) {
  auto iv = build_interval_mesh(1.0, 513);
  for (double gamma : {0.5, 1.0}) {
    const oracle::SingularProfile exact(gamma);
    const auto r = solve_singular(iv, identity(iv), constant_nl(iv, ScalarMap::power(gamma), 1.0, 0.0), SolverConfig{});
    double err = 0.0;
    for (std::size_t i = 0; i < iv->num_nodes(); ++i) err = std::max(err, std::abs(r.u[i] - exact(iv->node(i).x)));
    const std::string tag = "gamma " + fmt("%.1f", gamma);
    v.check(r.converged() && err <= 1e-3, tag + " Linf err " + fmt("%.2e", err) + " <= 1e-3");
    v.check(r.energy_identity_residual <= 1e-6, tag + " energy residual " + fmt("%.1e", r.energy_identity_residual));
  }
}

void stability(Verdict& v) {
  auto sq = build_rectangle_mesh(1.0, 1.0, 129, 129);
  const auto o = stability_experiment(sq, identity(sq), constant_nl(sq, ScalarMap::oscillating(0.5), 1.0, 0.0),
                                      SolverConfig{});
  v.check(o.get("converged") == 1.0, "converged at n = " + fmt("%g", o.get("n_final")));
  v.check(o.get("e_monotone") == 1.0, "e_n nonincreasing within 5%");
  v.check(o.get("cauchy_gap_relative") <= 1e-6, "Cauchy gap " + fmt("%.2e", o.get("cauchy_gap_relative")) + " <= 1e-6");
}

void certificates(Verdict& v) {
  // Singular mass: slack at h, h/2, h/4 must shrink at least like h.
  for (double delta : {0.1, 0.01}) {
    std::vector<double> slack;
    double worst_rel = 0.0;
    for (int n : {65, 129, 257}) {
      auto sq = build_rectangle_mesh(1.0, 1.0, n, n);
      const auto F = constant_nl(sq, ScalarMap::power(0.5), 1.0, 0.0);
      const auto r = solve_singular(sq, identity(sq), F, SolverConfig{});
      const auto phi = dirichlet_eigenpair(sq, identity(sq)).phi;
      const auto c = singular_mass_certificate(r.u, F, identity(sq), phi, delta, r.n_final);
      slack.push_back(c.slack());
      worst_rel = std::max(worst_rel, c.slack() / c.rhs);
    }
    bool linear = true;
    for (std::size_t k = 1; k < slack.size(); ++k) linear = linear && slack[k] <= 0.5 * slack[k - 1] + 1e-12;
    v.check(linear, "singular mass delta " + fmt("%g", delta) + " max rel slack " + fmt("%.1e", worst_rel));
  }

  // Level sets: 1-D with |u| = 5 and a 2-D singular case.
  auto iv = build_interval_mesh(1.0, 1025);
  const auto L = constant_nl(iv, ScalarMap::power(1.0), 0.0, 40.0);
  const auto u1 = solve_singular(iv, identity(iv), L, SolverConfig{}).u;
  auto sq = build_rectangle_mesh(1.0, 1.0, 129, 129);
  const auto P = constant_nl(sq, ScalarMap::power(0.5), 40.0, 40.0);
  const auto r2 = solve_singular(sq, identity(sq), P, SolverConfig{});
  double worst = 0.0;
  bool ok = true;
  for (const auto& [u, h] : {std::pair{u1, L.h()}, std::pair{r2.u, P.h()}}) {
    std::vector<int> js;
    for (int j = 0; j <= static_cast<int>(std::ceil(u.max_abs())); ++j) js.push_back(j);
    for (const auto& s : levelset_energy_certificate(u, h, 1.0, js)) {
      ok = ok && s.lhs <= 1.05 * s.rhs;
      if (s.rhs > 0.0) worst = std::max(worst, s.lhs / s.rhs);
    }
  }
  v.check(ok, "level sets max lhs/rhs " + fmt("%.3f", worst) + " <= 1.05");
  const double young = young_max_violation(100000, 2024);
  v.check(young <= 0.0, "Young max violation " + fmt("%.1e", young) + " <= 0");
}

void comparison_uniqueness(Verdict& v) {
  auto sq = build_rectangle_mesh(1.0, 1.0, 65, 65);
  SolverConfig cfg;
  const auto F1 = constant_nl(sq, ScalarMap::power(0.5), 1.0, 0.0);
  const auto F2 = constant_nl(sq, ScalarMap::power(0.5), 2.0, 0.0);
  const auto c = comparison_experiment(sq, identity(sq), F1, F2, cfg);
  v.check(c.pass, "max(u1 - u2) = " + fmt("%.1e", c.get("max_u1_minus_u2")) + " <= 1e-8 |u2|");
  const auto u = uniqueness_experiment(sq, identity(sq), F1, 3, cfg, 1);
  v.check(u.pass, "3-start spread " + fmt("%.1e", u.get("max_pairwise_h1")) + " <= " + fmt("%.0e", 10 * cfg.outer_tol));
}

void nonuniqueness(Verdict& v) {
  auto sq = build_rectangle_mesh(1.0, 1.0, 65, 65);
  const auto o = nonuniqueness_experiment(sq, identity(sq), 1.0, SolverConfig{});
  double ray = 0.0;
  for (int k = 0; k < 3; ++k) ray = std::max(ray, o.get("start" + std::to_string(k) + ".ray_distance"));
  v.check(o.get("solutions_on_ray") >= 2, fmt("%g", o.get("solutions_on_ray")) + " converged solutions on the ray");
  v.check(o.get("max_separation_linf") >= 0.1, "separation " + fmt("%.3f", o.get("max_separation_linf")) + " >= 0.1");
  v.check(ray <= 1e-4, "ray distance " + fmt("%.1e", ray) + " <= 1e-4");
}

void strange_term(Verdict& v) {
  const auto cap = discrete_capacity(1.0, 0.1, 0.0025);
  const double rel = std::abs(cap.capacity / oracle::annulus_capacity(1.0, 0.1) - 1.0);
  v.check(rel <= 0.02, "annulus capacity " + fmt("%.4f", cap.capacity) + " rel err " + fmt("%.2e", rel));
  const auto d = capacity_density(PerforationSpec::from_mu(0.125, 50.0), 1.0 / 256);
  const double drel = std::abs(d.mu / 50.0 - 1.0);
  v.check(drel <= 0.1, "cell density " + fmt("%.2f", d.mu) + " vs mu 50, rel err " + fmt("%.2e", drel));
}

struct Sweep {
  HomogenizationResult result;
  bool ready = false;
};

// Shared by criteria 9 and 10.
const HomogenizationResult& sweep(Sweep& s) {
  if (!s.ready) {
    auto sq = build_rectangle_mesh(1.0, 1.0, 257, 257);
    const auto F = constant_nl(sq, ScalarMap::power(1.0), 0.0, 10.0);
    HomogenizationOptions opts;
    opts.threads = 2;
    s.result = homogenization_experiment(
        sq, identity(sq), F, {PerforationSpec::from_mu(0.25, 50.0), PerforationSpec::from_mu(0.125, 50.0)},
        SolverConfig{}, opts);
    s.ready = true;
  }
  return s.result;
}

void homogenization(Verdict& v, Sweep& s) {
  const auto& res = sweep(s);
  if (res.rows.size() != 2) {
    v.check(false, "both epsilons resolved");
    return;
  }
  const auto& coarse = res.rows[0];
  const auto& fine = res.rows[1];
  v.check(fine.eL2 < coarse.eL2, "eL2 " + fmt("%.4f", coarse.eL2) + " -> " + fmt("%.4f", fine.eL2));
  const double ratio = fine.defect / fine.mu_times_mass;
  v.check(std::abs(ratio - 1.0) <= 0.25, "defect / mu int u0^2 = " + fmt("%.3f", ratio) + " within 25%");
  v.check(fine.eL2 < fine.eL2_no_mu, "closer to u0 (" + fmt("%.4f", fine.eL2) + ") than to the mu = 0 solution (" +
                                         fmt("%.4f", fine.eL2_no_mu) + ")");
}

void corrector(Verdict& v, Sweep& s) {
  const auto& res = sweep(s);
  const auto o = corrector_experiment(res);
  std::string errs;
  for (const auto& r : res.rows)
    errs += (errs.empty() ? "" : ", ") + fmt("%.3f", r.eH1_corr) + " < " + fmt("%.3f", r.eH1_plain);
  v.check(o.get("corrector_beats_plain") == 1.0, "corrected vs plain H1 " + errs);
  v.check(o.get("corrector_decreasing") == 1.0, "corrected error decreasing in eps");
  v.check(o.get("w_in_unit_interval") == 1.0 && o.get("w_zero_exactly_on_holes") == 1.0,
          "w in [0, 1], zero exactly on hole nodes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::set<int> only;
  app.add_option("--only", only, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  Sweep shared;
  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0: no runtime limit
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "linear oracle", 5, linear_oracle},
      {2, "eigen oracle", 0, eigen_oracle},
      {3, "singular solve vs shooting oracle", 30, shooting_oracle},
      {4, "existence and stability", 0, stability},
      {5, "a priori certificates", 0, certificates},
      {6, "comparison and uniqueness", 0, comparison_uniqueness},
      {7, "non-uniqueness", 60, nonuniqueness},
      {8, "strange term capacity", 0, strange_term},
      {9, "homogenization", 600, [&](Verdict& v) { homogenization(v, shared); }},
      {10, "corrector", 0, [&](Verdict& v) { corrector(v, shared); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) v.check(secs < c.budget_s, "runtime " + fmt("%.1f", secs) + " s < " + fmt("%g", c.budget_s) + " s");
    else v.detail << "; runtime " << fmt("%.1f", secs) << " s";
    std::printf("%s criterion %2d (%s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
