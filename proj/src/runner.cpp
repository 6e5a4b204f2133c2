#include "singhom/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "singhom/certificates.hpp"
#include "singhom/field_io.hpp"
#include "singhom/homogenization.hpp"
#include "singhom/verification.hpp"

namespace singhom {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json record_json(const RunRecord& rec) {
  json j;
  j["name"] = rec.name;
  j["kind"] = rec.kind;
  j["pass"] = rec.exit_code == kExitPass;
  j["exit_code"] = rec.exit_code;
  json metrics = json::object();
  for (const auto& [k, v] : rec.outcome.metrics) metrics[k] = number(v);
  j["metrics"] = metrics;
  j["artifacts"] = rec.outcome.artifacts;
  j["notes"] = rec.outcome.notes;
  if (!rec.error.empty()) j["error"] = rec.error;
  j["wall_seconds"] = rec.wall_seconds;
  return j;
}

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  std::uint64_t seed;
  int threads;
  ExperimentOutcome& outcome;

  void write(const std::string& file, const std::string& content) {
    write_atomic(dir / file, content);
    outcome.artifacts.push_back((dir / file).string());
  }
};

// Thrown for problems with the configured data (exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto as_data(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw DataError(what + ": " + e.what());
  }
}

void run_solve(Context& c, const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, SolverConfig scfg) {
  std::vector<CgStats> cg;
  scfg.cg_sink = [&cg](const CgStats& s) { cg.push_back(s); };
  auto& out = c.outcome;
  out.name = "solve";
  SolveReport rep;
  try {
    rep = solve_singular(Problem(mesh, A, F), scfg, nullptr, false);
  } catch (const SolverError& e) {
    out.notes.push_back(e.what());
    out.set("converged", 0.0);
    c.write("last_iterate.csv", field_csv(e.last().u));
    out.pass = false;
    return;
  }
  const auto zs = zero_set_diagnostics(rep.u, F, rep.n_final);
  out.set("converged", rep.converged() ? 1.0 : 0.0);
  out.set("n_final", rep.n_final);
  out.set("outer_iters", rep.outer_iters);
  out.set("inner_iters", rep.inner_iters);
  out.set("cg_iters", rep.cg_iters);
  out.set("energy_identity_residual", rep.energy_identity_residual);
  out.set("cauchy_gap", rep.cauchy_gap);
  out.set("linf", rep.linf);
  out.set("min_u", rep.u.min());
  out.set("h1", h1_seminorm(rep.u));
  out.set("zero_set_nodes", static_cast<double>(zs.nodes.size()));
  out.set("zero_set_violation", zs.violation ? 1.0 : 0.0);

  c.write("solution.csv", field_csv(rep.u));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < rep.levels.size(); ++k) rows.push_back({rep.levels[k], rep.history[k], rep.level_h1[k]});
  c.write("levels.csv", table_csv({"n", "gap_h1", "h1"}, rows));
  std::string lines;
  for (const auto& s : cg) {
    json j{{"label", s.label}, {"iterations", s.iterations}, {"residual", s.residual}, {"unknowns", s.unknowns}};
    lines += j.dump() + "\n";
  }
  c.write("cg_stats.jsonl", lines);

  bool linf_ok = true;
  if (const auto& want = c.cfg.checks.expected_linf) {
    const double rel = *want == 0.0 ? rep.linf : std::abs(rep.linf / *want - 1.0);
    out.set("linf_relative_error", rel);
    linf_ok = rel <= c.cfg.checks.linf_tolerance;
  }
  out.pass = rep.converged() && rep.energy_identity_residual <= c.cfg.checks.max_energy_residual &&
             rep.u.min() >= -1e-12 && linf_ok;
}

std::vector<PerforationSpec> sweep_specs(const RunConfig& cfg) {
  std::vector<PerforationSpec> specs;
  const auto strategy = hole_strategy_from_string(cfg.homogenization.strategy);
  for (double eps : cfg.homogenization.epsilons) specs.push_back(PerforationSpec::from_mu(eps, cfg.homogenization.mu, strategy));
  return specs;
}

void write_sweep(Context& c, const HomogenizationResult& res) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : res.rows)
    rows.push_back({r.epsilon, r.r, static_cast<double>(r.n_holes), r.eL2, r.eH1_plain, r.eH1_corr, r.energy_eps,
                    r.energy_limit, r.defect, r.mu_times_mass});
  c.write("sweep.csv", table_csv({"epsilon", "r", "n_holes", "eL2", "eH1_plain", "eH1_corr", "energy_eps",
                                  "energy_limit", "defect", "mu_times_mass"},
                                 rows));
  if (!res.rows.empty()) {
    const auto& fine = res.rows.back();
    c.write("fields_finest.csv", fields_csv({"u0", "u_no_mu", "u_eps", "w"}, {res.u0, res.u_no_mu, fine.u_eps, fine.corrector}));
  }
}

void dispatch(Context& c) {
  const RunConfig& cfg = c.cfg;
  auto& out = c.outcome;
  const auto mesh = make_mesh(cfg.mesh);
  const auto A = as_data("coefficient", [&] { return make_coefficient(cfg.coefficient, *mesh); });
  auto F = [&](const NonlinearityConfig& n, const char* sec) {
    return as_data(sec, [&] { return make_nonlinearity(n, mesh, cfg.base_dir); });
  };
  const auto scfg = make_solver_config(cfg.solver);

  switch (cfg.kind) {
    case ExperimentKind::solve:
      run_solve(c, mesh, A, F(cfg.nonlinearity, "nonlinearity"), scfg);
      return;
    case ExperimentKind::comparison:
      out = comparison_experiment(mesh, A, F(cfg.nonlinearity, "nonlinearity"), F(cfg.nonlinearity2, "nonlinearity2"), scfg);
      return;
    case ExperimentKind::uniqueness:
      out = uniqueness_experiment(mesh, A, F(cfg.nonlinearity, "nonlinearity"), cfg.uniqueness.starts, scfg, c.seed);
      return;
    case ExperimentKind::nonuniqueness: {
      NonuniquenessOptions o;
      o.start_fractions = cfg.nonuniqueness.fractions;
      o.perturbation = cfg.nonuniqueness.perturbation;
      o.ray_tol = cfg.nonuniqueness.ray_tol;
      o.separation = cfg.nonuniqueness.separation;
      o.seed = c.seed;
      out = nonuniqueness_experiment(mesh, A, cfg.nonuniqueness.k, scfg, o);
      return;
    }
    case ExperimentKind::stability: {
      StabilityOptions o;
      o.levels = cfg.stability.levels;
      o.slack = cfg.stability.slack;
      o.stab_tol = cfg.stability.stab_tol;
      out = stability_experiment(mesh, A, F(cfg.nonlinearity, "nonlinearity"), scfg, o);
      return;
    }
    case ExperimentKind::homogenization:
    case ExperimentKind::corrector: {
      const auto specs = as_data("homogenization", [&] { return sweep_specs(cfg); });
      HomogenizationOptions o;
      o.defect_tol = cfg.homogenization.defect_tol;
      o.threads = c.threads;
      auto res = homogenization_experiment(mesh, A, F(cfg.nonlinearity, "nonlinearity"), specs, scfg, o);
      auto notes = res.outcome.notes;
      if (cfg.kind == ExperimentKind::homogenization) {
        out = res.outcome;
      } else {
        out = corrector_experiment(res);
        out.notes.insert(out.notes.end(), notes.begin(), notes.end());
      }
      write_sweep(c, res);
      return;
    }
    case ExperimentKind::capacity: {
      out.name = "capacity";
      const auto& cc = cfg.capacity;
      const auto cap = discrete_capacity(cc.R, cc.r, cc.h);
      const double rel = std::abs(cap.capacity / cap.annulus_oracle - 1.0);
      out.set("capacity", cap.capacity);
      out.set("annulus_oracle", cap.annulus_oracle);
      out.set("relative_error", rel);
      out.set("tolerance", cc.tolerance);
      bool pass = rel <= cc.tolerance;
      if (cc.mu > 0.0) {
        const auto spec = as_data("capacity", [&] { return PerforationSpec::from_mu(cc.epsilon, cc.mu); });
        const auto density = capacity_density(spec, cc.density_h);
        const double drel = std::abs(density.mu / cc.mu - 1.0);
        out.set("radius", spec.radius);
        out.set("density", density.mu);
        out.set("density_relative_error", drel);
        out.set("density_tolerance", cc.density_tolerance);
        pass = pass && drel <= cc.density_tolerance;
      }
      out.pass = pass;
      return;
    }
  }
}

std::mutex results_mutex;

}  // namespace

RunRecord run_experiment(const RunConfig& cfg, const RunOptions& opts) {
  RunRecord rec;
  rec.name = cfg.name;
  rec.kind = to_string(cfg.kind);
  const auto t0 = std::chrono::steady_clock::now();
  Context c{cfg, opts.out_dir / cfg.name, opts.seed.value_or(cfg.seed), std::max(1, opts.threads), rec.outcome};
  try {
    dispatch(c);
    rec.exit_code = rec.outcome.pass ? kExitPass : kExitFail;
  } catch (const DataError& e) {
    rec.exit_code = kExitConfig;
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.exit_code = kExitFail;
    rec.error = e.what();
    rec.outcome.pass = false;
  }
  rec.outcome.name = cfg.name;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_atomic(c.dir / "config.ini", serialize_config(cfg));
    write_atomic(c.dir / "outcome.json", record_json(rec).dump(2) + "\n");
  } catch (const std::exception& e) {
    if (rec.error.empty()) rec.error = e.what();
    if (rec.exit_code == kExitPass) rec.exit_code = kExitFail;
  }
  return rec;
}

void append_results(const fs::path& out_dir, const RunRecord& rec) {
  std::lock_guard lock(results_mutex);
  const auto path = out_dir / "results.jsonl";
  std::string body = fs::exists(path) ? read_text(path) : std::string();
  body += record_json(rec).dump() + "\n";
  write_atomic(path, body);
}

namespace {

void print_record(const RunRecord& rec, std::ostream& out) {
  out << (rec.exit_code == kExitPass ? "PASS " : "FAIL ") << rec.name << " (" << rec.kind << ", " << std::fixed
      << std::setprecision(2) << rec.wall_seconds << " s)" << std::defaultfloat << "\n";
  if (rec.exit_code != kExitPass) {
    for (const auto& [k, v] : rec.outcome.metrics) out << "  " << k << " = " << format_double(v) << "\n";
    for (const auto& n : rec.outcome.notes) out << "  note: " << n << "\n";
    if (!rec.error.empty()) out << "  error: " << rec.error << "\n";
  }
}

}  // namespace

int run(const fs::path& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << config_path.string() << ": " << e.what() << "\n";
    return kExitConfig;
  }
  const auto rec = run_experiment(cfg, opts);
  if (rec.exit_code == kExitConfig) {
    err << config_path.string() << ": " << rec.error << "\n";
    return kExitConfig;
  }
  append_results(opts.out_dir, rec);
  print_record(rec, out);
  return rec.exit_code;
}

int suite(const fs::path& manifest_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_text(manifest_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
  const fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  std::vector<fs::path> paths;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    paths.push_back(base / line.substr(b, e - b + 1));
  }

  // Load everything first so names can be made unique before anything runs.
  std::vector<RunRecord> records(paths.size());
  std::vector<std::optional<RunConfig>> configs(paths.size());
  std::set<std::string> taken;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    try {
      configs[i] = load_config(paths[i]);
      std::string name = configs[i]->name;
      for (int k = 2; taken.count(name); ++k) name = configs[i]->name + "_" + std::to_string(k);
      configs[i]->name = name;
      taken.insert(name);
    } catch (const ConfigError& e) {
      records[i].name = paths[i].stem().string();
      records[i].kind = "config";
      records[i].exit_code = kExitConfig;
      records[i].error = e.what();
      err << paths[i].string() << ": " << e.what() << "\n";
    }
  }

  const std::size_t workers = static_cast<std::size_t>(std::max(1, opts.threads));
  RunOptions inner = opts;
  inner.threads = 1;
  for (std::size_t start = 0; start < paths.size(); start += workers) {
    const std::size_t stop = std::min(paths.size(), start + workers);
    std::vector<std::pair<std::size_t, std::future<RunRecord>>> batch;
    for (std::size_t i = start; i < stop; ++i) {
      if (!configs[i]) continue;
      if (workers == 1) {
        records[i] = run_experiment(*configs[i], opts);
      } else {
        batch.emplace_back(i, std::async(std::launch::async, [&, i] { return run_experiment(*configs[i], inner); }));
      }
    }
    for (auto& [i, f] : batch) records[i] = f.get();
    for (std::size_t i = start; i < stop; ++i) {
      append_results(opts.out_dir, records[i]);
      print_record(records[i], out);
    }
  }

  std::ostringstream table;
  table << std::left << std::setw(28) << "name" << std::setw(16) << "kind" << std::setw(6) << "pass" << std::setw(10)
        << "wall_s"
        << "key metrics\n";
  bool all = true;
  for (const auto& rec : records) {
    all = all && rec.exit_code == kExitPass;
    std::ostringstream wall;
    wall << std::fixed << std::setprecision(2) << rec.wall_seconds;
    std::string keys;
    for (std::size_t k = 0; k < rec.outcome.metrics.size() && k < 4; ++k)
      keys += (k ? " " : "") + rec.outcome.metrics[k].first + "=" + format_double(rec.outcome.metrics[k].second);
    if (!rec.error.empty()) keys += (keys.empty() ? "" : " ") + std::string("error: ") + rec.error;
    table << std::left << std::setw(28) << rec.name << std::setw(16) << rec.kind << std::setw(6)
          << (rec.exit_code == kExitPass ? "yes" : "no") << std::setw(10) << wall.str() << keys << "\n";
  }
  try {
    write_atomic(opts.out_dir / "summary.txt", table.str());
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitFail;
  }
  out << table.str();
  return all ? kExitPass : kExitFail;
}

}  // namespace singhom
