#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "singhom/config.hpp"
#include "singhom/cutoff.hpp"
#include "singhom/fem.hpp"
#include "singhom/homogenization.hpp"
#include "singhom/mesh.hpp"
#include "singhom/nonlinearity.hpp"
#include "singhom/perforation.hpp"
#include "singhom/runner.hpp"
#include "singhom/solver.hpp"
#include "singhom/verification.hpp"

namespace py = pybind11;
using namespace singhom;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// A scalar broadcasts to every node; an array must have one value per node.
FieldFunction nodal(const MeshPtr& mesh, const py::object& value, const char* name) {
  if (py::isinstance<py::float_>(value) || py::isinstance<py::int_>(value))
    return FieldFunction::constant(mesh, value.cast<double>());
  auto a = value.cast<Array>();
  if (a.ndim() != 1 || static_cast<std::size_t>(a.size()) != mesh->num_nodes())
    throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(mesh->num_nodes()) +
                                " nodal values");
  return FieldFunction(mesh, std::vector<double>(a.data(), a.data() + a.size()));
}

ScalarMap scalar_map(const std::string& g, double gamma, double lambda, double k, const std::vector<double>& table_s,
                     const std::vector<double>& table_g) {
  switch (scalar_map_kind_from_string(g)) {
    case ScalarMap::Kind::power:
      return ScalarMap::power(gamma);
    case ScalarMap::Kind::oscillating:
      return ScalarMap::oscillating(gamma);
    case ScalarMap::Kind::eigen_trunc:
      return ScalarMap::eigen_trunc(lambda, k);
    case ScalarMap::Kind::table:
      return ScalarMap::table(table_s, table_g, gamma);
  }
  throw std::invalid_argument("unknown g: " + g);
}

Nonlinearity nonlinearity(const MeshPtr& mesh, const std::string& g, double gamma, const py::object& f,
                          const py::object& l, double lambda, double k, const std::vector<double>& table_s,
                          const std::vector<double>& table_g, std::optional<double> lambda_mono) {
  Nonlinearity F(scalar_map(g, gamma, lambda, k, table_s, table_g), nodal(mesh, f, "f"), nodal(mesh, l, "l"),
                 std::nullopt, lambda_mono);
  F.validate();
  return F;
}

Coefficient coefficient(const Mesh& mesh, const std::vector<double>& a) {
  if (a.size() != 4) throw std::invalid_argument("coefficient: expected (a11, a12, a21, a22)");
  return Coefficient::constant(mesh, Mat2{a[0], a[1], a[2], a[3]});
}

py::dict solve(const MeshPtr& mesh, const std::string& g, double gamma, const py::object& f, const py::object& l,
               double lambda, double k, const std::vector<double>& table_s, const std::vector<double>& table_g,
               const std::vector<double>& a, double mu, double theta, double outer_tol, int max_levels,
               double first_level) {
  Nonlinearity F = nonlinearity(mesh, g, gamma, f, l, lambda, k, table_s, table_g, std::nullopt);
  Coefficient A = coefficient(*mesh, a);
  SolverConfig cfg;
  cfg.theta = theta;
  cfg.outer_tol = outer_tol;
  cfg.max_levels = max_levels;
  cfg.first_level = first_level;
  SolveReport rep;
  {
    py::gil_scoped_release release;
    Problem problem(mesh, A, F, mu);
    rep = solve_singular(problem, cfg);
  }
  py::dict out;
  out["u"] = to_array(rep.u.values);
  out["converged"] = rep.converged();
  out["n_final"] = rep.n_final;
  out["outer_iters"] = rep.outer_iters;
  out["inner_iters"] = rep.inner_iters;
  out["energy_identity_residual"] = rep.energy_identity_residual;
  out["cauchy_gap"] = rep.cauchy_gap;
  out["linf"] = rep.linf;
  out["levels"] = rep.levels;
  out["history"] = rep.history;
  return out;
}

py::dict run_captured(bool is_suite, const std::string& path, const std::string& out_dir, int threads,
                      std::optional<std::uint64_t> seed) {
  RunOptions opts;
  opts.out_dir = out_dir;
  opts.threads = threads;
  opts.seed = seed;
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = is_suite ? suite(path, opts, out, err) : run(path, opts, out, err);
  }
  py::dict d;
  d["exit_code"] = code;
  d["stdout"] = out.str();
  d["stderr"] = err.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_singhom, m) {
  m.doc() = "Singular semilinear Dirichlet solver and perforated-domain homogenization";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const SolverError& e) {
      py::set_error(PyExc_RuntimeError, e.what());
    }
  });

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("dim", &Mesh::dim)
      .def_property_readonly("nx", &Mesh::nx)
      .def_property_readonly("ny", &Mesh::ny)
      .def_property_readonly("h", &Mesh::h)
      .def_property_readonly("num_nodes", &Mesh::num_nodes)
      .def_property_readonly("num_elements", &Mesh::num_elements)
      .def_property_readonly("nodes",
                             [](const Mesh& mesh) {
                               py::array_t<double> a({static_cast<py::ssize_t>(mesh.num_nodes()), py::ssize_t{2}});
                               auto r = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
                                 r(i, 0) = mesh.node(i).x;
                                 r(i, 1) = mesh.node(i).y;
                               }
                               return a;
                             })
      .def_property_readonly("free", [](const Mesh& mesh) {
        py::array_t<bool> a(static_cast<py::ssize_t>(mesh.num_nodes()));
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) a.mutable_data()[i] = mesh.is_free(i);
        return a;
      });

  // Mesh objects are immutable; the const_pointer_cast only adapts the holder type.
  m.def(
      "rectangle_mesh",
      [](double width, double height, int nx, int ny) {
        return std::const_pointer_cast<Mesh>(build_rectangle_mesh(width, height, nx, ny));
      },
      py::arg("width"), py::arg("height"), py::arg("nx"), py::arg("ny"));
  m.def(
      "interval_mesh",
      [](double length, int nx) { return std::const_pointer_cast<Mesh>(build_interval_mesh(length, nx)); },
      py::arg("length"), py::arg("nx"));

  m.def(
      "solve",
      [](const std::shared_ptr<Mesh>& mesh, const std::string& g, double gamma, const py::object& f,
         const py::object& l, double lambda, double k, const std::vector<double>& table_s,
         const std::vector<double>& table_g, const std::vector<double>& a, double mu, double theta, double outer_tol,
         int max_levels, double first_level) {
        return solve(mesh, g, gamma, f, l, lambda, k, table_s, table_g, a, mu, theta, outer_tol, max_levels,
                     first_level);
      },
      "Solve -div(A Du) + mu u = f g(u) + l, u = 0 on the boundary, by truncation and level doubling.",
      py::arg("mesh"), py::kw_only(), py::arg("g") = "power", py::arg("gamma") = 0.5, py::arg("f") = 1.0,
      py::arg("l") = 0.0, py::arg("lam") = 0.0, py::arg("k") = 1.0, py::arg("table_s") = std::vector<double>{},
      py::arg("table_g") = std::vector<double>{}, py::arg("a") = std::vector<double>{1.0, 0.0, 0.0, 1.0},
      py::arg("mu") = 0.0, py::arg("theta") = 0.5, py::arg("outer_tol") = 1e-6, py::arg("max_levels") = 40,
      py::arg("first_level") = 1.0);

  m.def(
      "estimate_lambda_mono",
      [](const std::shared_ptr<Mesh>& mesh, const std::string& g, double gamma, const py::object& f,
         const py::object& l, double lambda, double k, const std::vector<double>& table_s,
         const std::vector<double>& table_g) {
        return estimate_lambda_mono(
            nonlinearity(mesh, g, gamma, f, l, lambda, k, table_s, table_g, Nonlinearity::kInfinity));
      },
      py::arg("mesh"), py::kw_only(), py::arg("g") = "power", py::arg("gamma") = 0.5, py::arg("f") = 1.0,
      py::arg("l") = 0.0, py::arg("lam") = 0.0, py::arg("k") = 1.0, py::arg("table_s") = std::vector<double>{},
      py::arg("table_g") = std::vector<double>{});

  m.def(
      "dirichlet_eigenpair",
      [](const std::shared_ptr<Mesh>& mesh, const std::vector<double>& a, bool lumped) {
        Eigenpair e = dirichlet_eigenpair(mesh, coefficient(*mesh, a), lumped);
        return py::make_tuple(e.lambda, to_array(e.phi.values));
      },
      "First Dirichlet eigenvalue and M-normalized eigenvector.", py::arg("mesh"),
      py::arg("a") = std::vector<double>{1.0, 0.0, 0.0, 1.0}, py::arg("lumped") = false);

  m.def(
      "discrete_capacity",
      [](double R, double r, double h) {
        CapacityResult c;
        {
          py::gil_scoped_release release;
          c = discrete_capacity(R, r, h);
        }
        py::dict d;
        d["capacity"] = c.capacity;
        d["annulus_oracle"] = c.annulus_oracle;
        d["unknowns"] = c.unknowns;
        d["cg_iterations"] = c.cg_iterations;
        return d;
      },
      py::arg("R"), py::arg("r"), py::arg("h"));

  m.def("radius_law", &radius_law, py::arg("epsilon"), py::arg("dim"), py::arg("C0"));
  m.def("prescribed_mu_radius", &prescribed_mu_radius, py::arg("epsilon"), py::arg("C0"));
  m.def("c0_for_mu", &c0_for_mu, py::arg("mu"));
  m.def(
      "strange_term_mu", [](int dim, double C0) { return strange_term_formula(dim, C0).mu; }, py::arg("dim"),
      py::arg("C0"));

  m.def("tk", &tk, py::arg("s"), py::arg("k"));
  m.def("gk", &gk, py::arg("s"), py::arg("k"));
  m.def("z_delta", &z_delta, py::arg("s"), py::arg("delta"));
  m.def("y_delta", &y_delta, py::arg("s"), py::arg("delta"));

  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      "Parse and validate INI config text; return its canonical form.", py::arg("text"));
  m.def(
      "run",
      [](const std::string& config, const std::string& out_dir, int threads, std::optional<std::uint64_t> seed) {
        return run_captured(false, config, out_dir, threads, seed);
      },
      py::arg("config"), py::arg("out_dir") = "results", py::arg("threads") = 1, py::arg("seed") = py::none());
  m.def(
      "suite",
      [](const std::string& manifest, const std::string& out_dir, int threads, std::optional<std::uint64_t> seed) {
        return run_captured(true, manifest, out_dir, threads, seed);
      },
      py::arg("manifest"), py::arg("out_dir") = "results", py::arg("threads") = 1, py::arg("seed") = py::none());
}
