#include "singhom/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "singhom/field_io.hpp"

namespace singhom {

namespace pt = boost::property_tree;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::solve:
      return "solve";
    case ExperimentKind::comparison:
      return "comparison";
    case ExperimentKind::uniqueness:
      return "uniqueness";
    case ExperimentKind::nonuniqueness:
      return "nonuniqueness";
    case ExperimentKind::stability:
      return "stability";
    case ExperimentKind::homogenization:
      return "homogenization";
    case ExperimentKind::corrector:
      return "corrector";
    case ExperimentKind::capacity:
      return "capacity";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::solve, ExperimentKind::comparison, ExperimentKind::uniqueness,
                 ExperimentKind::nonuniqueness, ExperimentKind::stability, ExperimentKind::homogenization,
                 ExperimentKind::corrector, ExperimentKind::capacity})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind '" + s +
                              "' (expected solve, comparison, uniqueness, nonuniqueness, stability, "
                              "homogenization, corrector or capacity)");
}

bool RunConfig::operator==(const RunConfig& o) const {
  return kind == o.kind && name == o.name && seed == o.seed && mesh == o.mesh && coefficient == o.coefficient &&
         nonlinearity == o.nonlinearity && nonlinearity2 == o.nonlinearity2 && solver == o.solver &&
         checks == o.checks && uniqueness == o.uniqueness && nonuniqueness == o.nonuniqueness &&
         stability == o.stability && homogenization == o.homogenization && capacity == o.capacity;
}

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message),
      field_(std::move(field)),
      line_(line),
      message_(message) {}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// 1-based line of `key` inside `[section]`, or of the section header if key is empty.
int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream is(text);
  std::string line, current;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section) return n;
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

double to_double(const std::string& s) {
  const auto t = trim(s);
  if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw std::invalid_argument("not a number: '" + t + "'");
  return v;
}

long long to_integer(const std::string& s) {
  const auto t = trim(s);
  long long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw std::invalid_argument("not an integer: '" + t + "'");
  return v;
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  const auto t = trim(s);
  if (t.empty()) return out;
  std::istringstream is(t);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(to_double(item));
  return out;
}

std::string from_double(double v) { return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : format_double(v); }

std::string from_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + from_double(v[i]);
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  // nullopt: omit from the output.
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class Member>
Field number(std::string section, std::string key, Member m) {
  return {section, key,
          [m](RunConfig& c, const std::string& v) {
            auto& ref = std::invoke(m, c);
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(ref)>>)
              ref = to_double(v);
            else
              ref = static_cast<std::decay_t<decltype(ref)>>(to_integer(v));
          },
          [m](const RunConfig& c) -> std::optional<std::string> {
            const auto& ref = std::invoke(m, c);
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(ref)>>)
              return from_double(ref);
            else
              return std::to_string(ref);
          }};
}

template <class Member>
Field text(std::string section, std::string key, Member m) {
  return {section, key, [m](RunConfig& c, const std::string& v) { std::invoke(m, c) = trim(v); },
          [m](const RunConfig& c) -> std::optional<std::string> { return std::invoke(m, c); }};
}

template <class Member>
Field list(std::string section, std::string key, Member m) {
  return {section, key, [m](RunConfig& c, const std::string& v) { std::invoke(m, c) = to_list(v); },
          [m](const RunConfig& c) -> std::optional<std::string> { return from_list(std::invoke(m, c)); }};
}

void add_nonlinearity(std::vector<Field>& f, const std::string& sec, NonlinearityConfig RunConfig::*which) {
  auto nl = [which](auto member) {
    return [which, member](auto& c) -> auto& { return (c.*which).*member; };
  };
  f.push_back(text(sec, "g", nl(&NonlinearityConfig::g)));
  f.push_back(number(sec, "gamma", nl(&NonlinearityConfig::gamma)));
  f.push_back(number(sec, "lambda", nl(&NonlinearityConfig::lambda)));
  f.push_back(number(sec, "k", nl(&NonlinearityConfig::k)));
  f.push_back(list(sec, "table_s", nl(&NonlinearityConfig::table_s)));
  f.push_back(list(sec, "table_g", nl(&NonlinearityConfig::table_g)));
  f.push_back(number(sec, "f", nl(&NonlinearityConfig::f)));
  f.push_back(number(sec, "l", nl(&NonlinearityConfig::l)));
  f.push_back(text(sec, "f_file", nl(&NonlinearityConfig::f_file)));
  f.push_back(text(sec, "l_file", nl(&NonlinearityConfig::l_file)));
  f.push_back(text(sec, "h_file", nl(&NonlinearityConfig::h_file)));
  f.push_back({sec, "lambda_mono",
               [which](RunConfig& c, const std::string& v) { (c.*which).lambda_mono = to_double(v); },
               [which](const RunConfig& c) -> std::optional<std::string> {
                 const auto& lm = (c.*which).lambda_mono;
                 if (!lm) return std::nullopt;
                 return from_double(*lm);
               }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"experiment", "kind",
                 [](RunConfig& c, const std::string& v) { c.kind = experiment_kind_from_string(trim(v)); },
                 [](const RunConfig& c) -> std::optional<std::string> { return to_string(c.kind); }});
    f.push_back(text("experiment", "name", &RunConfig::name));
    f.push_back({"experiment", "seed",
                 [](RunConfig& c, const std::string& v) {
                   const auto n = to_integer(v);
                   if (n < 0) throw std::invalid_argument("seed must be >= 0");
                   c.seed = static_cast<std::uint64_t>(n);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.seed); }});

    auto mesh = [](auto member) { return [member](auto& c) -> auto& { return c.mesh.*member; }; };
    f.push_back(number("mesh", "dim", mesh(&MeshConfig::dim)));
    f.push_back(number("mesh", "width", mesh(&MeshConfig::width)));
    f.push_back(number("mesh", "height", mesh(&MeshConfig::height)));
    f.push_back(number("mesh", "nx", mesh(&MeshConfig::nx)));
    f.push_back(number("mesh", "ny", mesh(&MeshConfig::ny)));

    auto coef = [](auto member) { return [member](auto& c) -> auto& { return c.coefficient.*member; }; };
    f.push_back(number("coefficient", "a11", coef(&CoefficientConfig::a11)));
    f.push_back(number("coefficient", "a12", coef(&CoefficientConfig::a12)));
    f.push_back(number("coefficient", "a21", coef(&CoefficientConfig::a21)));
    f.push_back(number("coefficient", "a22", coef(&CoefficientConfig::a22)));

    add_nonlinearity(f, "nonlinearity", &RunConfig::nonlinearity);
    add_nonlinearity(f, "nonlinearity2", &RunConfig::nonlinearity2);

    auto sol = [](auto member) { return [member](auto& c) -> auto& { return c.solver.*member; }; };
    f.push_back(number("solver", "theta", sol(&SolverSettings::theta)));
    f.push_back(number("solver", "inner_tol", sol(&SolverSettings::inner_tol)));
    f.push_back(number("solver", "inner_abs_tol", sol(&SolverSettings::inner_abs_tol)));
    f.push_back(number("solver", "max_inner", sol(&SolverSettings::max_inner)));
    f.push_back(number("solver", "outer_tol", sol(&SolverSettings::outer_tol)));
    f.push_back(number("solver", "outer_abs_tol", sol(&SolverSettings::outer_abs_tol)));
    f.push_back(number("solver", "max_levels", sol(&SolverSettings::max_levels)));
    f.push_back(number("solver", "first_level", sol(&SolverSettings::first_level)));
    f.push_back(number("solver", "cg_tol", sol(&SolverSettings::cg_tol)));

    f.push_back(number("checks", "max_energy_residual", [](auto& c) -> auto& { return c.checks.max_energy_residual; }));
    f.push_back({"checks", "expected_linf",
                 [](RunConfig& c, const std::string& v) { c.checks.expected_linf = to_double(v); },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (!c.checks.expected_linf) return std::nullopt;
                   return from_double(*c.checks.expected_linf);
                 }});
    f.push_back(number("checks", "linf_tolerance", [](auto& c) -> auto& { return c.checks.linf_tolerance; }));
    f.push_back(number("uniqueness", "starts", [](auto& c) -> auto& { return c.uniqueness.starts; }));

    auto nu = [](auto member) { return [member](auto& c) -> auto& { return c.nonuniqueness.*member; }; };
    f.push_back(number("nonuniqueness", "k", nu(&NonuniquenessConfig::k)));
    f.push_back(list("nonuniqueness", "fractions", nu(&NonuniquenessConfig::fractions)));
    f.push_back(number("nonuniqueness", "perturbation", nu(&NonuniquenessConfig::perturbation)));
    f.push_back(number("nonuniqueness", "ray_tol", nu(&NonuniquenessConfig::ray_tol)));
    f.push_back(number("nonuniqueness", "separation", nu(&NonuniquenessConfig::separation)));

    auto st = [](auto member) { return [member](auto& c) -> auto& { return c.stability.*member; }; };
    f.push_back(list("stability", "levels", st(&StabilityConfig::levels)));
    f.push_back(number("stability", "slack", st(&StabilityConfig::slack)));
    f.push_back(number("stability", "stab_tol", st(&StabilityConfig::stab_tol)));

    auto ho = [](auto member) { return [member](auto& c) -> auto& { return c.homogenization.*member; }; };
    f.push_back(number("homogenization", "mu", ho(&HomogenizationConfig::mu)));
    f.push_back(list("homogenization", "epsilons", ho(&HomogenizationConfig::epsilons)));
    f.push_back(text("homogenization", "strategy", ho(&HomogenizationConfig::strategy)));
    f.push_back(number("homogenization", "defect_tol", ho(&HomogenizationConfig::defect_tol)));

    auto ca = [](auto member) { return [member](auto& c) -> auto& { return c.capacity.*member; }; };
    f.push_back(number("capacity", "R", ca(&CapacityConfig::R)));
    f.push_back(number("capacity", "r", ca(&CapacityConfig::r)));
    f.push_back(number("capacity", "h", ca(&CapacityConfig::h)));
    f.push_back(number("capacity", "tolerance", ca(&CapacityConfig::tolerance)));
    f.push_back(number("capacity", "epsilon", ca(&CapacityConfig::epsilon)));
    f.push_back(number("capacity", "mu", ca(&CapacityConfig::mu)));
    f.push_back(number("capacity", "density_h", ca(&CapacityConfig::density_h)));
    f.push_back(number("capacity", "density_tolerance", ca(&CapacityConfig::density_tolerance)));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("syntax", static_cast<int>(e.line()), e.message());
  }
  RunConfig cfg;
  cfg.base_dir = base_dir;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, locate(text, "", section), "key outside of any [section]");
    bool known_section = false;
    for (const auto& f : fields()) known_section = known_section || f.section == section;
    if (!known_section) throw ConfigError(section, locate(text, section, ""), "unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      const std::string name = section + "." + key;
      if (!f) throw ConfigError(name, locate(text, section, key), "unknown key");
      try {
        f->set(cfg, value.data());
      } catch (const std::exception& e) {
        throw ConfigError(name, locate(text, section, key), e.what());
      }
    }
  }
  validate_config(cfg, text);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string body;
  try {
    body = read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError("file", 0, e.what());
  }
  return parse_config(body, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    const auto v = f.get(cfg);
    if (!v) continue;
    if (f.section != current) {
      out += (out.empty() ? "[" : "\n[") + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + *v + "\n";
  }
  return out;
}

void validate_config(const RunConfig& c, const std::string& text) {
  auto fail = [&](const std::string& section, const std::string& key, const std::string& msg) {
    throw ConfigError(section + "." + key, text.empty() ? 0 : locate(text, section, key), msg);
  };
  auto positive = [&](const std::string& section, const std::string& key, double v) {
    if (!(v > 0.0)) fail(section, key, "must be > 0 (got " + from_double(v) + ")");
  };

  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos || c.name == "." || c.name == "..")
    fail("experiment", "name", "must be a non-empty plain file name");

  const auto& m = c.mesh;
  if (m.dim != 1 && m.dim != 2) fail("mesh", "dim", "must be 1 or 2");
  positive("mesh", "width", m.width);
  if (m.dim == 2) positive("mesh", "height", m.height);
  if (m.nx < 2) fail("mesh", "nx", "must be >= 2");
  if (m.dim == 2 && m.ny < 2) fail("mesh", "ny", "must be >= 2");

  const Mat2 a{c.coefficient.a11, c.coefficient.a12, c.coefficient.a21, c.coefficient.a22};
  if (!(a.min_sym_eigenvalue() > 0.0)) fail("coefficient", "a11", "coefficient matrix is not coercive");

  auto check_nl = [&](const std::string& sec, const NonlinearityConfig& n) {
    try {
      (void)scalar_map_kind_from_string(n.g);
    } catch (const std::exception& e) {
      fail(sec, "g", e.what());
    }
    if (!(n.gamma > 0.0 && n.gamma <= 1.0)) fail(sec, "gamma", "gamma = " + from_double(n.gamma) + " violates 0 < gamma <= 1");
    if (n.g == "eigen_trunc") {
      if (!(n.lambda >= 0.0)) fail(sec, "lambda", "must be >= 0");
      positive(sec, "k", n.k);
    }
    if (n.g == "table") {
      if (n.table_s.size() < 2 || n.table_s.size() != n.table_g.size())
        fail(sec, "table_s", "table_s and table_g need the same length >= 2");
      try {
        (void)ScalarMap::table(n.table_s, n.table_g, n.gamma);
      } catch (const std::exception& e) {
        fail(sec, "table_s", e.what());
      }
    }
    if (n.f_file.empty() && !(n.f >= 0.0)) fail(sec, "f", "f must be >= 0");
    if (n.l_file.empty() && !(n.l >= 0.0)) fail(sec, "l", "l must be >= 0");
    for (const auto& [key, file] : {std::pair{"f_file", n.f_file}, {"l_file", n.l_file}, {"h_file", n.h_file}}) {
      if (file.empty()) continue;
      const auto p = c.base_dir / file;
      if (!std::filesystem::exists(p)) fail(sec, key, "data file not found: " + p.string());
    }
    if (n.lambda_mono && !(*n.lambda_mono >= 0.0)) fail(sec, "lambda_mono", "must be >= 0");
  };
  check_nl("nonlinearity", c.nonlinearity);
  if (c.kind == ExperimentKind::comparison) check_nl("nonlinearity2", c.nonlinearity2);

  const auto& s = c.solver;
  if (!(s.theta > 0.0 && s.theta <= 1.0)) fail("solver", "theta", "must lie in (0, 1]");
  positive("solver", "inner_tol", s.inner_tol);
  positive("solver", "inner_abs_tol", s.inner_abs_tol);
  positive("solver", "outer_tol", s.outer_tol);
  positive("solver", "outer_abs_tol", s.outer_abs_tol);
  positive("solver", "cg_tol", s.cg_tol);
  positive("solver", "first_level", s.first_level);
  if (s.max_inner < 1) fail("solver", "max_inner", "must be >= 1");
  if (s.max_levels < 1) fail("solver", "max_levels", "must be >= 1");
  positive("checks", "max_energy_residual", c.checks.max_energy_residual);
  positive("checks", "linf_tolerance", c.checks.linf_tolerance);

  if (c.uniqueness.starts < 1) fail("uniqueness", "starts", "must be >= 1");
  const auto& nu = c.nonuniqueness;
  positive("nonuniqueness", "k", nu.k);
  if (nu.fractions.empty()) fail("nonuniqueness", "fractions", "needs at least one start");
  for (double t : nu.fractions)
    if (!(t >= 0.0 && t <= 1.0)) fail("nonuniqueness", "fractions", "fractions must lie in [0, 1]");
  if (!(nu.perturbation >= 0.0)) fail("nonuniqueness", "perturbation", "must be >= 0");
  positive("nonuniqueness", "ray_tol", nu.ray_tol);
  positive("nonuniqueness", "separation", nu.separation);

  const auto& st = c.stability;
  for (std::size_t i = 0; i < st.levels.size(); ++i)
    if (!(st.levels[i] > 0.0) || (i > 0 && !(st.levels[i] > st.levels[i - 1])))
      fail("stability", "levels", "levels must be positive and increasing");
  positive("stability", "slack", st.slack);
  positive("stability", "stab_tol", st.stab_tol);

  const auto& ho = c.homogenization;
  positive("homogenization", "mu", ho.mu);
  for (double e : ho.epsilons)
    if (!(e > 0.0)) fail("homogenization", "epsilons", "epsilons must be > 0");
  try {
    (void)hole_strategy_from_string(ho.strategy);
  } catch (const std::exception& e) {
    fail("homogenization", "strategy", e.what());
  }
  positive("homogenization", "defect_tol", ho.defect_tol);
  if ((c.kind == ExperimentKind::homogenization || c.kind == ExperimentKind::corrector) && m.dim != 2)
    fail("mesh", "dim", "homogenization needs dim = 2");

  const auto& ca = c.capacity;
  positive("capacity", "r", ca.r);
  if (!(ca.R > ca.r)) fail("capacity", "R", "must be > r");
  positive("capacity", "h", ca.h);
  positive("capacity", "tolerance", ca.tolerance);
  positive("capacity", "epsilon", ca.epsilon);
  if (!(ca.mu >= 0.0)) fail("capacity", "mu", "must be >= 0");
  positive("capacity", "density_h", ca.density_h);
  positive("capacity", "density_tolerance", ca.density_tolerance);
}

MeshPtr make_mesh(const MeshConfig& m) {
  return m.dim == 1 ? build_interval_mesh(m.width, m.nx) : build_rectangle_mesh(m.width, m.height, m.nx, m.ny);
}

Coefficient make_coefficient(const CoefficientConfig& c, const Mesh& mesh) {
  return Coefficient::constant(mesh, Mat2{c.a11, c.a12, c.a21, c.a22});
}

Nonlinearity make_nonlinearity(const NonlinearityConfig& c, const MeshPtr& mesh, const std::filesystem::path& base_dir) {
  ScalarMap g = ScalarMap::power(c.gamma);
  switch (scalar_map_kind_from_string(c.g)) {
    case ScalarMap::Kind::power:
      break;
    case ScalarMap::Kind::oscillating:
      g = ScalarMap::oscillating(c.gamma);
      break;
    case ScalarMap::Kind::eigen_trunc:
      g = ScalarMap::eigen_trunc(c.lambda, c.k);
      break;
    case ScalarMap::Kind::table:
      g = ScalarMap::table(c.table_s, c.table_g, c.gamma);
      break;
  }
  auto field = [&](const std::string& file, double constant) {
    return file.empty() ? FieldFunction::constant(mesh, constant) : read_nodal_csv(base_dir / file, mesh);
  };
  std::optional<FieldFunction> h;
  if (!c.h_file.empty()) h = read_nodal_csv(base_dir / c.h_file, mesh);
  Nonlinearity F(g, field(c.f_file, c.f), field(c.l_file, c.l), h, c.lambda_mono);
  F.validate();
  return F;
}

SolverConfig make_solver_config(const SolverSettings& s) {
  SolverConfig cfg;
  cfg.theta = s.theta;
  cfg.inner_tol = s.inner_tol;
  cfg.inner_abs_tol = s.inner_abs_tol;
  cfg.max_inner = s.max_inner;
  cfg.outer_tol = s.outer_tol;
  cfg.outer_abs_tol = s.outer_abs_tol;
  cfg.max_levels = s.max_levels;
  cfg.first_level = s.first_level;
  cfg.cg_tol = s.cg_tol;
  return cfg;
}

}  // namespace singhom
