#include "singhom/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "singhom/cutoff.hpp"

namespace singhom {

namespace {

std::vector<double> nodal_weights(const MeshPtr& mesh) { return lumped_mass(*mesh, DofMap::all_nodes(mesh)); }

}  // namespace

CertificateSides singular_mass_certificate(const FieldFunction& u, const Nonlinearity& F, const Coefficient& A,
                                           const FieldFunction& phi, double delta, double n) {
  if (!(delta > 0.0)) throw std::invalid_argument("singular_mass_certificate: delta must be positive");
  if (u.size() != phi.size() || u.size() != F.size())
    throw std::invalid_argument("singular_mass_certificate: field sizes differ");
  if (phi.min() < 0.0) throw std::invalid_argument("singular_mass_certificate: phi must be >= 0");
  const Mesh& mesh = *u.mesh;
  CertificateSides out;

  const auto m = nodal_weights(u.mesh);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] <= delta && phi[i] != 0.0) out.lhs += m[i] * F.truncated(i, u[i], n) * phi[i];

  const std::size_t npe = mesh.nodes_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const auto g = mesh.basis_gradients(e);
    double ux = 0.0, uy = 0.0, px = 0.0, py = 0.0, mean = 0.0;
    for (std::size_t a = 0; a < npe; ++a) {
      ux += u[el[a]] * g[a].x;
      uy += u[el[a]] * g[a].y;
      px += phi[el[a]] * g[a].x;
      py += phi[el[a]] * g[a].y;
      mean += u[el[a]];
    }
    mean /= static_cast<double>(npe);
    const double z = z_delta(mean, delta);
    if (z == 0.0) continue;
    const Mat2& a = A[e];
    out.rhs += mesh.element_measure(e) * ((a.a11 * ux + a.a12 * uy) * px + (a.a21 * ux + a.a22 * uy) * py) * z;
  }
  return out;
}

ZeroSetReport zero_set_diagnostics(const FieldFunction& u, const Nonlinearity& F, double n, double tol_zero) {
  ZeroSetReport rep;
  rep.tol_zero = tol_zero > 0.0 ? tol_zero : 1e-8 * u.max_abs();
  const Mesh& mesh = *u.mesh;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!mesh.is_free(i) || u[i] > rep.tol_zero) continue;
    rep.nodes.push_back(static_cast<int>(i));
    rep.max_f = std::max(rep.max_f, F.f()[i]);
    rep.max_F = std::max(rep.max_F, F.truncated(i, rep.tol_zero, n));
  }
  rep.violation = rep.max_f > 0.0;
  return rep;
}

std::vector<CertificateSides> levelset_energy_certificate(const FieldFunction& u, const FieldFunction& h, double alpha,
                                                          const std::vector<int>& j_list) {
  if (!(alpha > 0.0)) throw std::invalid_argument("levelset_energy_certificate: alpha must be positive");
  if (u.size() != h.size()) throw std::invalid_argument("levelset_energy_certificate: field sizes differ");
  const auto m = nodal_weights(u.mesh);
  std::vector<CertificateSides> out;
  out.reserve(j_list.size());
  for (int j : j_list) {
    if (j < 0) throw std::invalid_argument("levelset_energy_certificate: j must be >= 0");
    FieldFunction G = u;
    for (std::size_t i = 0; i < G.size(); ++i) G[i] = gk(u[i], j + 1.0);
    CertificateSides s;
    const double semi = h1_seminorm(G);
    s.lhs = alpha * semi * semi;
    for (std::size_t i = 0; i < G.size(); ++i) s.rhs += 2.0 * m[i] * h[i] * G[i];
    out.push_back(s);
  }
  return out;
}

double young_max_violation(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> du(0.0, 100.0);
  std::uniform_real_distribution<double> dg(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const double u = du(rng);
    const double gamma = 1.0 - dg(rng);  // (0, 1]
    worst = std::max(worst, std::pow(u, 1.0 - gamma) - ((1.0 - gamma) * u + gamma));
  }
  return worst;
}

}  // namespace singhom
