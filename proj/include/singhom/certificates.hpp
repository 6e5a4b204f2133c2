#pragma once

#include <cstdint>
#include <vector>

#include "singhom/fem.hpp"
#include "singhom/nonlinearity.hpp"

namespace singhom {

struct CertificateSides {
  double lhs = 0.0;
  double rhs = 0.0;
  // max(0, lhs - rhs)
  double slack() const { return lhs > rhs ? lhs - rhs : 0.0; }
};

// lhs = sum over nodes with u <= delta of m_i min(F(x_i, u_i), n) phi_i
// (m_i the lumped mass over the whole mesh); rhs = sum over elements of
// |e| A Du . Dphi Z_delta(mean of u on e).
CertificateSides singular_mass_certificate(const FieldFunction& u, const Nonlinearity& F, const Coefficient& A,
                                           const FieldFunction& phi, double delta, double n);

struct ZeroSetReport {
  double tol_zero = 0.0;
  std::vector<int> nodes;  // free nodes with u <= tol_zero
  double max_f = 0.0;      // of f on those nodes
  double max_F = 0.0;      // of F(x, tol_zero) capped at n, on those nodes
  bool violation = false;  // f > 0 somewhere on the zero set
};

// tol_zero <= 0 selects 1e-8 * max |u|.
ZeroSetReport zero_set_diagnostics(const FieldFunction& u, const Nonlinearity& F, double n, double tol_zero = 0.0);

// Per j: lhs = alpha |G_{j+1}(u)|^2_{H1}, rhs = 2 sum_i m_i h_i G_{j+1}(u_i).
std::vector<CertificateSides> levelset_energy_certificate(const FieldFunction& u, const FieldFunction& h, double alpha,
                                                          const std::vector<int>& j_list);

// Largest u^(1-gamma) - ((1-gamma) u + gamma) over `samples` random pairs
// with u in [0, 100) and gamma in (0, 1]; <= 0 means the inequality held.
double young_max_violation(std::size_t samples, std::uint64_t seed);

}  // namespace singhom
