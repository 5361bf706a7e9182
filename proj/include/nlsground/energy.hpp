#pragma once
// The coupled energy functional J, the dilation-derivative functional P whose
// zero set is the constraint manifold, the mass-preserving fiber map and its
// one-dimensional reduction Psi, the unique fiber projection, coercivity
// constants, the gradient lower bound on the manifold, Lagrange multipliers,
// and the PDE residual of the stationary system
//   -Δu + λ1 u = μ1 |u|^{p-2}u + β r1 |u|^{r1-2}u |v|^{r2}
//   -Δv + λ2 v = μ2 |v|^{q-2}v + β r2 |u|^{r1} |v|^{r2-2}v.

#include <utility>
#include <vector>

#include "nlsground/radial.hpp"

namespace nlsground {

struct SystemParams {
  int dim = 3;
  double p = 4.0, q = 4.0;
  double r1 = 2.0, r2 = 2.0;
  double mu1 = 1.0, mu2 = 1.0;
  double beta = 1.0;
  double a = 1.0, b = 1.0;  // prescribed masses
};

// Enforces 2+4/N < p, q, r1+r2 < 2*, r1, r2 > 1, mu > 0, beta >= 0, a, b > 0.
void validate_system(const SystemParams& prm);

struct Pair {
  RadialField u, v;
};

Pair make_pair(RadialField u, RadialField v);  // checks same grid

// One quadrature pass over everything the functionals need.
struct PairIntegrals {
  double grad_u = 0, grad_v = 0;
  double mass_u = 0, mass_v = 0;
  double p_u = 0;    // ||u||_p^p
  double q_v = 0;    // ||v||_q^q
  double mixed = 0;  // \int |u|^{r1} |v|^{r2}
};
PairIntegrals cache_integrals(const SystemParams& prm, const Pair& pair);

double energy_J(const SystemParams& prm, const PairIntegrals& c);
double energy_J(const SystemParams& prm, const Pair& pair);
double pohozaev_P(const SystemParams& prm, const PairIntegrals& c);
double pohozaev_P(const SystemParams& prm, const Pair& pair);

struct FunctionalReport {
  double J = 0, P = 0;
  double psi2 = 0;  // Psi''(1)
  double mass_u = 0, mass_v = 0;
  double grad_u = 0, grad_v = 0;
};
FunctionalReport functional_report(const SystemParams& prm, const Pair& pair);

Pair dilate_pair(const Pair& pair, double t);

// (Psi(t), Psi'(t), Psi''(t)) where Psi(t) = J[t*u, t*v], evaluated through
// the exact power laws in t from the cached integrals of the undilated pair.
struct PsiValues {
  double value = 0, d1 = 0, d2 = 0;
};
PsiValues psi_derivatives(const SystemParams& prm, const PairIntegrals& c, double t);
PsiValues psi_derivatives(const SystemParams& prm, const Pair& pair, double t);

// Root of grad_sum = sum_i coef_i t^{expo_i} (coef_i >= 0, expo_i > 0, at
// least one positive term): the unique zero of the strictly decreasing
// g(t) = grad_sum - sum_i coef_i t^{expo_i}.
double fiber_root(double grad_sum, const std::vector<std::pair<double, double>>& terms);

// The unique t with d/dt J[t*u, t*v] = 0; sign law: t <=> 1 as P[u,v] <=> 0.
double project_fiber(const SystemParams& prm, const PairIntegrals& c);
double project_fiber(const SystemParams& prm, const Pair& pair);

// (tau, C0): J >= C0 (|grad u|^2 + |grad v|^2) on the manifold, with
// tau = max{2/((p-2)N), 2/((q-2)N), 2/((r1+r2-2)N)} and C0 = 1/2 - tau.
std::pair<double, double> coercivity_constants(const SystemParams& prm);

// delta_{(a,b)}: the manifold-wide lower bound on |grad u|^2 + |grad v|^2,
// the smallest of the three interpolation-inequality branches evaluated at
// total mass a+b. Cp, Cq, Cr are the sharp constants for exponents p, q, r1+r2.
double grad_lower_bound(const SystemParams& prm, double Cp, double Cq, double Cr);

// Lagrange multipliers from testing the two equations against u and v. A
// zero-mass component has no multiplier and yields NaN in its slot; a fully
// zero pair is a parameter error.
std::pair<double, double> multipliers(const SystemParams& prm, const Pair& pair);

// Max over both equations of ||LHS - RHS||_inf / peak nonlinear term.
double pde_residual(const SystemParams& prm, const Pair& pair, double l1, double l2);

}  // namespace nlsground
