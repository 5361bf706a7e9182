#include "nlsground/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlsground/scalar_ground.hpp"

namespace nlsground {
namespace {

double gamma_of(int dim, double s) { return (s - 2.0) * dim / 2.0; }

// sign(x) |x|^e, the odd power appearing in the nonlinearities.
double opow(double x, double e) {
  return std::copysign(std::pow(std::abs(x), e), x);
}

}  // namespace

void validate_system(const SystemParams& prm) {
  if (prm.dim < 1 || prm.dim > 4) throw std::invalid_argument("dimension must be 1..4");
  const double lo = mass_critical_exponent(prm.dim);
  const double hi = sobolev_critical_exponent(prm.dim);
  for (double s : {prm.p, prm.q, prm.r1 + prm.r2})
    if (!(s > lo) || !(s < hi))
      throw std::invalid_argument("exponents must lie in (2+4/N, 2*)");
  if (!(prm.r1 > 1.0) || !(prm.r2 > 1.0))
    throw std::invalid_argument("coupling exponents must exceed 1");
  if (!(prm.mu1 > 0.0) || !(prm.mu2 > 0.0))
    throw std::invalid_argument("mu1, mu2 must be positive");
  if (!(prm.beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(prm.a > 0.0) || !(prm.b > 0.0)) throw std::invalid_argument("masses must be positive");
}

Pair make_pair(RadialField u, RadialField v) {
  require_same_grid(u, v);
  return Pair{std::move(u), std::move(v)};
}

PairIntegrals cache_integrals(const SystemParams& prm, const Pair& pair) {
  require_same_grid(pair.u, pair.v);
  PairIntegrals c;
  c.grad_u = grad_norm_sq(pair.u);
  c.grad_v = grad_norm_sq(pair.v);
  c.mass_u = mass(pair.u);
  c.mass_v = mass(pair.v);
  c.p_u = lp_norm_pow(pair.u, prm.p);
  c.q_v = lp_norm_pow(pair.v, prm.q);
  c.mixed = mixed_integral(pair.u, pair.v, prm.r1, prm.r2);
  return c;
}

double energy_J(const SystemParams& prm, const PairIntegrals& c) {
  return 0.5 * (c.grad_u + c.grad_v) - prm.mu1 / prm.p * c.p_u -
         prm.mu2 / prm.q * c.q_v - prm.beta * c.mixed;
}

double energy_J(const SystemParams& prm, const Pair& pair) {
  return energy_J(prm, cache_integrals(prm, pair));
}

double pohozaev_P(const SystemParams& prm, const PairIntegrals& c) {
  const int N = prm.dim;
  return c.grad_u + c.grad_v - gamma_of(N, prm.p) / prm.p * prm.mu1 * c.p_u -
         gamma_of(N, prm.q) / prm.q * prm.mu2 * c.q_v -
         gamma_of(N, prm.r1 + prm.r2) * prm.beta * c.mixed;
}

double pohozaev_P(const SystemParams& prm, const Pair& pair) {
  return pohozaev_P(prm, cache_integrals(prm, pair));
}

FunctionalReport functional_report(const SystemParams& prm, const Pair& pair) {
  const PairIntegrals c = cache_integrals(prm, pair);
  FunctionalReport rep;
  rep.J = energy_J(prm, c);
  rep.P = pohozaev_P(prm, c);
  rep.psi2 = psi_derivatives(prm, c, 1.0).d2;
  rep.mass_u = c.mass_u;
  rep.mass_v = c.mass_v;
  rep.grad_u = c.grad_u;
  rep.grad_v = c.grad_v;
  return rep;
}

Pair dilate_pair(const Pair& pair, double t) {
  return Pair{dilate_field(pair.u, t), dilate_field(pair.v, t)};
}

PsiValues psi_derivatives(const SystemParams& prm, const PairIntegrals& c, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("fiber parameter must be positive");
  const int N = prm.dim;
  const double A = c.grad_u + c.grad_v;
  struct Term {
    double coef, g;  // contributes coef * t^g to Psi
  };
  const Term terms[3] = {
      {prm.mu1 / prm.p * c.p_u, gamma_of(N, prm.p)},
      {prm.mu2 / prm.q * c.q_v, gamma_of(N, prm.q)},
      {prm.beta * c.mixed, gamma_of(N, prm.r1 + prm.r2)},
  };
  PsiValues out;
  out.value = 0.5 * t * t * A;
  out.d1 = t * A;
  out.d2 = A;
  for (const Term& tm : terms) {
    if (tm.coef == 0.0) continue;
    const double tg = std::pow(t, tm.g);
    out.value -= tm.coef * tg;
    out.d1 -= tm.coef * tm.g * tg / t;
    out.d2 -= tm.coef * tm.g * (tm.g - 1.0) * tg / (t * t);
  }
  return out;
}

PsiValues psi_derivatives(const SystemParams& prm, const Pair& pair, double t) {
  return psi_derivatives(prm, cache_integrals(prm, pair), t);
}

double fiber_root(double grad_sum, const std::vector<std::pair<double, double>>& terms) {
  if (!(grad_sum > 0.0)) throw std::invalid_argument("gradient sum must be positive");
  double total = 0.0;
  for (const auto& [coef, expo] : terms) {
    if (coef < 0.0 || expo <= 0.0)
      throw std::invalid_argument("terms must have nonnegative coefficients and positive exponents");
    total += coef;
  }
  if (total <= 0.0) throw std::invalid_argument("no potential term; the fiber has no root");

  const auto g = [&](double t) {
    double s = grad_sum;
    for (const auto& [coef, expo] : terms) s -= coef * std::pow(t, expo);
    return s;
  };
  // g is strictly decreasing with g(0+) = grad_sum > 0; bracket by doubling.
  double lo = 1.0, hi = 1.0;
  if (g(1.0) > 0.0) {
    while (g(hi) > 0.0) {
      hi *= 2.0;
      if (hi > 1e100) throw solver_error("fiber root bracket expansion failed");
    }
    lo = hi / 2.0;
  } else {
    while (g(lo) <= 0.0) {
      lo *= 0.5;
      if (lo < 1e-100) throw solver_error("fiber root bracket expansion failed");
    }
    hi = lo * 2.0;
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double project_fiber(const SystemParams& prm, const PairIntegrals& c) {
  const int N = prm.dim;
  const double A = c.grad_u + c.grad_v;
  if (!(A > 1e-14)) throw std::invalid_argument("cannot project a (near-)zero pair");
  // Psi'(t)/t = A - sum coef_s t^{gamma_s - 2}; all exponents positive in the
  // supercritical window, so the root is unique.
  std::vector<std::pair<double, double>> terms;
  const double gp = gamma_of(N, prm.p), gq = gamma_of(N, prm.q),
               gr = gamma_of(N, prm.r1 + prm.r2);
  if (c.p_u > 0.0) terms.push_back({gp / prm.p * prm.mu1 * c.p_u, gp - 2.0});
  if (c.q_v > 0.0) terms.push_back({gq / prm.q * prm.mu2 * c.q_v, gq - 2.0});
  if (prm.beta > 0.0 && c.mixed > 0.0) terms.push_back({gr * prm.beta * c.mixed, gr - 2.0});
  return fiber_root(A, terms);
}

double project_fiber(const SystemParams& prm, const Pair& pair) {
  return project_fiber(prm, cache_integrals(prm, pair));
}

std::pair<double, double> coercivity_constants(const SystemParams& prm) {
  validate_system(prm);
  const int N = prm.dim;
  const double tau = std::max({2.0 / ((prm.p - 2.0) * N), 2.0 / ((prm.q - 2.0) * N),
                               2.0 / ((prm.r1 + prm.r2 - 2.0) * N)});
  return {tau, 0.5 - tau};
}

double grad_lower_bound(const SystemParams& prm, double Cp, double Cq, double Cr) {
  validate_system(prm);
  const int N = prm.dim;
  const double total = prm.a + prm.b;
  const auto branch = [&](double s, double coef_front, double C) {
    const double D = N * (s - 2.0) - 4.0;           // > 0 supercritical
    const double W = 2.0 * N - (N - 2.0) * s;       // > 0 subcritical-in-2*
    const double coef = coef_front * std::pow(C, s);
    return std::pow(coef, -4.0 / D) * std::pow(total, -W / D);
  };
  double delta = std::min(
      branch(prm.p, 3.0 * (prm.p - 2.0) * N / (2.0 * prm.p) * prm.mu1, Cp),
      branch(prm.q, 3.0 * (prm.q - 2.0) * N / (2.0 * prm.q) * prm.mu2, Cq));
  if (prm.beta > 0.0) {
    const double r = prm.r1 + prm.r2;
    delta = std::min(delta, branch(r, 3.0 * (r - 2.0) * N / 2.0 * prm.beta, Cr));
  }
  return delta;
}

std::pair<double, double> multipliers(const SystemParams& prm, const Pair& pair) {
  const PairIntegrals c = cache_integrals(prm, pair);
  if (!(c.mass_u > 0.0) && !(c.mass_v > 0.0))
    throw std::invalid_argument("multipliers need a nonzero component");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double l1 =
      c.mass_u > 0.0
          ? (prm.mu1 * c.p_u + prm.beta * prm.r1 * c.mixed - c.grad_u) / c.mass_u
          : nan;
  const double l2 =
      c.mass_v > 0.0
          ? (prm.mu2 * c.q_v + prm.beta * prm.r2 * c.mixed - c.grad_v) / c.mass_v
          : nan;
  return {l1, l2};
}

double pde_residual(const SystemParams& prm, const Pair& pair, double l1, double l2) {
  require_same_grid(pair.u, pair.v);
  const RadialField lap_u = apply_laplacian(pair.u);
  const RadialField lap_v = apply_laplacian(pair.v);
  const auto& u = pair.u.values;
  const auto& v = pair.v.values;
  double worst1 = 0, worst2 = 0, peak1 = 0, peak2 = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double au = std::abs(u[i]), av = std::abs(v[i]);
    const double nl1 = prm.mu1 * opow(u[i], prm.p - 1.0) +
                       prm.beta * prm.r1 * opow(u[i], prm.r1 - 1.0) * std::pow(av, prm.r2);
    const double nl2 = prm.mu2 * opow(v[i], prm.q - 1.0) +
                       prm.beta * prm.r2 * std::pow(au, prm.r1) * opow(v[i], prm.r2 - 1.0);
    worst1 = std::max(worst1, std::abs(-lap_u.values[i] + l1 * u[i] - nl1));
    worst2 = std::max(worst2, std::abs(-lap_v.values[i] + l2 * v[i] - nl2));
    peak1 = std::max(peak1, std::abs(nl1));
    peak2 = std::max(peak2, std::abs(nl2));
  }
  const double res1 = peak1 > 0.0 ? worst1 / peak1 : (worst1 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  const double res2 = peak2 > 0.0 ? worst2 / peak2 : (worst2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::max(res1, res2);
}

}  // namespace nlsground
