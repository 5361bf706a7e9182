#include "nlsground/ground_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nlsground/beta_threshold.hpp"
#include "nlsground/rearrangement.hpp"
#include "nlsground/scalar_ground.hpp"

namespace nlsground {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// |x|^e with the conventions the coupling terms need: e = 0 gives 1 even at
// x = 0 (so r = 2 keeps its linear derivative), negative exponents at x = 0
// give 0 (the Jacobian is regularized at the kink of |x|^e, e < 1).
double apow(double x, double e) {
  if (e == 0.0) return 1.0;
  double ax = std::abs(x);
  return ax == 0.0 ? 0.0 : std::pow(ax, e);
}

double spow(double x, double e) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), e), x);
}

// Unit ground profiles are reused as seeds, scaling references, and threshold
// inputs; shooting them once per exponent pair is enough. Guarded for the
// concurrent sweeps.
const ScalarGroundState& unit_profile(int dim, double p) {
  static std::mutex mx;
  static std::map<std::pair<int, long long>, std::shared_ptr<const ScalarGroundState>> cache;
  std::lock_guard<std::mutex> lock(mx);
  auto key = std::make_pair(dim, static_cast<long long>(std::llround(p * 1e12)));
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto grid = make_grid(dim, 20.0, 4001);
    auto state = std::make_shared<ScalarGroundState>(solve_scalar_ground(ScalarParams{dim, p}, grid));
    it = cache.emplace(key, std::move(state)).first;
  }
  return *it->second;
}

void renormalize(RadialField& f, double target) {
  double m = mass(f);
  if (!(m > 0.0)) throw solver_error("component lost its mass during descent");
  double c = std::sqrt(target / m);
  for (double& x : f.values) x *= c;
}

// Sampled mass-a profile of the (p, mu) scalar problem: the dilated unit
// profile with the exact quadrature mass restored by rescaling. Unlike
// scale_to_mass this tolerates grids that underresolve the concentration
// scale; every consumer here corrects the shape downstream.
struct SampledProfile {
  RadialField field;
  double lambda = 0.0;
};

SampledProfile sampled_profile(int dim, double p, double mu, double a, GridPtr grid) {
  const auto& up = unit_profile(dim, p);
  double lam = scalar_lambda(up, mu, a);
  double amp = std::pow(lam / mu, 1.0 / (p - 2.0));
  double root = std::sqrt(lam);
  RadialField f = make_field(grid);
  for (std::size_t i = 0; i < grid->points; ++i)
    f.values[i] = amp * up.evaluate(root * grid->r[i]);
  f.values.back() = 0.0;
  renormalize(f, a);
  return SampledProfile{std::move(f), lam};
}

// ----- tridiagonal and banded elimination -------------------------------

struct Tri {
  std::vector<double> lo, di, up;  // lo[0] and up[n-1] unused
};

std::vector<double> tri_solve(const Tri& t, std::vector<double> rhs) {
  std::size_t n = rhs.size();
  std::vector<double> c(n, 0.0);
  double piv = t.di[0];
  if (!(std::abs(piv) > 1e-300)) throw solver_error("tridiagonal pivot vanished");
  c[0] = t.up[0] / piv;
  rhs[0] /= piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = t.di[i] - t.lo[i] * c[i - 1];
    if (!(std::abs(piv) > 1e-300)) throw solver_error("tridiagonal pivot vanished");
    c[i] = t.up[i] / piv;
    rhs[i] = (rhs[i] - t.lo[i] * rhs[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

// Rows of -laplacian for the unknowns 0..n-1 with the value at node n pinned
// to zero; coefficients identical to apply_laplacian so the polished iterate
// drives exactly the residual pde_residual reports.
Tri neg_laplacian_rows(const RadialGrid& g, std::size_t n) {
  Tri t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  double h2 = g.h * g.h;
  t.di[0] = 2.0 * g.dim / h2;
  t.up[0] = -2.0 * g.dim / h2;
  for (std::size_t i = 1; i < n; ++i) {
    double adv = (g.dim - 1) / (2.0 * g.h * g.r[i]);
    t.lo[i] = -(1.0 / h2 - adv);
    t.di[i] = 2.0 / h2;
    t.up[i] = -(1.0 / h2 + adv);
  }
  return t;
}

void apply_tri(const Tri& t, const std::vector<double>& x, std::vector<double>& out) {
  std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = t.di[i] * x[i];
    if (i > 0) s += t.lo[i] * x[i - 1];
    if (i + 1 < n) s += t.up[i] * x[i + 1];
    out[i] = s;
  }
}

// Pentadiagonal LU without pivoting for the interleaved two-component
// Jacobian (u_i, v_i alternate; each row reaches two slots sideways).
struct Band5 {
  std::size_t n = 0;
  std::vector<double> m2, m1, d0, p1, p2;

  explicit Band5(std::size_t size)
      : n(size), m2(size, 0.0), m1(size, 0.0), d0(size, 0.0), p1(size, 0.0), p2(size, 0.0) {}

  void factor() {
    for (std::size_t i = 0; i < n; ++i) {
      double piv = d0[i];
      if (!(std::abs(piv) > 1e-300)) throw solver_error("banded pivot vanished");
      if (i + 1 < n) {
        double f = m1[i + 1] / piv;
        m1[i + 1] = f;
        d0[i + 1] -= f * p1[i];
        p1[i + 1] -= f * p2[i];
      }
      if (i + 2 < n) {
        double f = m2[i + 2] / piv;
        m2[i + 2] = f;
        m1[i + 2] -= f * p1[i];
        d0[i + 2] -= f * p2[i];
      }
    }
  }

  std::vector<double> solve(std::vector<double> rhs) const {
    for (std::size_t i = 1; i < n; ++i) {
      rhs[i] -= m1[i] * rhs[i - 1];
      if (i >= 2) rhs[i] -= m2[i] * rhs[i - 2];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = rhs[i];
      if (i + 1 < n) s -= p1[i] * rhs[i + 1];
      if (i + 2 < n) s -= p2[i] * rhs[i + 2];
      rhs[i] = s / d0[i];
    }
    return rhs;
  }
};

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// ----- scalar stationary state on the fixed grid ------------------------

struct ScalarRefined {
  std::vector<double> u;  // interior unknowns, node n pinned to zero
  double lambda = 0.0;
  bool ok = false;
  int iters = 0;
};

void scalar_residual(const Tri& lap, double mu, double p, double lambda,
                     const std::vector<double>& u, std::vector<double>& f) {
  apply_tri(lap, u, f);
  for (std::size_t i = 0; i < u.size(); ++i) f[i] += lambda * u[i] - mu * spow(u[i], p - 1.0);
}

double scalar_merit(const std::vector<double>& f, double gmass, double scale, double a) {
  double fn = 0.0;
  for (double x : f) fn = std::max(fn, std::abs(x));
  return std::max(fn / scale, std::abs(gmass) / std::max(1.0, a));
}

ScalarRefined refine_scalar(const RadialGrid& g, double mu, double p, double a,
                            std::vector<double> u, double lambda) {
  std::size_t n = u.size();
  Tri lap = neg_laplacian_rows(g, n);
  std::vector<double> f(n), trial(n);
  ScalarRefined out;

  auto mass_of = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += g.vol[i] * x[i] * x[i];
    return s;
  };
  auto scale_of = [&](const std::vector<double>& x, double lam) {
    double umax = 0.0;
    for (double y : x) umax = std::max(umax, std::abs(y));
    return mu * apow(umax, p - 1.0) + std::abs(lam) * umax + 1.0;
  };

  scalar_residual(lap, mu, p, lambda, u, f);
  double merit = scalar_merit(f, mass_of(u) - a, scale_of(u, lambda), a);
  for (int k = 0; k < 80; ++k) {
    if (merit <= 1e-12) {
      out.ok = true;
      break;
    }
    Tri jac = lap;
    for (std::size_t i = 0; i < n; ++i)
      jac.di[i] += lambda - mu * (p - 1.0) * apow(u[i], p - 2.0);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -f[i];
    std::vector<double> y0 = tri_solve(jac, rhs);
    std::vector<double> y1 = tri_solve(jac, u);
    double ry0 = 0.0, ry1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ry0 += 2.0 * g.vol[i] * u[i] * y0[i];
      ry1 += 2.0 * g.vol[i] * u[i] * y1[i];
    }
    if (!(std::abs(ry1) > 1e-300)) break;
    double gmass = mass_of(u) - a;
    double dl = (ry0 + gmass) / ry1;

    bool accepted = false;
    for (double s : {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.01}) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + s * (y0[i] - dl * y1[i]);
      double lt = lambda + s * dl;
      scalar_residual(lap, mu, p, lt, trial, f);
      double mt = scalar_merit(f, mass_of(trial) - a, scale_of(trial, lt), a);
      if (std::isfinite(mt) && mt <= (1.0 - 0.1 * s) * merit) {
        u = trial;
        lambda = lt;
        merit = mt;
        accepted = true;
        break;
      }
    }
    ++out.iters;
    if (!accepted) break;
    if (merit <= 1e-12) out.ok = true;
  }
  out.u = std::move(u);
  out.lambda = lambda;
  return out;
}

}  // namespace

double scalar_level_on_grid(int dim, double p, double mu, double a, GridPtr grid) {
  if (!grid) throw std::invalid_argument("null grid");
  if (!(mu > 0.0) || !(a > 0.0)) throw std::invalid_argument("mu and a must be positive");
  validate_exponent(ScalarParams{dim, p}, /*supercritical=*/true);
  SampledProfile seeded = sampled_profile(dim, p, mu, a, grid);
  std::size_t n = grid->points - 1;
  std::vector<double> u(seeded.field.values.begin(), seeded.field.values.begin() + n);
  ScalarRefined ref = refine_scalar(*grid, mu, p, a, std::move(u), seeded.lambda);
  if (!ref.ok) throw solver_error("scalar level refinement did not converge on this grid");
  ref.u.push_back(0.0);
  RadialField field = make_field(grid, ref.u);
  return scalar_fiber_value(dim, p, mu, grad_norm_sq(field), lp_norm_pow(field, p));
}

double reduced_energy(const SystemParams& prm, const Pair& pair) {
  PairIntegrals c = cache_integrals(prm, pair);
  if (c.mass_u + c.mass_v <= 0.0) throw std::invalid_argument("reduced energy of the zero pair");
  double t = project_fiber(prm, c);
  return psi_derivatives(prm, c, t).value;
}

namespace {

// ----- coupled stationary system (bordered Newton) ----------------------

struct CoupledState {
  std::vector<double> u, v;  // interior unknowns
  double l1 = 0.0, l2 = 0.0;
  bool ok = false;
  int iters = 0;
};

struct CoupledSystem {
  const RadialGrid& g;
  const SystemParams& prm;
  std::size_t n;
  Tri lap;

  CoupledSystem(const RadialGrid& grid, const SystemParams& params)
      : g(grid), prm(params), n(grid.points - 1), lap(neg_laplacian_rows(grid, n)) {}

  void residual(const CoupledState& s, std::vector<double>& fu, std::vector<double>& fv,
                double& gu, double& gv) const {
    apply_tri(lap, s.u, fu);
    apply_tri(lap, s.v, fv);
    gu = -prm.a;
    gv = -prm.b;
    for (std::size_t i = 0; i < n; ++i) {
      double ui = s.u[i], vi = s.v[i];
      fu[i] += s.l1 * ui - prm.mu1 * spow(ui, prm.p - 1.0) -
               prm.beta * prm.r1 * spow(ui, prm.r1 - 1.0) * apow(vi, prm.r2);
      fv[i] += s.l2 * vi - prm.mu2 * spow(vi, prm.q - 1.0) -
               prm.beta * prm.r2 * apow(ui, prm.r1) * spow(vi, prm.r2 - 1.0);
      gu += g.vol[i] * ui * ui;
      gv += g.vol[i] * vi * vi;
    }
  }

  double scale(const CoupledState& s) const {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ui = s.u[i], vi = s.v[i];
      m = std::max(m, prm.mu1 * apow(ui, prm.p - 1.0) +
                          prm.beta * prm.r1 * apow(ui, prm.r1 - 1.0) * apow(vi, prm.r2) +
                          std::abs(s.l1 * ui));
      m = std::max(m, prm.mu2 * apow(vi, prm.q - 1.0) +
                          prm.beta * prm.r2 * apow(ui, prm.r1) * apow(vi, prm.r2 - 1.0) +
                          std::abs(s.l2 * vi));
    }
    return m + 1e-30;
  }

  double merit(const CoupledState& s, std::vector<double>& fu, std::vector<double>& fv) const {
    double gu = 0.0, gv = 0.0;
    residual(s, fu, fv, gu, gv);
    double fn = 0.0;
    for (std::size_t i = 0; i < n; ++i) fn = std::max({fn, std::abs(fu[i]), std::abs(fv[i])});
    double massden = std::max({1.0, prm.a, prm.b});
    return std::max(fn / scale(s), (std::abs(gu) + std::abs(gv)) / massden);
  }
};

CoupledState refine_coupled(const RadialGrid& g, const SystemParams& prm, CoupledState s,
                            int max_iters) {
  CoupledSystem sys(g, prm);
  std::size_t n = sys.n, m = 2 * n;
  std::vector<double> fu(n), fv(n), rhs(m), c1(m, 0.0), c2(m, 0.0);
  CoupledState trial = s;

  // Converged when the scaled residual reaches the rounding floor of the
  // difference stencils. The floor of the relative merit is eps/(h^2 lambda):
  // the stencil rounding is eps*amp/h^2 while the nonlinear scale is
  // lambda*amp, so wide shallow states (tiny lambda) bottom out orders of
  // magnitude above a fixed gate. Stay well under the certification
  // tolerance while tracking that floor.
  const double lscale = std::max({std::abs(s.l1), std::abs(s.l2), 1e-12});
  const double merit_tol = std::clamp(
      50.0 * std::numeric_limits<double>::epsilon() / (g.h * g.h * lscale), 1e-11, 1e-6);
  double merit = sys.merit(s, fu, fv);
  for (int k = 0; k < max_iters; ++k) {
    if (merit <= merit_tol) {
      s.ok = true;
      break;
    }
    double gu, gv;
    sys.residual(s, fu, fv, gu, gv);

    Band5 jac(m);
    for (std::size_t i = 0; i < n; ++i) {
      double ui = s.u[i], vi = s.v[i];
      double cross = -prm.beta * prm.r1 * prm.r2 * spow(ui, prm.r1 - 1.0) * spow(vi, prm.r2 - 1.0);
      std::size_t ku = 2 * i, kv = 2 * i + 1;
      jac.d0[ku] = sys.lap.di[i] + s.l1 - prm.mu1 * (prm.p - 1.0) * apow(ui, prm.p - 2.0) -
                   prm.beta * prm.r1 * (prm.r1 - 1.0) * apow(ui, prm.r1 - 2.0) * apow(vi, prm.r2);
      jac.p1[ku] = cross;
      if (i > 0) jac.m2[ku] = sys.lap.lo[i];
      if (i + 1 < n) jac.p2[ku] = sys.lap.up[i];
      jac.d0[kv] = sys.lap.di[i] + s.l2 - prm.mu2 * (prm.q - 1.0) * apow(vi, prm.q - 2.0) -
                   prm.beta * prm.r2 * (prm.r2 - 1.0) * apow(ui, prm.r1) * apow(vi, prm.r2 - 2.0);
      jac.m1[kv] = cross;
      if (i > 0) jac.m2[kv] = sys.lap.lo[i];
      if (i + 1 < n) jac.p2[kv] = sys.lap.up[i];
      rhs[ku] = -fu[i];
      rhs[kv] = -fv[i];
      c1[ku] = ui;
      c1[kv] = 0.0;
      c2[ku] = 0.0;
      c2[kv] = vi;
    }
    jac.factor();
    std::vector<double> y0 = jac.solve(rhs);
    std::vector<double> y1 = jac.solve(c1);
    std::vector<double> y2 = jac.solve(c2);

    // Mass rows close the bordered system through a 2x2 Schur complement.
    double w1y0 = 0.0, w1y1 = 0.0, w1y2 = 0.0, w2y0 = 0.0, w2y1 = 0.0, w2y2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double wu = 2.0 * g.vol[i] * s.u[i], wv = 2.0 * g.vol[i] * s.v[i];
      w1y0 += wu * y0[2 * i];
      w1y1 += wu * y1[2 * i];
      w1y2 += wu * y2[2 * i];
      w2y0 += wv * y0[2 * i + 1];
      w2y1 += wv * y1[2 * i + 1];
      w2y2 += wv * y2[2 * i + 1];
    }
    double det = w1y1 * w2y2 - w1y2 * w2y1;
    if (!(std::abs(det) > 1e-300)) break;
    double b1 = w1y0 + gu, b2 = w2y0 + gv;
    double dl1 = (b1 * w2y2 - b2 * w1y2) / det;
    double dl2 = (w1y1 * b2 - w2y1 * b1) / det;

    bool accepted = false;
    for (double step : {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.01}) {
      for (std::size_t i = 0; i < n; ++i) {
        trial.u[i] = s.u[i] + step * (y0[2 * i] - dl1 * y1[2 * i] - dl2 * y2[2 * i]);
        trial.v[i] = s.v[i] + step * (y0[2 * i + 1] - dl1 * y1[2 * i + 1] - dl2 * y2[2 * i + 1]);
      }
      trial.l1 = s.l1 + step * dl1;
      trial.l2 = s.l2 + step * dl2;
      double mt = sys.merit(trial, fu, fv);
      if (std::isfinite(mt) && mt <= (1.0 - 0.1 * step) * merit) {
        std::swap(s.u, trial.u);
        std::swap(s.v, trial.v);
        s.l1 = trial.l1;
        s.l2 = trial.l2;
        merit = mt;
        accepted = true;
        break;
      }
    }
    ++s.iters;
    if (!accepted) break;
    if (merit <= merit_tol) s.ok = true;
  }
  if (merit <= merit_tol) s.ok = true;
  return s;
}

// ----- descent on the reduced functional --------------------------------

struct DescentOutcome {
  int steps = 0;
  // flat: the projected gradient vanished or the decrease dropped below the
  // energy tolerance on three consecutive accepted steps (legitimate stop).
  // stuck: the line search could not find any decreasing step (not a stop
  // criterion; the iterate is in a jagged region and needs outside help).
  bool flat = false;
  bool stuck = false;
  bool residual_met = false;
  double l1 = kNaN, l2 = kNaN;
};

// Running record of the most stationary iterate seen so far. The discrete
// landscape drains past the physical basin (mass can keep concentrating
// towards lattice-scale artifacts), so the Newton stage is launched from
// the best-residual snapshot rather than from wherever the walk ended.
struct BasinTracker {
  Pair pair;
  double residual = std::numeric_limits<double>::infinity();
  double l1 = kNaN, l2 = kNaN;
  bool set = false;

  void offer(const SystemParams& prm, const Pair& cand) {
    auto [m1, m2] = multipliers(prm, cand);
    if (!std::isfinite(m1) || !std::isfinite(m2)) return;
    double r = pde_residual(prm, cand, m1, m2);
    if (!std::isfinite(r) || (set && r >= residual)) return;
    pair = cand;
    residual = r;
    l1 = m1;
    l2 = m2;
    set = true;
  }
};

// Face-flux stiffness plus a shifted lumped mass: a cheap SPD smoother that
// tames the high-frequency part of the gradient without touching descent
// guarantees (the line search certifies every step on the true energy).
struct Preconditioner {
  std::vector<double> face, voln;

  Preconditioner(const RadialGrid& g, std::size_t n) : face(n, 0.0), voln(n, 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      double rf = (i + 0.5) * g.h;
      face[i] = g.surface * std::pow(rf, g.dim - 1) / g.h;
      voln[i] = g.vol[i];
    }
  }

  std::vector<double> apply(const std::vector<double>& rhsin, double shift) const {
    std::size_t n = rhsin.size();
    Tri t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
      double left = i > 0 ? face[i - 1] : 0.0;
      t.di[i] = shift * voln[i] + left + face[i];
      if (i > 0) t.lo[i] = -face[i - 1];
      if (i + 1 < n) t.up[i] = -face[i];
    }
    return tri_solve(t, rhsin);
  }
};

// Exact gradient of the discrete kinetic term used by the energy (the
// centered-difference quadratic form behind grad_norm_sq), expressed in the
// volume-weighted inner product: (D^T W D u) / vol. The finite-difference
// Laplacian is a different discretization; mixing it into the descent
// direction leaves an O(1) mismatch at spike scale and jams the line search.
std::vector<double> kinetic_grad(const RadialField& u) {
  const RadialGrid& g = *u.grid;
  std::size_t m = g.points;
  std::vector<double> d = derivative(u);
  for (std::size_t j = 0; j < m; ++j) d[j] *= g.vol[j];
  std::vector<double> out(m, 0.0);
  double c = 1.0 / (2.0 * g.h);
  out[0] -= 3.0 * c * d[0];
  out[1] += 4.0 * c * d[0];
  out[2] -= c * d[0];
  for (std::size_t j = 1; j + 1 < m; ++j) {
    out[j - 1] -= c * d[j];
    out[j + 1] += c * d[j];
  }
  out[m - 1] += 3.0 * c * d[m - 1];
  out[m - 2] -= 4.0 * c * d[m - 1];
  out[m - 3] += c * d[m - 1];
  // Zero-weight nodes (the origin for dim >= 2) have no volume-weighted
  // gradient; the caller skips them.
  for (std::size_t j = 0; j < m; ++j) out[j] = g.vol[j] > 0.0 ? out[j] / g.vol[j] : 0.0;
  return out;
}

// The reduced energy is invariant under the mass-preserving dilation, so a
// descent path is free to drift along that gauge direction. Pin the gauge
// by resampling at the fiber maximizer before handing the iterate to the
// Newton stage, which works on the unscaled stationarity system. Resampling
// a barely-resolved spike can ruin it, so the fix only survives if the
// energy does not move: otherwise keep the drifted iterate.
void gauge_fix(const SystemParams& prm, Pair& pair) {
  try {
    double e0 = reduced_energy(prm, pair);
    double t = project_fiber(prm, pair);
    if (!std::isfinite(t) || std::abs(t - 1.0) < 0.02) return;
    Pair fixed = make_pair(dilate_field(pair.u, t), dilate_field(pair.v, t));
    renormalize(fixed.u, prm.a);
    renormalize(fixed.v, prm.b);
    double e1 = reduced_energy(prm, fixed);
    if (e1 <= e0 + 1e-9 * (1.0 + std::abs(e0))) pair = std::move(fixed);
  } catch (const std::exception&) {
    // keep the iterate as is
  }
}

DescentOutcome run_descent(const SystemParams& prm, Pair& pair, const SolveConfig& cfg,
                           int budget, BasinTracker& basin) {
  const RadialGrid& g = *pair.u.grid;
  std::size_t n = g.points - 1;
  double gp = (prm.p - 2.0) * g.dim / 2.0;
  double gq = (prm.q - 2.0) * g.dim / 2.0;
  double gr = (prm.r1 + prm.r2 - 2.0) * g.dim / 2.0;
  Preconditioner prec(g, n);

  DescentOutcome out;
  basin.offer(prm, pair);
  if (basin.residual <= cfg.tol_residual) {
    out.l1 = basin.l1;
    out.l2 = basin.l2;
    out.residual_met = true;
    return out;
  }
  PairIntegrals c = cache_integrals(prm, pair);
  double t = project_fiber(prm, c);
  double energy = psi_derivatives(prm, c, t).value;
  double step = cfg.step;
  int stall_count = 0;

  // Concentration budget per component, tied to the seed's own scale: a run
  // may sharpen a feature a few-fold past its starting width but not drift
  // arbitrarily toward the grid scale. The floor keeps moderately peaked
  // seeds workable; the ceiling is the absolute resolvability limit.
  double h2e = g.h * g.h;
  auto scale_cap = [&](double grad, double ms) {
    return std::clamp(4.0 * h2e * grad / ms, 0.02, 0.12);
  };
  const double cap_u = scale_cap(c.grad_u, c.mass_u);
  const double cap_v = scale_cap(c.grad_v, c.mass_v);

  std::vector<double> guv(n), gvv(n), du(n), dv(n);
  while (out.steps < budget) {
    std::vector<double> ku = kinetic_grad(pair.u);
    std::vector<double> kv = kinetic_grad(pair.v);
    double t2 = t * t, tgp = std::pow(t, gp), tgq = std::pow(t, gq), tgr = std::pow(t, gr);
    for (std::size_t i = 0; i < n; ++i) {
      if (g.vol[i] == 0.0) {
        // Zero quadrature weight (the origin node for dim >= 2): the
        // discrete energy does not depend on this value, so there is no
        // volume-weighted gradient here. The node follows its neighbours
        // through the preconditioner and is set properly by the Newton
        // stage's origin stencil.
        guv[i] = 0.0;
        gvv[i] = 0.0;
        continue;
      }
      double ui = pair.u.values[i], vi = pair.v.values[i];
      guv[i] = t2 * ku[i] - tgp * prm.mu1 * spow(ui, prm.p - 1.0) -
               tgr * prm.beta * prm.r1 * spow(ui, prm.r1 - 1.0) * apow(vi, prm.r2);
      gvv[i] = t2 * kv[i] - tgq * prm.mu2 * spow(vi, prm.q - 1.0) -
               tgr * prm.beta * prm.r2 * apow(ui, prm.r1) * spow(vi, prm.r2 - 1.0);
    }
    // Tangent projection on each mass sphere: the radial component is the
    // Rayleigh multiplier estimate and contributes nothing to the descent.
    double au = 0.0, av = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      au += g.vol[i] * guv[i] * pair.u.values[i];
      av += g.vol[i] * gvv[i] * pair.v.values[i];
    }
    au /= c.mass_u;
    av /= c.mass_v;
    double gnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      guv[i] -= au * pair.u.values[i];
      gvv[i] -= av * pair.v.values[i];
      gnorm += g.vol[i] * (guv[i] * guv[i] + gvv[i] * gvv[i]);
    }
    if (!(std::sqrt(gnorm) > 1e-13 * (1.0 + std::abs(energy)))) {
      out.flat = true;
      break;
    }
    du = prec.apply(guv, std::max(1.0, std::abs(au)));
    dv = prec.apply(gvv, std::max(1.0, std::abs(av)));
    double dd = 0.0;
    for (std::size_t i = 0; i < n; ++i) dd += g.vol[i] * (guv[i] * du[i] + gvv[i] * dv[i]);
    if (!(dd > 0.0)) {
      du = guv;
      dv = gvv;
      dd = gnorm;
    }

    // Trust region on the step length: a single unconstrained step can
    // teleport the iterate across the landscape (past any stationarity
    // basin, straight to the concentration cap), so limit each move to a
    // modest fraction of the field norms.
    double ndu = 0.0, ndv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ndu += g.vol[i] * du[i] * du[i];
      ndv += g.vol[i] * dv[i] * dv[i];
    }
    double smax = 0.25 * std::min(std::sqrt(c.mass_u / std::max(ndu, 1e-300)),
                                  std::sqrt(c.mass_v / std::max(ndv, 1e-300)));
    step = std::min(step, smax);

    // Resolvability cap: (h/width)^2 estimated by h^2 |grad|^2 / mass. The
    // discrete kinetic quadrature saturates once a feature drops below the
    // grid scale while the potential terms keep rewarding concentration, so
    // the raw landscape drains into single-node spikes with no continuum
    // counterpart. Forbid steps that push a component past the cap unless
    // they sharpen nothing.
    double h2g = g.h * g.h;
    double su0 = h2g * c.grad_u / c.mass_u;
    double sv0 = h2g * c.grad_v / c.mass_v;

    bool accepted = false;
    double enew = energy, tnew = t;
    PairIntegrals cnew;
    for (int bt = 0; bt < 24 && !accepted; ++bt) {
      try {
        Pair trial = pair;
        for (std::size_t i = 0; i < n; ++i) {
          trial.u.values[i] -= step * du[i];
          trial.v.values[i] -= step * dv[i];
        }
        renormalize(trial.u, prm.a);
        renormalize(trial.v, prm.b);
        cnew = cache_integrals(prm, trial);
        double su = h2g * cnew.grad_u / cnew.mass_u;
        double sv = h2g * cnew.grad_v / cnew.mass_v;
        if ((su > cap_u && su > su0) || (sv > cap_v && sv > sv0)) {
          step *= 0.5;
          continue;
        }
        tnew = project_fiber(prm, cnew);
        enew = psi_derivatives(prm, cnew, tnew).value;
        if (enew <= energy - 1e-4 * step * dd) {
          pair = std::move(trial);
          accepted = true;
          break;
        }
      } catch (const solver_error&) {
        // fall through to a shorter step
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.stuck = true;
      break;
    }
    double decrease = energy - enew;
    energy = enew;
    t = tnew;
    c = cnew;
    step = std::min(step * 2.0, 1e3);
    ++out.steps;

    stall_count = decrease < cfg.tol_energy ? stall_count + 1 : 0;
    if (stall_count >= 3) {
      out.flat = true;
      break;
    }

    if (out.steps % cfg.rearrange_every == 0) {
      Pair repaired = pair;
      for (auto* f : {&repaired.u, &repaired.v}) {
        for (double& x : f->values) x = std::max(x, 0.0);
        *f = schwartz_rearrange(*f);
      }
      try {
        renormalize(repaired.u, prm.a);
        renormalize(repaired.v, prm.b);
        PairIntegrals cr = cache_integrals(prm, repaired);
        double tr = project_fiber(prm, cr);
        double er = psi_derivatives(prm, cr, tr).value;
        if (er <= energy + 1e-9 * (1.0 + std::abs(energy))) {
          pair = std::move(repaired);
          energy = er;
          t = tr;
          c = cr;
        }
      } catch (const solver_error&) {
        // keep the unrepaired iterate
      }
    }

    if (out.steps % 10 == 0) {
      // Re-pin the dilation gauge periodically: the energy is flat along
      // the dilation direction, and an unpinned path can walk that gauge
      // orbit toward unresolvable single-node concentrations.
      gauge_fix(prm, pair);
      c = cache_integrals(prm, pair);
      t = project_fiber(prm, c);
      energy = psi_derivatives(prm, c, t).value;
    }
    // Record every step: the walk can pass through a stationarity basin
    // without settling there, and the best-residual snapshot is what the
    // Newton stage launches from.
    basin.offer(prm, pair);
    if (basin.residual <= cfg.tol_residual) {
      out.l1 = basin.l1;
      out.l2 = basin.l2;
      out.residual_met = true;
      break;
    }
  }
  return out;
}

Pair seed_pair(const SolveConfig& cfg, GridPtr grid) {
  const SystemParams& prm = cfg.params;
  if (cfg.init == SeedMode::custom) {
    Pair s = *cfg.seed;
    renormalize(s.u, prm.a);
    renormalize(s.v, prm.b);
    return s;
  }
  if (cfg.init == SeedMode::gaussian) {
    RadialField u = make_field(grid), v = make_field(grid);
    for (std::size_t i = 0; i < grid->points; ++i) {
      double r2 = grid->r[i] * grid->r[i];
      u.values[i] = std::exp(-r2);
      v.values[i] = std::exp(-r2);
    }
    u.values.back() = 0.0;
    v.values.back() = 0.0;
    renormalize(u, prm.a);
    renormalize(v, prm.b);
    return make_pair(std::move(u), std::move(v));
  }
  RadialField u = sampled_profile(prm.dim, prm.p, prm.mu1, prm.a, grid).field;
  RadialField v = sampled_profile(prm.dim, prm.q, prm.mu2, prm.b, grid).field;
  return make_pair(std::move(u), std::move(v));
}

// Ground mode of the potential well a spike digs for its partner: the lowest
// Rayleigh quotient minimizer of weight |spike|^expo, scaled to the partner
// mass. When the minimizer is lopsided (one concentrated component, one
// shallow bound cloud) this is the natural starting shape for the cloud.
// Partner profile for a lopsided seed: start from the ground mode of the
// potential well carved by the frozen spike, then run a few self-consistent
// sweeps so the cloud adapts to its own self-interaction and to the actual
// coupling strength.  Each sweep takes the lowest eigenmode of
//   -lap - diag(mu*h^{q-2} + beta*r_self*spike^{r_spike}*h^{r_self-2})
// via shifted inverse iteration and renormalizes back to the target mass.
RadialField well_cloud(const RadialField& spike, double expo_spike, double expo_self,
                       double q_self, double mu_self, double beta, double target_mass) {
  RadialField w = spike;
  for (double& x : w.values) x = apow(x, expo_spike);
  RadialField h = rayleigh_min_full(w).minimizer;
  for (double& x : h.values) x = std::abs(x);
  renormalize(h, target_mass);

  const RadialGrid& g = *spike.grid;
  std::size_t n = g.points - 1;  // Dirichlet node at R stays pinned
  Tri lap = neg_laplacian_rows(g, n);
  std::vector<double> pot(n), rhs(n);
  for (int sweep = 0; sweep < 6; ++sweep) {
    double wmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double wi = mu_self * apow(h.values[i], q_self - 2.0) +
                  beta * expo_self * apow(spike.values[i], expo_spike) *
                      apow(h.values[i], expo_self - 2.0);
      pot[i] = std::min(wi, 1e8);
      wmax = std::max(wmax, pot[i]);
    }
    Tri shifted = lap;
    for (std::size_t i = 0; i < n; ++i) shifted.di[i] -= pot[i] - (wmax + 1.0);
    std::vector<double> mode(h.values.begin(), h.values.begin() + n);
    for (int it = 0; it < 12; ++it) {
      rhs = mode;
      mode = tri_solve(shifted, rhs);
      double norm = 0.0;
      for (double x : mode) norm += x * x;
      norm = std::sqrt(norm);
      if (!(norm > 0.0) || !std::isfinite(norm)) return h;
      for (double& x : mode) x /= norm;
    }
    for (std::size_t i = 0; i < n; ++i) h.values[i] = std::abs(mode[i]);
    h.values[n] = 0.0;
    renormalize(h, target_mass);
  }
  return h;
}

// Widen or sharpen the cloud to the best fiber energy alongside its frozen
// partner. At weak coupling the optimal cloud can be box-filling (orders of
// magnitude wider than the well mode), a basin plain descent rarely reaches
// from a narrow start.
RadialField best_cloud_width(const SystemParams& prm, const RadialField& spike,
                             const RadialField& cloud, bool cloud_is_second,
                             double target_mass) {
  RadialField best = cloud;
  double ebest = cloud_is_second ? reduced_energy(prm, Pair{spike, cloud})
                                 : reduced_energy(prm, Pair{cloud, spike});
  for (int k = 4; k >= -16; --k) {
    if (k == 0) continue;
    double t = std::pow(1.6, k);
    RadialField v = dilate_field(cloud, t);
    double m = mass(v);
    if (!(m > 0.0) || !std::isfinite(m)) break;
    double s = std::sqrt(target_mass / m);
    for (double& x : v.values) x *= s;
    double e = cloud_is_second ? reduced_energy(prm, Pair{spike, v})
                               : reduced_energy(prm, Pair{v, spike});
    if (std::isfinite(e) && e < ebest) {
      ebest = e;
      best = std::move(v);
    }
  }
  return best;
}

// One full descent/Newton run from a single prepared seed.
GroundStateResult solve_single(const SolveConfig& cfg, GridPtr grid, Pair pair,
                               double m_p, double m_q) {
  const SystemParams& prm = cfg.params;
  std::size_t n = grid->points - 1;

  GroundStateResult res;
  res.params = prm;
  res.m_p = m_p;
  res.m_q = m_q;

  int total = 0;
  bool converged = false;
  bool have_newton = false;
  double l1 = kNaN, l2 = kNaN;
  BasinTracker basin;

  for (int attempt = 0; attempt < 24 && total < cfg.max_iters; ++attempt) {
    int burst = std::min(cfg.max_iters - total, 60);
    DescentOutcome outcome = run_descent(prm, pair, cfg, burst, basin);
    total += outcome.steps;
    if (outcome.residual_met) {
      converged = true;
      l1 = outcome.l1;
      l2 = outcome.l2;
      pair = basin.pair;
    } else {
      gauge_fix(prm, pair);
      basin.offer(prm, pair);
    }

    // Polish (or, after a residual stop, certify) with the bordered Newton
    // stage on the discrete stationarity system. Launch from the most
    // stationary snapshot first, then from the current iterate: the
    // snapshot preserves a basin the walk may have left, while the current
    // iterate can sit deeper than any snapshot taken along the way.
    const Pair* starts[2] = {basin.set ? &basin.pair : nullptr, &pair};
    for (const Pair* start : starts) {
      if (!start) continue;
      CoupledState st;
      st.u.assign(start->u.values.begin(), start->u.values.begin() + n);
      st.v.assign(start->v.values.begin(), start->v.values.begin() + n);
      if (start == &basin.pair && std::isfinite(basin.l1) && std::isfinite(basin.l2)) {
        st.l1 = basin.l1;
        st.l2 = basin.l2;
      } else {
        auto [ml1, ml2] = multipliers(prm, *start);
        st.l1 = std::isfinite(ml1) ? ml1 : 1.0;
        st.l2 = std::isfinite(ml2) ? ml2 : 1.0;
      }
      try {
        CoupledState polished = refine_coupled(*grid, prm, std::move(st), 60);
        total += polished.iters;
        if (polished.ok) {
          polished.u.push_back(0.0);
          polished.v.push_back(0.0);
          pair = make_pair(make_field(grid, polished.u), make_field(grid, polished.v));
          l1 = polished.l1;
          l2 = polished.l2;
          have_newton = true;
          converged = true;
          break;
        }
      } catch (const solver_error&) {
        // try the other launch point or a longer descent burst
      }
    }
    if (converged) break;
    if (outcome.flat && attempt > 0) {
      // Two consecutive genuine energy stalls that Newton cannot improve:
      // accept the energy-stall termination, but only when the iterate is
      // at least loosely stationary. A jammed line search or a far-from-
      // stationary plateau does not count; keep retrying and report
      // honestly if nothing certifies the iterate.
      auto [fl1, fl2] = multipliers(prm, pair);
      double fres = (std::isfinite(fl1) && std::isfinite(fl2))
                        ? pde_residual(prm, pair, fl1, fl2)
                        : kNaN;
      if (std::isfinite(fres) && fres <= 100.0 * cfg.tol_residual) {
        converged = true;
        break;
      }
    }
  }

  renormalize(pair.u, prm.a);
  renormalize(pair.v, prm.b);
  if (!have_newton) {
    auto [ml1, ml2] = multipliers(prm, pair);
    l1 = ml1;
    l2 = ml2;
  }

  res.pair = std::move(pair);
  res.lambda1 = l1;
  res.lambda2 = l2;
  res.mass_u = mass(res.pair.u);
  res.mass_v = mass(res.pair.v);
  res.residual = (std::isfinite(l1) && std::isfinite(l2))
                     ? pde_residual(prm, res.pair, l1, l2)
                     : kNaN;
  try {
    res.energy = reduced_energy(prm, res.pair);
    res.fiber_t = project_fiber(prm, res.pair);
  } catch (const solver_error&) {
    // No fiber critical point through the final pair: whatever the run
    // settled on is not a usable candidate, so it must not outrank one.
    res.energy = kNaN;
    res.fiber_t = kNaN;
    converged = false;
  }
  res.iterations = total;
  res.converged = converged;
  res.strict_margin = std::min(res.m_p, res.m_q) - res.energy;

  double peak_u = 0.0, peak_v = 0.0;
  for (double x : res.pair.u.values) peak_u = std::max(peak_u, std::abs(x));
  for (double x : res.pair.v.values) peak_v = std::max(peak_v, std::abs(x));
  bool collapsed = std::min(peak_u, peak_v) < 1e-8 * std::max(peak_u, peak_v);
  res.semitrivial = collapsed ||
                    res.energy >= std::min(res.m_p, res.m_q) - 10.0 * cfg.tol_energy;
  return res;
}

}  // namespace

void validate_solve_config(const SolveConfig& cfg) {
  validate_system(cfg.params);
  GridPtr grid = make_grid(cfg.params.dim, cfg.radius, cfg.points);
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step))
    throw std::invalid_argument("initial step must be positive");
  if (!(cfg.tol_residual > 0.0) || !(cfg.tol_energy > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (cfg.rearrange_every < 1) throw std::invalid_argument("rearrange_every must be at least 1");
  if (cfg.init == SeedMode::custom) {
    if (!cfg.seed) throw std::invalid_argument("custom seed mode without a seed pair");
    const auto& sg = *cfg.seed->u.grid;
    if (sg.dim != grid->dim || sg.points != grid->points || sg.radius != grid->radius)
      throw std::invalid_argument("custom seed does not live on the configured grid");
    if (!(mass(cfg.seed->u) > 0.0) || !(mass(cfg.seed->v) > 0.0))
      throw std::invalid_argument("custom seed has an empty component");
  } else if (cfg.seed) {
    throw std::invalid_argument("seed pair provided without custom seed mode");
  }
}

GroundStateResult minimize_ground(const SolveConfig& cfg) {
  validate_solve_config(cfg);
  const SystemParams& prm = cfg.params;
  GridPtr grid = make_grid(prm.dim, cfg.radius, cfg.points);

  double m_p = scalar_level_on_grid(prm.dim, prm.p, prm.mu1, prm.a, grid);
  double m_q = scalar_level_on_grid(prm.dim, prm.q, prm.mu2, prm.b, grid);

  // The default start set brackets the two shapes the minimizer can take:
  // both components on their scalar profiles, and the two lopsided pairs
  // (scalar spike + bound cloud in the well it digs). The landscape can
  // put the symmetric pair on an excited branch, so a single start is not
  // enough; the best certified run wins.
  std::vector<Pair> seeds;
  seeds.reserve(3);
  seeds.push_back(seed_pair(cfg, grid));
  if (cfg.init == SeedMode::scalar && prm.beta > 0.0) {
    RadialField zu = seeds.front().u;
    RadialField zv = seeds.front().v;
    try {
      RadialField cu = well_cloud(zu, prm.r1, prm.r2, prm.q, prm.mu2, prm.beta, prm.b);
      cu = best_cloud_width(prm, zu, cu, true, prm.b);
      seeds.push_back(make_pair(zu, std::move(cu)));
      RadialField cv = well_cloud(zv, prm.r2, prm.r1, prm.p, prm.mu1, prm.beta, prm.a);
      cv = best_cloud_width(prm, zv, cv, false, prm.a);
      seeds.push_back(make_pair(std::move(cv), std::move(zv)));
    } catch (const std::exception&) {
      // cloud construction is best-effort; the scalar start alone remains
    }
    try {
      // Coupling-dominated branch: at strong beta both components ride one
      // wide shared profile whose effective self-interaction exponent is
      // r1 + r2 and whose strength is the coupling coefficient seen by each
      // equation (geometric mean of the two sides).
      double total = prm.a + prm.b;
      double alpha = std::sqrt(prm.a / total), gamma = std::sqrt(prm.b / total);
      double kappa = std::sqrt(prm.r1 * prm.r2) * std::pow(alpha, prm.r1 - 1.0) *
                     std::pow(gamma, prm.r2 - 1.0);
      RadialField w =
          sampled_profile(prm.dim, prm.r1 + prm.r2, prm.beta * kappa, total, grid).field;
      RadialField wu = w, wv = w;
      renormalize(wu, prm.a);
      renormalize(wv, prm.b);
      seeds.push_back(make_pair(std::move(wu), std::move(wv)));
    } catch (const std::exception&) {
      // shared-profile construction is best-effort as well
    }
  }

  // Certified runs (stationarity residual within tolerance) outrank runs
  // that only stopped on the energy criterion, which outrank failures; the
  // lowest energy wins within a rank. States whose multipliers put the
  // concentration scale 1/sqrt(lambda) below the grid spacing are discrete
  // artifacts (lattice-pinned single-node solutions with no continuum
  // counterpart) and are demoted below every resolvable candidate.
  double h2 = grid->h * grid->h;
  auto rank = [&](const GroundStateResult& r) {
    double lm = std::max(std::abs(r.lambda1), std::abs(r.lambda2));
    int base = 2;
    if (r.converged && std::isfinite(r.residual) && r.residual <= cfg.tol_residual)
      base = 0;
    else if (r.converged)
      base = 1;
    if (std::isfinite(lm) && lm * h2 > 0.15) base += 3;
    return base;
  };
  GroundStateResult best;
  bool have = false;
  for (Pair& seed : seeds) {
    GroundStateResult cand;
    try {
      cand = solve_single(cfg, grid, std::move(seed), m_p, m_q);
    } catch (const solver_error&) {
      continue;  // a degenerate start must not sink the whole solve
    }
    bool better = !have;
    if (have) {
      int kc = rank(cand), kb = rank(best);
      if (kc != kb) {
        better = kc < kb;
      } else if (kc < 2) {
        better = cand.energy < best.energy;
      } else {
        double rc = std::isfinite(cand.residual) ? cand.residual
                                                 : std::numeric_limits<double>::infinity();
        double rb = std::isfinite(best.residual) ? best.residual
                                                 : std::numeric_limits<double>::infinity();
        better = rc < rb;
      }
    }
    if (better) {
      best = std::move(cand);
      have = true;
    }
  }
  return best;
}

StrictnessReport verify_strict_inequality(const SystemParams& prm, const GroundStateResult& result) {
  validate_system(prm);
  StrictnessReport rep;
  rep.m_p_grid = result.m_p;
  rep.m_q_grid = result.m_q;
  rep.energy = result.energy;
  rep.margin = result.strict_margin;
  rep.observed_strict = result.strict_margin > 0.0;
  rep.beta_required = kNaN;

  const auto& up = unit_profile(prm.dim, prm.p);
  const auto& uq = unit_profile(prm.dim, prm.q);
  rep.m_p_exact = scalar_energy_level(up, prm.mu1, prm.a);
  rep.m_q_exact = scalar_energy_level(uq, prm.mu2, prm.b);
  rep.mass_threshold_b = mass_threshold(up, uq, prm.mu1, prm.mu2, prm.a);

  double bstar = rep.mass_threshold_b;
  rep.boundary_case = std::abs(prm.b - bstar) <= 1e-9 * std::max(prm.b, bstar);
  rep.case_upper_b = prm.b >= bstar * (1.0 - 1e-9);
  rep.case_lower_b = prm.b <= bstar * (1.0 + 1e-9);

  std::ostringstream why;
  why.precision(6);
  bool predicted = false;
  if (rep.case_upper_b) {
    why << "b >= b_threshold (lower scalar level on the v side): ";
    if (prm.r1 < 2.0) {
      predicted = prm.beta > 0.0;
      why << "r1 = " << prm.r1 << " < 2 and beta > 0 predict strictness. ";
    } else if (prm.r1 == 2.0) {
      rep.beta_required = beta_star(BetaProblem{prm.dim, prm.q, prm.mu2, prm.b, prm.r2});
      bool okc = prm.beta > rep.beta_required;
      predicted = predicted || okc;
      why << "r1 = 2 needs beta > " << rep.beta_required << "; beta = " << prm.beta
          << (okc ? " meets it. " : " does not: no prediction. ");
    } else {
      why << "r1 = " << prm.r1 << " > 2: outside the existence table. ";
    }
  }
  if (rep.case_lower_b) {
    why << "b <= b_threshold (lower scalar level on the u side): ";
    if (prm.r2 < 2.0) {
      bool okc = prm.beta > 0.0;
      predicted = predicted || okc;
      why << "r2 = " << prm.r2 << " < 2 and beta > 0 predict strictness. ";
    } else if (prm.r2 == 2.0) {
      rep.beta_required = beta_star(BetaProblem{prm.dim, prm.p, prm.mu1, prm.a, prm.r1});
      bool okc = prm.beta > rep.beta_required;
      predicted = predicted || okc;
      why << "r2 = 2 needs beta > " << rep.beta_required << "; beta = " << prm.beta
          << (okc ? " meets it. " : " does not: no prediction. ");
    } else {
      why << "r2 = " << prm.r2 << " > 2: outside the existence table. ";
    }
  }
  rep.predicted_strict = predicted;
  if (!result.converged) why << "Input result is not converged; margins are advisory. ";
  why << "Observed margin " << rep.margin << (rep.observed_strict ? " > 0." : " <= 0.");
  rep.rationale = why.str();
  return rep;
}

GainExpansion coupling_gain_expansion(const SystemParams& prm, const RadialField& h,
                                      const std::vector<double>& s_values) {
  validate_system(prm);
  if (!h.grid || h.values.size() != h.grid->points) throw std::invalid_argument("malformed field");
  if (std::abs(mass(h) - 1.0) > 1e-8)
    throw std::invalid_argument("perturbation profile must have unit mass");
  if (s_values.size() < 2) throw std::invalid_argument("need at least two amplitudes");
  for (double s : s_values)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("amplitudes must be positive and finite");

  GridPtr grid = h.grid;
  RadialField z = sampled_profile(prm.dim, prm.p, prm.mu1, prm.a, grid).field;
  double ref = reduced_energy(prm, make_pair(z, make_field(grid)));

  GainExpansion out;
  out.rows.reserve(s_values.size());
  for (double s : s_values) {
    RadialField hs = h;
    for (double& x : hs.values) x *= s;
    Pair pert = make_pair(z, std::move(hs));
    PairIntegrals c = cache_integrals(prm, pert);
    double t = project_fiber(prm, c);
    double e = psi_derivatives(prm, c, t).value;
    out.rows.push_back(GainRow{s, t, e - ref});
  }

  bool pos = out.rows.front().delta > 0.0;
  for (const auto& row : out.rows) {
    if (row.delta == 0.0 || (row.delta > 0.0) != pos)
      throw solver_error("gain signs are mixed: amplitudes straddle the expansion regime");
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& row : out.rows) {
    double x = std::log(row.s), y = std::log(std::abs(row.delta));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = static_cast<double>(out.rows.size());
  double den = m * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw std::invalid_argument("amplitudes must be distinct");
  out.slope = (m * sxy - sx * sy) / den;
  double intercept = (sy - out.slope * sx) / m;
  out.coefficient = (pos ? 1.0 : -1.0) * std::exp(intercept);
  for (const auto& row : out.rows) {
    double fit = out.slope * std::log(row.s) + intercept;
    out.fit_residual = std::max(out.fit_residual, std::abs(std::log(std::abs(row.delta)) - fit));
  }
  if (out.fit_residual > 0.2)
    throw solver_error("power-law fit rejected: amplitudes outside the expansion regime");

  if (prm.r2 < 2.0) {
    out.predicted_slope = prm.r2;
    out.predicted_coefficient = -prm.beta * mixed_integral(z, h, prm.r1, prm.r2);
  } else if (prm.r2 == 2.0) {
    out.predicted_slope = 2.0;
    out.predicted_coefficient =
        0.5 * grad_norm_sq(h) - prm.beta * mixed_integral(z, h, prm.r1, 2.0);
  } else {
    out.predicted_slope = 2.0;
    out.predicted_coefficient = 0.5 * grad_norm_sq(h);
  }
  return out;
}

SaturationReport mass_saturation_check(const GroundStateResult& result, double tol) {
  SaturationReport rep;
  if (!result.converged) {
    rep.skipped = true;
    rep.note = "result not converged: saturation not applicable";
    return rep;
  }
  if (result.semitrivial) {
    rep.skipped = true;
    rep.note = "semitrivial attractor: saturation not applicable";
    return rep;
  }
  std::ostringstream note;
  if (std::isfinite(result.lambda1) && result.lambda1 > 0.0) {
    rep.checked_u = true;
    rep.defect_u = std::abs(result.mass_u - result.params.a);
    if (rep.defect_u > tol * std::max(1.0, result.params.a)) {
      rep.ok = false;
      note << "positive lambda1 but mass_u misses a by " << rep.defect_u << ". ";
    }
  }
  if (std::isfinite(result.lambda2) && result.lambda2 > 0.0) {
    rep.checked_v = true;
    rep.defect_v = std::abs(result.mass_v - result.params.b);
    if (rep.defect_v > tol * std::max(1.0, result.params.b)) {
      rep.ok = false;
      note << "positive lambda2 but mass_v misses b by " << rep.defect_v << ". ";
    }
  }
  if (rep.ok) note << "every positive multiplier has a saturated constraint";
  rep.note = note.str();
  return rep;
}

}  // namespace nlsground
