#include "nlsground/scalar_ground.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nlsground {
namespace {

// Odd extension of the nonlinearity keeps RK stages finite if an iterate dips
// below zero mid-step (the event handling bails out right afterwards).
double npow(double u, double p) {
  return std::copysign(std::pow(std::abs(u), p - 1.0), u);
}

struct OdeState {
  double r, u, w;  // radius, value, radial derivative
};

double rhs_w(int dim, double p, double r, double u, double w) {
  // u'' = -(N-1)/r u' + u - u^{p-1}
  return -(dim - 1) / r * w + u - npow(u, p);
}

// One Dormand-Prince 5(4) step from (r,u,w) with step h. Returns the 5th
// order result and an embedded error estimate; k1 is reused (FSAL ignored for
// simplicity -- the systems here are tiny).
struct DpStep {
  double u, w, err_u, err_w;
  double upp_end;  // u'' at the step end, for Hermite resampling
};

DpStep dp45(int dim, double p, double r, double u, double w, double h) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double k1u = w, k1w = rhs_w(dim, p, r, u, w);
  double uu = u + h * a21 * k1u, ww = w + h * a21 * k1w;
  const double k2u = ww, k2w = rhs_w(dim, p, r + c2 * h, uu, ww);
  uu = u + h * (a31 * k1u + a32 * k2u);
  ww = w + h * (a31 * k1w + a32 * k2w);
  const double k3u = ww, k3w = rhs_w(dim, p, r + c3 * h, uu, ww);
  uu = u + h * (a41 * k1u + a42 * k2u + a43 * k3u);
  ww = w + h * (a41 * k1w + a42 * k2w + a43 * k3w);
  const double k4u = ww, k4w = rhs_w(dim, p, r + c4 * h, uu, ww);
  uu = u + h * (a51 * k1u + a52 * k2u + a53 * k3u + a54 * k4u);
  ww = w + h * (a51 * k1w + a52 * k2w + a53 * k3w + a54 * k4w);
  const double k5u = ww, k5w = rhs_w(dim, p, r + c5 * h, uu, ww);
  uu = u + h * (a61 * k1u + a62 * k2u + a63 * k3u + a64 * k4u + a65 * k5u);
  ww = w + h * (a61 * k1w + a62 * k2w + a63 * k3w + a64 * k4w + a65 * k5w);
  const double k6u = ww, k6w = rhs_w(dim, p, r + h, uu, ww);

  DpStep out;
  out.u = u + h * (b1 * k1u + b3 * k3u + b4 * k4u + b5 * k5u + b6 * k6u);
  out.w = w + h * (b1 * k1w + b3 * k3w + b4 * k4w + b5 * k5w + b6 * k6w);
  const double k7u = out.w, k7w = rhs_w(dim, p, r + h, out.u, out.w);
  out.err_u = h * (e1 * k1u + e3 * k3u + e4 * k4u + e5 * k5u + e6 * k6u + e7 * k7u);
  out.err_w = h * (e1 * k1w + e3 * k3w + e4 * k4w + e5 * k5w + e6 * k6w + e7 * k7w);
  out.upp_end = k7w;
  return out;
}

enum class Shot { overshoot, undershoot };

using Node = TraceNode;

// Integrates one shot from the origin series. If `trace` is non-null the
// accepted nodes are recorded and integration additionally stops once the
// solution decays below tail_cut (returning undershoot).
Shot integrate_shot(int dim, double p, double height, double r_stop, double tail_cut,
                    std::vector<Node>* trace) {
  constexpr double rtol = 1e-12, atol_rel = 1e-14;
  const double atol = atol_rel * height;
  const double r0 = 1e-3;
  const double curv = (height - npow(height, p)) / dim;  // u''(0)
  double r = r0;
  double u = height + 0.5 * curv * r0 * r0;
  double w = curv * r0;
  double h = 1e-4;
  const double hmax = 0.05;

  if (trace) {
    trace->clear();
    trace->push_back({r, u, w, rhs_w(dim, p, r, u, w)});
  }
  while (r < r_stop) {
    h = std::min(h, r_stop - r);
    const DpStep s = dp45(dim, p, r, u, w, h);
    const double scale_u = atol + rtol * std::max(std::abs(u), std::abs(s.u));
    const double scale_w = atol + rtol * std::max(std::abs(w), std::abs(s.w));
    const double err = std::max(std::abs(s.err_u) / scale_u, std::abs(s.err_w) / scale_w);
    if (err <= 1.0) {
      r += h;
      u = s.u;
      w = s.w;
      if (trace) trace->push_back({r, u, w, s.upp_end});
      if (u <= 0.0) return Shot::overshoot;
      if (w >= 0.0) return Shot::undershoot;
      if (trace && u < tail_cut) return Shot::undershoot;
    }
    const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    h = std::min(h, hmax);
    if (h < 1e-12) throw solver_error("shooting integrator step size underflow");
  }
  return Shot::undershoot;
}

// Quintic Hermite evaluation on the step [a.r, b.r].
double hermite5(const Node& a, const Node& b, double x) {
  const double d = b.r - a.r;
  const double t = (x - a.r) / d;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h3 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 0.5 * t3 - t4 + 0.5 * t5;
  return a.u * h0 + d * a.w * h1 + d * d * a.upp * h2 + b.u * h3 + d * b.w * h4 +
         d * d * b.upp * h5;
}

}  // namespace

double mass_critical_exponent(int dim) { return 2.0 + 4.0 / dim; }

double sobolev_critical_exponent(int dim) {
  if (dim <= 2) return std::numeric_limits<double>::infinity();
  return 2.0 * dim / (dim - 2.0);
}

void validate_exponent(const ScalarParams& prm, bool supercritical, bool noncritical) {
  if (prm.dim < 1 || prm.dim > 4)
    throw std::invalid_argument("dimension must be 1..4");
  if (!(prm.p > 2.0) || !(prm.p < sobolev_critical_exponent(prm.dim)))
    throw std::invalid_argument("exponent must satisfy 2 < p < 2N/(N-2)");
  const double pc = mass_critical_exponent(prm.dim);
  if (supercritical && !(prm.p > pc))
    throw std::invalid_argument("exponent must exceed 2 + 4/N");
  if (noncritical && prm.p == pc)
    throw std::invalid_argument("exponent must differ from 2 + 4/N");
}

double soliton_1d(double p, double x) {
  const double s = 1.0 / std::cosh(0.5 * (p - 2.0) * x);
  return std::pow(0.5 * p * s * s, 1.0 / (p - 2.0));
}

ScalarGroundState solve_scalar_ground(const ScalarParams& prm, GridPtr grid) {
  validate_exponent(prm);
  if (!grid) throw std::invalid_argument("null grid");
  if (grid->dim != prm.dim) throw std::invalid_argument("grid dimension mismatch");

  const double guess = std::pow(0.5 * prm.p, 1.0 / (prm.p - 2.0));  // 1D height
  const double r_events = std::max(grid->radius + 15.0, 40.0);

  // Bracket: u(0)=1 is the rest state (undershoot); expand upward until the
  // shot crosses zero.
  double lo = 1.0;
  double hi = 4.0 * guess;
  {
    int tries = 0;
    while (integrate_shot(prm.dim, prm.p, hi, r_events, 0.0, nullptr) != Shot::overshoot) {
      hi *= 2.0;
      if (++tries > 60) throw solver_error("no overshoot bracket for shooting");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (integrate_shot(prm.dim, prm.p, mid, r_events, 0.0, nullptr) == Shot::overshoot)
      hi = mid;
    else
      lo = mid;
  }
  const double height = 0.5 * (lo + hi);

  // Final pass with node recording, stopping once the profile is deep in the
  // linear regime; beyond that point the decay  u ~ C r^{-(N-1)/2} e^{-r}  of
  // the limiting equation u'' + (N-1)/r u' = u takes over (exact for N=1,3).
  ScalarGroundState st;
  st.params = prm;
  st.grid = grid;
  st.shoot_height = height;
  const double tail_cut = 1e-5 * height;
  integrate_shot(prm.dim, prm.p, height, r_events, tail_cut, &st.nodes);
  st.tail_r = st.nodes.back().r;
  st.tail_amp = std::max(st.nodes.back().u, 0.0);

  std::vector<double> vals(grid->points);
  for (size_t i = 0; i < grid->points; ++i) vals[i] = st.evaluate(grid->r[i]);
  st.field = make_field(grid, vals);

  st.mass_sq = lp_norm_pow(st.field, 2.0);
  st.grad_sq = grad_norm_sq(st.field);
  st.pnorm_pow = lp_norm_pow(st.field, prm.p);

  const RadialField lap = apply_laplacian(st.field);
  double worst = 0.0;
  for (size_t i = 0; i < grid->points; ++i) {
    const double res = -lap.values[i] + vals[i] - npow(vals[i], prm.p);
    worst = std::max(worst, std::abs(res));
  }
  st.residual = worst / height;
  return st;
}

double ScalarGroundState::evaluate(double r) const {
  r = std::abs(r);
  if (r >= tail_r)
    return tail_amp * std::pow(tail_r / r, 0.5 * (params.dim - 1)) *
           std::exp(-(r - tail_r));
  if (r <= nodes.front().r) {
    const double curv = (shoot_height - npow(shoot_height, params.p)) / params.dim;
    return shoot_height + 0.5 * curv * r * r;
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), r,
                                   [](double x, const Node& n) { return x < n.r; });
  return hermite5(*(it - 1), *it, r);
}

namespace {
double dconst(int dim, double p) { return dim * (p - 2.0) - 4.0; }
double wconst(int dim, double p) { return 2.0 * dim - (dim - 2.0) * p; }
}  // namespace

double scalar_lambda(const ScalarGroundState& up, double mu, double a) {
  validate_exponent(up.params, false, true);
  if (!(mu > 0.0) || !(a > 0.0)) throw std::invalid_argument("mu and a must be positive");
  const double D = dconst(up.params.dim, up.params.p);
  const double e = 2.0 * (up.params.p - 2.0) / D;
  return std::pow(mu, -4.0 / D) * std::pow(up.mass_sq, e) * std::pow(a, -e);
}

ScaledProfile scale_to_mass(const ScalarGroundState& up, double mu, double a, GridPtr grid) {
  if (!grid) throw std::invalid_argument("null grid");
  if (grid->dim != up.params.dim) throw std::invalid_argument("grid dimension mismatch");
  const double lam = scalar_lambda(up, mu, a);
  const double amp = std::pow(lam / mu, 1.0 / (up.params.p - 2.0));
  const double root = std::sqrt(lam);
  std::vector<double> vals(grid->points);
  for (size_t i = 0; i < grid->points; ++i) vals[i] = amp * up.evaluate(root * grid->r[i]);
  ScaledProfile out{make_field(grid, vals), lam};
  const double got = mass(out.field);
  if (std::abs(got - a) > 1e-4 * a)
    throw solver_error("rescaled profile mass off target; grid too coarse or too small");
  return out;
}

double scalar_energy_level(const ScalarGroundState& up, double mu, double a) {
  validate_exponent(up.params, false, true);
  if (!(mu > 0.0) || !(a > 0.0)) throw std::invalid_argument("mu and a must be positive");
  const double D = dconst(up.params.dim, up.params.p);
  const double W = wconst(up.params.dim, up.params.p);
  return 0.5 * (D / W) * std::pow(up.mass_sq, 2.0 * (up.params.p - 2.0) / D) *
         std::pow(mu, -4.0 / D) * std::pow(a, -W / D);
}

double scalar_energy_direct(const RadialField& u, double p, double mu) {
  return 0.5 * grad_norm_sq(u) - mu / p * lp_norm_pow(u, p);
}

double scalar_fiber_scale(int dim, double p, double mu, double grad_sq, double pnorm_pow) {
  validate_exponent({dim, p}, false, true);
  if (!(grad_sq > 0.0) || !(pnorm_pow > 0.0))
    throw std::invalid_argument("norms must be positive");
  const double D = dconst(dim, p);
  const double coef = (p - 2.0) * dim / (2.0 * p) * mu * pnorm_pow;
  return std::pow(grad_sq / coef, 2.0 / D);
}

double scalar_fiber_value(int dim, double p, double mu, double grad_sq, double pnorm_pow) {
  const double t = scalar_fiber_scale(dim, p, mu, grad_sq, pnorm_pow);
  const double gp = (p - 2.0) * dim / 2.0;
  return 0.5 * t * t * grad_sq - std::pow(t, gp) * mu * pnorm_pow / p;
}

double mass_threshold(const ScalarGroundState& up, const ScalarGroundState& uq,
                      double mu1, double mu2, double a) {
  validate_exponent(up.params, true);
  validate_exponent(uq.params, true);
  if (up.params.dim != uq.params.dim) throw std::invalid_argument("dimension mismatch");
  if (!(mu1 > 0.0) || !(mu2 > 0.0) || !(a > 0.0))
    throw std::invalid_argument("mu1, mu2, a must be positive");
  const int N = up.params.dim;
  const double p = up.params.p, q = uq.params.p;
  const double Dp = dconst(N, p), Dq = dconst(N, q);
  const double Wp = wconst(N, p), Wq = wconst(N, q);
  return std::pow((Dq / Dp) * (Wp / Wq), Dq / Wq) *
         std::pow(mu1, 4.0 * Dq / (Dp * Wq)) * std::pow(mu2, -4.0 / Wq) *
         std::pow(uq.mass_sq, 2.0 * (q - 2.0) / Wq) *
         std::pow(up.mass_sq, -2.0 * (p - 2.0) * Dq / (Wq * Dp)) *
         std::pow(a, (Wp / Wq) * (Dq / Dp));
}

double gn_constant(const ScalarGroundState& up) {
  const double p = up.params.p;
  const double theta = up.params.dim * (p - 2.0) / (2.0 * p);
  return std::pow(up.pnorm_pow, 1.0 / p) /
         (std::pow(up.grad_sq, 0.5 * theta) * std::pow(up.mass_sq, 0.5 * (1.0 - theta)));
}

}  // namespace nlsground
