#include "nlsground/beta_threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlsground {

namespace {

// Default truncation for the internal U_p grids behind beta_star. The
// Rayleigh minimizer decays like r^{2-N}, so the Dirichlet wall at R biases
// kappa high by O(1/R^{N-2}); R = 240 keeps that bias a few parts in 1e4
// for N = 3 while the exponential weight itself is long dead.
constexpr double kBetaRadius = 240.0;
constexpr std::size_t kBetaPoints = 12001;

// Flux coefficients on the faces between nodes i and i+1.
std::vector<double> face_coefs(const RadialGrid& g) {
  std::vector<double> s(g.points - 1);
  for (std::size_t i = 0; i + 1 < g.points; ++i) {
    const double rm = (static_cast<double>(i) + 0.5) * g.h;
    s[i] = g.surface * std::pow(rm, g.dim - 1) / g.h;
  }
  return s;
}

void check_weight(const RadialField& w) {
  if (!w.grid || w.values.size() != w.grid->points)
    throw std::invalid_argument("malformed weight field");
  double top = 0.0;
  for (double x : w.values) {
    if (x < 0.0 || !std::isfinite(x))
      throw std::invalid_argument("rayleigh_min needs a nonnegative weight");
    top = std::max(top, x);
  }
  if (top == 0.0)
    throw std::invalid_argument("rayleigh_min needs a nonzero weight");
}

// LDL^T factorization of the symmetric positive definite tridiagonal system
// (diag, off), then in-place solves.
struct TriFactor {
  std::vector<double> d, l;

  TriFactor(const std::vector<double>& diag, const std::vector<double>& off)
      : d(diag.size()), l(off.size()) {
    d[0] = diag[0];
    for (std::size_t i = 1; i < diag.size(); ++i) {
      l[i - 1] = off[i - 1] / d[i - 1];
      d[i] = diag[i] - l[i - 1] * off[i - 1];
    }
  }

  void solve(std::vector<double>& x) const {
    for (std::size_t i = 1; i < d.size(); ++i) x[i] -= l[i - 1] * x[i - 1];
    x.back() /= d.back();
    for (std::size_t i = d.size() - 1; i-- > 0;)
      x[i] = x[i] / d[i] - l[i] * x[i + 1];
  }
};

// One inverse-power-iteration run on the reduced (Dirichlet) system.
// Returns kappa as the Rayleigh quotient of the final normalized iterate.
double smallest_eigenvalue(const RadialField& weight, std::vector<double>* vec,
                           int* iters) {
  const RadialGrid& g = *weight.grid;
  const std::size_t n = g.points - 1;  // unknowns; h(R) = 0 eliminated
  const std::vector<double> s = face_coefs(g);

  std::vector<double> diag(n), off(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    diag[i] = (i ? s[i - 1] : 0.0) + s[i];
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -s[i];
  const TriFactor factor(diag, off);

  std::vector<double> m(n);  // weighted mass diagonal, library quadrature
  for (std::size_t i = 0; i < n; ++i) m[i] = weight.values[i] * g.vol[i];

  std::vector<double> x(n, 1.0), y(n);
  double kappa = 0.0;
  const int max_iters = 500;
  for (int it = 1; it <= max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) y[i] = m[i] * x[i];
    factor.solve(y);
    double nrm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm2 += m[i] * y[i] * y[i];
    if (!(nrm2 > 0.0))
      throw solver_error("inverse power iteration lost the weighted subspace");
    const double inv = 1.0 / std::sqrt(nrm2);
    for (double& v : y) v *= inv;
    double energy = s[n - 1] * y[n - 1] * y[n - 1];  // face against h(R)=0
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d = y[i + 1] - y[i];
      energy += s[i] * d * d;
    }
    const double prev = kappa;
    kappa = energy;  // \int w y^2 = 1 after normalization
    x.swap(y);
    if (it > 1 && std::abs(kappa - prev) <= 1e-13 * kappa) {
      if (iters) *iters = it;
      if (vec) *vec = std::move(x);
      return kappa;
    }
  }
  throw solver_error("inverse power iteration stagnated");
}

RadialField power_weight(const RadialField& u, double e) {
  RadialField w = make_field(u.grid);
  for (std::size_t i = 0; i < w.values.size(); ++i)
    w.values[i] = std::pow(std::abs(u.values[i]), e);
  return w;
}

double fitted_loglog_slope(const std::vector<BetaScalingRow>& rows) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& row : rows) {
    const double x = std::log(row.mass), y = std::log(row.beta);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0))
    throw std::invalid_argument("slope fit needs at least two distinct masses");
  return (n * sxy - sx * sy) / den;
}

}  // namespace

void validate_beta_problem(const BetaProblem& bp) {
  if (bp.dim < 1 || bp.dim > 4)
    throw std::invalid_argument("dimension must be 1..4");
  if (!(bp.mu > 0.0) || !(bp.mass > 0.0))
    throw std::invalid_argument("mu and mass must be positive");
  if (!(bp.r > 0.0))
    throw std::invalid_argument("coupling exponent r must be positive");
  validate_exponent({bp.dim, bp.p}, /*supercritical=*/true);
}

RayleighResult rayleigh_min_full(const RadialField& weight) {
  check_weight(weight);
  const RadialGrid& g = *weight.grid;
  if (g.points < 4)
    throw std::invalid_argument("rayleigh_min needs at least 4 grid points");

  RayleighResult out;
  std::vector<double> vec;
  out.kappa = smallest_eigenvalue(weight, &vec, &out.iterations);

  out.minimizer = make_field(weight.grid);
  std::copy(vec.begin(), vec.end(), out.minimizer.values.begin());
  double peak = 0.0;
  for (double v : out.minimizer.values)
    if (std::abs(v) > std::abs(peak)) peak = v;
  if (peak < 0.0)
    for (double& v : out.minimizer.values) v = -v;

  out.error_estimate = std::numeric_limits<double>::quiet_NaN();
  if ((g.points - 1) % 2 == 0 && g.points >= 9) {
    const std::size_t mc = (g.points - 1) / 2 + 1;
    RadialField coarse = make_field(make_grid(g.dim, g.radius, mc));
    for (std::size_t i = 0; i < mc; ++i)
      coarse.values[i] = weight.values[2 * i];
    const double k2h = smallest_eigenvalue(coarse, nullptr, nullptr);
    out.error_estimate = std::abs(out.kappa - k2h) / 3.0;
  }
  return out;
}

double rayleigh_min(const RadialField& weight) {
  check_weight(weight);
  if (weight.grid->points < 4)
    throw std::invalid_argument("rayleigh_min needs at least 4 grid points");
  return smallest_eigenvalue(weight, nullptr, nullptr);
}

double rayleigh_quotient(const RadialField& weight, const RadialField& h) {
  check_weight(weight);
  require_same_grid(weight, h);
  const RadialGrid& g = *weight.grid;
  const std::vector<double> s = face_coefs(g);
  double energy = 0.0;
  for (std::size_t i = 0; i + 1 < g.points; ++i) {
    const double d = h.values[i + 1] - h.values[i];
    energy += s[i] * d * d;
  }
  double wmass = 0.0;
  for (std::size_t i = 0; i < g.points; ++i)
    wmass += weight.values[i] * g.vol[i] * h.values[i] * h.values[i];
  if (!(wmass > 0.0))
    throw std::invalid_argument("candidate has no weighted mass");
  return energy / wmass;
}

double beta_prefactor(const BetaProblem& bp, const ScalarGroundState& up) {
  validate_beta_problem(bp);
  if (up.params.dim != bp.dim || up.params.p != bp.p)
    throw std::invalid_argument("ground state solved for a different (N, p)");
  const double D = bp.dim * (bp.p - 2.0) - 4.0;
  return 0.5 * std::pow(bp.mu, (bp.r * bp.dim - 4.0) / D) *
         std::pow(up.mass_sq, 2.0 * (bp.p - 2.0 - bp.r) / D) *
         std::pow(bp.mass, -2.0 * (bp.p - 2.0 - bp.r) / D);
}

double beta_star(const BetaProblem& bp) {
  return beta_star(bp, kBetaRadius, kBetaPoints);
}

double beta_star(const BetaProblem& bp, double radius, std::size_t points) {
  validate_beta_problem(bp);
  if (bp.dim <= 2) return 0.0;  // whole-space infimum vanishes
  const auto grid = make_grid(bp.dim, radius, points);
  const ScalarGroundState up = solve_scalar_ground({bp.dim, bp.p}, grid);
  return beta_prefactor(bp, up) * rayleigh_min(power_weight(up.field, bp.r));
}

std::pair<double, double> beta_bounds(const BetaProblem& bp, double sobolev,
                                      const ScalarGroundState& up) {
  validate_beta_problem(bp);
  if (bp.dim <= 2)
    throw std::invalid_argument("the Sobolev lower bound needs N >= 3");
  if (!(sobolev > 0.0))
    throw std::invalid_argument("Sobolev constant must be positive");
  const double two_star = sobolev_critical_exponent(bp.dim);
  const double hoelder = two_star * bp.r / (two_star - 2.0);
  if (hoelder < 1.0)
    throw std::invalid_argument(
        "coupling exponent too small: the Hoelder companion exponent "
        "2*r/(2*-2) drops below 1 and the lower bound does not apply");
  const double pref = beta_prefactor(bp, up);
  const double unorm = std::pow(lp_norm_pow(up.field, hoelder), 1.0 / hoelder);
  const double lower = pref * sobolev * std::pow(unorm, -bp.r);
  const double upper = pref * up.grad_sq / lp_norm_pow(up.field, bp.r + 2.0);
  return {lower, upper};
}

double sobolev_constant(int dim) {
  if (dim != 3 && dim != 4)
    throw std::invalid_argument("sobolev_constant needs N in {3, 4}");
  const auto grid = make_grid(dim, 320.0, 16001);
  const double two_star = sobolev_critical_exponent(dim);
  const double expo = -(dim - 2.0) / 2.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 24; ++k) {
    const double eps = 0.5 * std::pow(4.0, k / 24.0);
    RadialField t = make_field(grid);
    for (std::size_t i = 0; i < grid->points; ++i)
      t.values[i] = std::pow(1.0 + grid->r[i] * grid->r[i] / eps, expo);
    const double q = grad_norm_sq(t) /
                     std::pow(lp_norm_pow(t, two_star), 2.0 / two_star);
    best = std::min(best, q);
  }
  return best;
}

BetaScalingReport beta_scaling_report(const BetaProblem& bp,
                                      const std::vector<double>& a_values) {
  validate_beta_problem(bp);
  if (bp.dim <= 2)
    throw std::invalid_argument("scaling report needs N >= 3");
  if (a_values.size() < 2)
    throw std::invalid_argument("scaling report needs at least two masses");
  for (double a : a_values)
    if (!(a > 0.0))
      throw std::invalid_argument("masses must be positive");

  const auto grid = make_grid(bp.dim, kBetaRadius, kBetaPoints);
  const ScalarGroundState up = solve_scalar_ground({bp.dim, bp.p}, grid);
  const double kappa = rayleigh_min(power_weight(up.field, bp.r));

  BetaScalingReport report;
  for (double a : a_values) {
    BetaProblem at = bp;
    at.mass = a;
    report.rows.push_back({a, beta_prefactor(at, up) * kappa});
  }
  report.slope = fitted_loglog_slope(report.rows);
  const double D = bp.dim * (bp.p - 2.0) - 4.0;
  report.predicted_slope = -2.0 * (bp.p - 2.0 - bp.r) / D;
  return report;
}

}  // namespace nlsground
