#include "nlsground/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nlsground {

namespace {

double surface_measure(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    case 4: return 2.0 * std::numbers::pi * std::numbers::pi;
    default: throw std::invalid_argument("dim must be 1..4, got " + std::to_string(dim));
  }
}

// Composite Simpson coefficients (interval count M-1 even), falling back to
// Simpson + 3/8 rule on the last three intervals when M-1 is odd. Exact for
// cubics, which covers integrate()'s polynomial-exactness contract.
std::vector<double> simpson_coeffs(std::size_t m) {
  std::vector<double> c(m, 0.0);
  std::size_t intervals = m - 1;
  std::size_t simpson_end = intervals;  // node index where the plain Simpson part stops
  if (intervals % 2 != 0) {
    if (intervals < 3) throw std::invalid_argument("grid too small for quadrature");
    simpson_end = intervals - 3;
  }
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    c[i] += 1.0 / 3.0;
    c[i + 1] += 4.0 / 3.0;
    c[i + 2] += 1.0 / 3.0;
  }
  if (simpson_end != intervals) {
    std::size_t i = simpson_end;
    c[i] += 3.0 / 8.0;
    c[i + 1] += 9.0 / 8.0;
    c[i + 2] += 9.0 / 8.0;
    c[i + 3] += 3.0 / 8.0;
  }
  return c;
}

}  // namespace

GridPtr make_grid(int dim, double radius, std::size_t points) {
  double omega = surface_measure(dim);
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("radius must be positive and finite");
  if (points < 16)
    throw std::invalid_argument("points must be >= 16, got " + std::to_string(points));

  auto g = std::make_shared<RadialGrid>();
  g->dim = dim;
  g->radius = radius;
  g->points = points;
  g->h = radius / static_cast<double>(points - 1);
  g->surface = omega;
  g->r.resize(points);
  g->vol.resize(points);
  auto coeff = simpson_coeffs(points);
  for (std::size_t i = 0; i < points; ++i) {
    g->r[i] = static_cast<double>(i) * g->h;
    g->vol[i] = omega * std::pow(g->r[i], dim - 1) * g->h * coeff[i];
  }
  return g;
}

RadialField make_field(GridPtr grid) {
  if (!grid) throw std::invalid_argument("null grid");
  std::vector<double> zeros(grid->points, 0.0);
  return RadialField{std::move(grid), std::move(zeros)};
}

RadialField make_field(GridPtr grid, const std::vector<double>& v) {
  if (!grid) throw std::invalid_argument("null grid");
  if (v.size() != grid->points)
    throw std::invalid_argument("field size does not match grid points");
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("field contains non-finite values");
  return RadialField{std::move(grid), v};
}

void require_same_grid(const RadialField& a, const RadialField& b) {
  if (!a.grid || !b.grid) throw std::invalid_argument("field has no grid");
  if (a.grid == b.grid) return;
  const auto& x = *a.grid;
  const auto& y = *b.grid;
  if (x.dim != y.dim || x.points != y.points || x.radius != y.radius)
    throw std::invalid_argument("fields live on different grids");
}

double integrate(const RadialField& f) {
  if (!f.grid || f.values.size() != f.grid->points)
    throw std::invalid_argument("malformed field");
  double s = 0.0;
  const auto& w = f.grid->vol;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f.values[i];
  return s;
}

double lp_norm_pow(const RadialField& u, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
  if (!u.grid || u.values.size() != u.grid->points)
    throw std::invalid_argument("malformed field");
  double s = 0.0;
  const auto& w = u.grid->vol;
  if (p == 2.0) {
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u.values[i] * u.values[i];
  } else {
    for (std::size_t i = 0; i < w.size(); ++i)
      s += w[i] * std::pow(std::abs(u.values[i]), p);
  }
  return s;
}

double mass(const RadialField& u) { return lp_norm_pow(u, 2.0); }

std::vector<double> derivative(const RadialField& u) {
  const auto& y = u.values;
  std::size_t m = y.size();
  double h = u.grid->h;
  std::vector<double> d(m);
  d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
  d[m - 1] = (3.0 * y[m - 1] - 4.0 * y[m - 2] + y[m - 3]) / (2.0 * h);
  return d;
}

double grad_norm_sq(const RadialField& u) {
  if (!u.grid || u.values.size() != u.grid->points)
    throw std::invalid_argument("malformed field");
  auto d = derivative(u);
  double s = 0.0;
  const auto& w = u.grid->vol;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * d[i] * d[i];
  return s;
}

double mixed_integral(const RadialField& u, const RadialField& v, double r1, double r2) {
  require_same_grid(u, v);
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw std::invalid_argument("exponents must be positive");
  double s = 0.0;
  const auto& w = u.grid->vol;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double a = std::abs(u.values[i]);
    double b = std::abs(v.values[i]);
    if (a > 0.0 && b > 0.0) s += w[i] * std::pow(a, r1) * std::pow(b, r2);
  }
  return s;
}

RadialField apply_laplacian(const RadialField& u) {
  if (!u.grid || u.values.size() != u.grid->points)
    throw std::invalid_argument("malformed field");
  const auto& g = *u.grid;
  const auto& y = u.values;
  std::size_t m = g.points;
  double h = g.h;
  int n = g.dim;
  std::vector<double> out(m);

  // Regular-origin limit N·u''(0) with the even extension u(-h) = u(h).
  out[0] = 2.0 * n * (y[1] - y[0]) / (h * h);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double upp = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
    const double up = (y[i + 1] - y[i - 1]) / (2.0 * h);
    out[i] = upp + (n - 1) / g.r[i] * up;
  }
  // r = R: one-sided second-order u'' and u'
  double upp = (2.0 * y[m - 1] - 5.0 * y[m - 2] + 4.0 * y[m - 3] - y[m - 4]) / (h * h);
  double up = (3.0 * y[m - 1] - 4.0 * y[m - 2] + y[m - 3]) / (2.0 * h);
  out[m - 1] = upp + (n - 1) / g.r[m - 1] * up;
  return RadialField{u.grid, std::move(out)};
}

Pchip::Pchip(GridPtr grid, const std::vector<double>& y) : grid_(std::move(grid)), y_(y) {
  if (!grid_ || y_.size() != grid_->points)
    throw std::invalid_argument("interpolant data does not match grid");
  std::size_t m = y_.size();
  double h = grid_->h;
  slope_.assign(m, 0.0);
  std::vector<double> d(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) d[i] = (y_[i + 1] - y_[i]) / h;
  // Fritsch-Carlson limited slopes: harmonic mean of neighbor secants where
  // they agree in sign, zero at local extrema.
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (d[i - 1] * d[i] > 0.0)
      slope_[i] = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
  }
  auto endpoint = [](double d0, double d1) {
    double s = 1.5 * d0 - 0.5 * d1;
    if (s * d0 <= 0.0) return 0.0;
    if (std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  };
  slope_[0] = endpoint(d[0], d[1]);
  slope_[m - 1] = endpoint(d[m - 2], d[m - 3]);
}

double Pchip::operator()(double x) const {
  if (x < 0.0) x = -x;  // radial evenness
  const auto& g = *grid_;
  if (x >= g.radius) return x == g.radius ? y_.back() : 0.0;
  std::size_t i = std::min(static_cast<std::size_t>(x / g.h), g.points - 2);
  double t = (x - g.r[i]) / g.h;
  double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  double h10 = t * (1.0 - t) * (1.0 - t);
  double h01 = t * t * (3.0 - 2.0 * t);
  double h11 = t * t * (t - 1.0);
  return h00 * y_[i] + h10 * g.h * slope_[i] + h01 * y_[i + 1] + h11 * g.h * slope_[i + 1];
}

RadialField dilate_field(const RadialField& u, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("dilation parameter must be positive");
  Pchip interp(u.grid, u.values);
  const auto& g = *u.grid;
  double amp = std::pow(t, 0.5 * g.dim);
  std::vector<double> out(g.points);
  for (std::size_t i = 0; i < g.points; ++i) out[i] = amp * interp(t * g.r[i]);
  return RadialField{u.grid, std::move(out)};
}

}  // namespace nlsground
