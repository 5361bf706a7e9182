#pragma once
// Uniform radial grids on [0, R] for dimensions 1..4, with the quadrature,
// finite-difference and interpolation primitives everything else is built on.
// All integrals are over R^N restricted to radial functions:
//   integrate(f) = omega_{N-1} * \int_0^R f(r) r^{N-1} dr,
// with surface measures omega = 2, 2*pi, 4*pi, 2*pi^2 for N = 1..4.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsground {

// Solver-level failures (iteration did not converge, bracket not found, ...).
// Parameter and structural misuse throws std::invalid_argument instead.
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RadialGrid {
  int dim = 3;                 // N, 1..4
  double radius = 0.0;         // R
  std::size_t points = 0;      // M, nodes r_i = i*h
  double h = 0.0;              // grid spacing R/(M-1)
  double surface = 0.0;        // omega_{N-1}
  std::vector<double> r;       // node radii
  std::vector<double> vol;     // quadrature volume weights (Simpson * omega * r^{N-1} * h)
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int dim, double radius, std::size_t points);

struct RadialField {
  GridPtr grid;
  std::vector<double> values;
};

RadialField make_field(GridPtr grid);                                 // all zeros
RadialField make_field(GridPtr grid, const std::vector<double>& v);   // validated copy

// Throws std::invalid_argument unless both fields live on structurally equal grids.
void require_same_grid(const RadialField& a, const RadialField& b);

double integrate(const RadialField& f);
double lp_norm_pow(const RadialField& u, double p);     // \int |u|^p dx
double mass(const RadialField& u);                      // \int u^2 dx
double grad_norm_sq(const RadialField& u);              // \int |u'|^2 dx, centered differences
double mixed_integral(const RadialField& u, const RadialField& v,
                      double r1, double r2);            // \int |u|^{r1} |v|^{r2} dx

// Centered-difference radial derivative (second-order one-sided at the ends).
std::vector<double> derivative(const RadialField& u);

// u'' + (N-1)/r u' with centered second-order stencils; at r=0 the
// regular-origin limit N*u''(0); one-sided second-order stencils at r=R.
RadialField apply_laplacian(const RadialField& u);

// Monotone (Fritsch-Carlson) cubic interpolant on a uniform grid.
class Pchip {
 public:
  Pchip(GridPtr grid, const std::vector<double>& y);
  // Evaluates inside [0, R]; returns 0 beyond R.
  double operator()(double x) const;

 private:
  GridPtr grid_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

// Mass-preserving dilation (t*u)(r) = t^{N/2} u(t r), resampled on u's grid,
// zero where t*r falls beyond R. Requires t > 0.
RadialField dilate_field(const RadialField& u, double t);

}  // namespace nlsground
