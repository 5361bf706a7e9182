#pragma once
// Radial ground states U_p of the scalar equation  -Δu + u = u^{p-1}  on R^N,
// solved by adaptive RK45 shooting with bisection on u(0), plus the closed
// forms built from them: the frequency lambda_{p,mu,a} and profile z_{p,mu,a}
// with prescribed mass a, the constrained energy level m_{p,mu,a}, the scalar
// fiber projection, the mass threshold between two single-component levels,
// and the sharp Gagliardo-Nirenberg constant.

#include <vector>

#include "nlsground/radial.hpp"

namespace nlsground {

struct ScalarParams {
  int dim = 3;
  double p = 4.0;
};

// Exponent landmarks: mass-critical 2 + 4/N and Sobolev-critical 2N/(N-2)
// (infinity for N <= 2).
double mass_critical_exponent(int dim);
double sobolev_critical_exponent(int dim);

// Requires 2 < p < 2*; `supercritical` additionally requires p > 2 + 4/N,
// `noncritical` requires p != 2 + 4/N. Throws std::invalid_argument.
void validate_exponent(const ScalarParams& prm, bool supercritical = false,
                       bool noncritical = false);

// One accepted integrator step end: radius, value, first and second derivative.
struct TraceNode {
  double r, u, w, upp;
};

struct ScalarGroundState {
  ScalarParams params;
  GridPtr grid;
  RadialField field;     // U_p sampled on the grid
  double shoot_height = 0.0;  // U_p(0)
  double mass_sq = 0.0;       // \int U^2
  double grad_sq = 0.0;       // \int |U'|^2
  double pnorm_pow = 0.0;     // \int U^p
  double residual = 0.0;      // sup |-ΔU + U - U^{p-1}| / sup U  (FD measure)
  double tail_r = 0.0;        // matching radius of the asymptotic continuation
  double tail_amp = 0.0;      // U(tail_r)
  std::vector<TraceNode> nodes;  // integrator trace on [~0, tail_r]

  // Evaluates the profile at any radius (quintic Hermite between trace nodes,
  // asymptotic tail beyond tail_r); resolution-independent of `grid`.
  double evaluate(double r) const;
};

ScalarGroundState solve_scalar_ground(const ScalarParams& prm, GridPtr grid);

// Exact 1D profile ((p/2) sech^2((p-2)x/2))^{1/(p-2)}.
double soliton_1d(double p, double x);

// Frequency of the mass-a rescaling z(x) = (lambda/mu)^{1/(p-2)} U_p(sqrt(lambda) x).
double scalar_lambda(const ScalarGroundState& up, double mu, double a);

// z_{p,mu,a} sampled on `grid` (may differ from the grid U_p was solved on),
// together with its frequency lambda.
struct ScaledProfile {
  RadialField field;
  double lambda = 0.0;
};
ScaledProfile scale_to_mass(const ScalarGroundState& up, double mu, double a, GridPtr grid);

// Constrained energy level m_{p,mu,a} = I_{p,mu}[z_{p,mu,a}] in closed form,
// where I_{p,mu}[u] = 1/2 ||u'||_2^2 - mu/p ||u||_p^p.
double scalar_energy_level(const ScalarGroundState& up, double mu, double a);

// Direct quadrature evaluation of I_{p,mu} on a field (cross-check for the above).
double scalar_energy_direct(const RadialField& u, double p, double mu);

// Unique maximizer of t -> I_{p,mu}[t*u] along the mass-preserving dilation.
double scalar_fiber_scale(int dim, double p, double mu, double grad_sq, double pnorm_pow);
// Value of I_{p,mu} at that maximizer, in closed form.
double scalar_fiber_value(int dim, double p, double mu, double grad_sq, double pnorm_pow);

// Mass b* with m_{q,mu2,b*} = m_{p,mu1,a}: the second component's single-state
// level beats the first's exactly when b > b*.
double mass_threshold(const ScalarGroundState& up, const ScalarGroundState& uq,
                      double mu1, double mu2, double a);

// Sharp constant of ||u||_p <= C ||∇u||_2^θ ||u||_2^{1-θ}, θ = N(p-2)/(2p),
// attained at U_p.
double gn_constant(const ScalarGroundState& up);

}  // namespace nlsground
